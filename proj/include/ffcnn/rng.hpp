#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace ffcnn {

// Deterministic splitmix64 generator. All randomness in a run flows from one
// master seed through named child streams, so identical configs replay
// bit-identically regardless of platform or thread count.
class Rng {
   public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // [0,1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    float next_float() { return static_cast<float>(next_u64() >> 40) * 0x1.0p-24f; }

    float uniform(float lo, float hi) { return lo + (hi - lo) * next_float(); }

    // [0,n), n >= 1, via 128-bit multiply-shift
    int uniform_int(int n) {
        return static_cast<int>((static_cast<unsigned __int128>(next_u64()) * static_cast<uint64_t>(n)) >> 64);
    }

    // standard normal via Box-Muller
    float normal() {
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return static_cast<float>(std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2));
    }

    // independent child stream identified by a tag
    Rng split(uint64_t tag) {
        Rng mix(state_ ^ (0xd1b54a32d192ed03ULL * (tag + 1)));
        return Rng(mix.next_u64());
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_int(static_cast<int>(i)));
            std::swap(v[i - 1], v[j]);
        }
    }

   private:
    uint64_t state_;
};

}  // namespace ffcnn
