#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ffcnn/tensor.hpp"

namespace ffcnn {

// Container format shared by network checkpoints and dataset caches:
//   "FFCNN" magic, u32 version, u32 payload type, config echo (u32 length +
//   bytes), then payload-specific sections. All integers and floats are
//   little-endian; float arrays are raw 32-bit.
enum class PayloadType : uint32_t { FfNetwork = 0, BpNetwork = 1, Dataset = 2 };

constexpr uint32_t kContainerVersion = 1;

class ContainerWriter {
   public:
    void u32(uint32_t v);
    void u64(uint64_t v);
    void f32(float v);
    void f32_array(const float* p, int64_t n);
    void bytes(const void* p, size_t n);
    void str(const std::string& s);        // u32 length + bytes
    void tensor(const Tensor& t);          // u32 rank + extents + data

    // writes magic/version/type/config echo followed by the accumulated body;
    // write-temp-then-rename so a crash never leaves a truncated file
    void save(const std::string& path, PayloadType type, const std::string& config_echo) const;

   private:
    std::vector<uint8_t> body_;
};

class ContainerReader {
   public:
    explicit ContainerReader(const std::string& path);

    PayloadType type() const { return type_; }
    const std::string& config_echo() const { return config_echo_; }

    uint32_t u32();
    uint64_t u64();
    float f32();
    void f32_array(float* p, int64_t n);
    std::string str();
    Tensor tensor();
    bool at_end() const { return pos_ == buf_.size(); }

   private:
    void need(size_t n) const;
    std::vector<uint8_t> buf_;
    size_t pos_ = 0;
    PayloadType type_ = PayloadType::FfNetwork;
    std::string config_echo_;
    std::string path_;
};

}  // namespace ffcnn
