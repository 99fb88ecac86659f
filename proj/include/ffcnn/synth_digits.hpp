#pragma once

#include <cstdint>
#include <string>

#include "ffcnn/rng.hpp"
#include "ffcnn/tensor.hpp"

namespace ffcnn {

// Procedurally rendered 28x28 digit glyphs with random affine jitter, stroke
// width variation, blur and noise. Written as standard IDX files with the
// official shapes (60k train / 10k test) so the full pipeline runs when no
// real data set is available.
Tensor render_digit(int digit, Rng& rng);

// writes train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-...,
// t10k-labels-... into dir; deterministic in seed
void write_synthetic_idx(const std::string& dir, uint64_t seed, int train_count = 60000, int test_count = 10000);

}  // namespace ffcnn
