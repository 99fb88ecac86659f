#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ffcnn/tensor.hpp"

namespace ffcnn {

struct Dataset {
    Tensor images;                // [S,H,W], pixels in [0,1]
    std::vector<uint8_t> labels;  // one label 0..9 per image
    std::string split;            // train | val | test

    int size() const { return images.empty() ? 0 : images.dim(0); }
    Tensor image(int index) const;  // [H,W] copy
    Dataset take(int count) const;  // first count samples
};

// IDX containers: big-endian magic (0x00000803 images, 0x00000801 labels),
// big-endian dimension sizes, then raw unsigned bytes.
Tensor parse_idx_images(const std::vector<uint8_t>& bytes, const std::string& origin = "idx");
std::vector<uint8_t> parse_idx_labels(const std::vector<uint8_t>& bytes, const std::string& origin = "idx");

// reads a file, transparently inflating gzip payloads (detected by magic)
std::vector<uint8_t> read_file_bytes(const std::string& path);

// images + labels file pair -> dataset; sizes must agree
Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path, const std::string& split);

// the four standard files (train-images-idx3-ubyte etc., optionally .gz)
struct MnistFiles {
    Dataset train;  // 60k
    Dataset test;   // 10k
};
MnistFiles load_mnist_dir(const std::string& dir);

// deterministic seeded shuffle of the 60k source, then 50k/10k partition
std::pair<Dataset, Dataset> split_train_val(const Dataset& source, uint64_t seed);

// dataset payload in the checkpoint container format
void save_dataset_cache(const std::string& path, const Dataset& ds);
Dataset load_dataset_cache(const std::string& path);

}  // namespace ffcnn
