#include "ffcnn/data_io.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "ffcnn/checkpoint.hpp"
#include "ffcnn/rng.hpp"

namespace ffcnn {

namespace {

constexpr uint32_t kImagesMagic = 0x00000803;
constexpr uint32_t kLabelsMagic = 0x00000801;

uint32_t read_be32(const std::vector<uint8_t>& b, size_t pos, const std::string& origin) {
    if (pos + 4 > b.size()) {
        throw std::runtime_error(origin + ": truncated header, need 4 bytes at offset " + std::to_string(pos) +
                                 ", file has " + std::to_string(b.size()));
    }
    return static_cast<uint32_t>(b[pos]) << 24 | static_cast<uint32_t>(b[pos + 1]) << 16 |
           static_cast<uint32_t>(b[pos + 2]) << 8 | static_cast<uint32_t>(b[pos + 3]);
}

std::vector<uint8_t> gunzip(const std::vector<uint8_t>& in, const std::string& path) {
    z_stream zs{};
    if (inflateInit2(&zs, 15 + 16) != Z_OK) throw std::runtime_error(path + ": inflateInit failed");
    std::vector<uint8_t> out;
    out.reserve(in.size() * 4);
    std::vector<uint8_t> chunk(1 << 16);
    zs.next_in = const_cast<Bytef*>(in.data());
    zs.avail_in = static_cast<uInt>(in.size());
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        zs.next_out = chunk.data();
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw std::runtime_error(path + ": gzip inflate failed with code " + std::to_string(rc));
        }
        out.insert(out.end(), chunk.data(), chunk.data() + (chunk.size() - zs.avail_out));
    }
    inflateEnd(&zs);
    return out;
}

}  // namespace

Tensor Dataset::image(int index) const {
    const int h = images.dim(1);
    const int w = images.dim(2);
    const int64_t plane = static_cast<int64_t>(h) * w;
    return Tensor({h, w},
                  std::vector<float>(images.data() + index * plane, images.data() + (index + 1) * plane));
}

Dataset Dataset::take(int count) const {
    if (count <= 0 || count >= size()) return *this;
    const int h = images.dim(1);
    const int w = images.dim(2);
    const int64_t plane = static_cast<int64_t>(h) * w;
    Dataset out;
    out.split = split;
    out.images = Tensor({count, h, w},
                        std::vector<float>(images.data(), images.data() + count * plane));
    out.labels.assign(labels.begin(), labels.begin() + count);
    return out;
}

std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) return gunzip(bytes, path);
    return bytes;
}

Tensor parse_idx_images(const std::vector<uint8_t>& bytes, const std::string& origin) {
    const uint32_t magic = read_be32(bytes, 0, origin);
    if (magic != kImagesMagic) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "0x%08x, expected 0x%08x", magic, kImagesMagic);
        throw std::runtime_error(origin + ": bad IDX image magic " + buf);
    }
    const uint32_t count = read_be32(bytes, 4, origin);
    const uint32_t rows = read_be32(bytes, 8, origin);
    const uint32_t cols = read_be32(bytes, 12, origin);
    if (count == 0 || rows == 0 || cols == 0) {
        throw std::runtime_error(origin + ": zero dimension in IDX header (" + std::to_string(count) + "x" +
                                 std::to_string(rows) + "x" + std::to_string(cols) + ")");
    }
    const size_t expected = 16 + static_cast<size_t>(count) * rows * cols;
    if (bytes.size() != expected) {
        throw std::runtime_error(origin + ": payload length mismatch, expected " + std::to_string(expected) +
                                 " bytes for " + std::to_string(count) + "x" + std::to_string(rows) + "x" +
                                 std::to_string(cols) + ", got " + std::to_string(bytes.size()));
    }
    Tensor images({static_cast<int>(count), static_cast<int>(rows), static_cast<int>(cols)});
    float* p = images.data();
    const uint8_t* src = bytes.data() + 16;
    const int64_t n = images.size();
    for (int64_t i = 0; i < n; ++i) p[i] = static_cast<float>(src[i]) * (1.0f / 255.0f);
    return images;
}

std::vector<uint8_t> parse_idx_labels(const std::vector<uint8_t>& bytes, const std::string& origin) {
    const uint32_t magic = read_be32(bytes, 0, origin);
    if (magic != kLabelsMagic) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "0x%08x, expected 0x%08x", magic, kLabelsMagic);
        throw std::runtime_error(origin + ": bad IDX label magic " + buf);
    }
    const uint32_t count = read_be32(bytes, 4, origin);
    const size_t expected = 8 + count;
    if (bytes.size() != expected) {
        throw std::runtime_error(origin + ": payload length mismatch, expected " + std::to_string(expected) +
                                 " bytes for " + std::to_string(count) + " labels, got " +
                                 std::to_string(bytes.size()));
    }
    std::vector<uint8_t> labels(bytes.begin() + 8, bytes.end());
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 9) {
            throw std::runtime_error(origin + ": label value " + std::to_string(labels[i]) + " at index " +
                                     std::to_string(i) + " out of range 0..9");
        }
    }
    return labels;
}

Dataset load_idx_pair(const std::string& images_path, const std::string& labels_path, const std::string& split) {
    Dataset ds;
    ds.images = parse_idx_images(read_file_bytes(images_path), images_path);
    ds.labels = parse_idx_labels(read_file_bytes(labels_path), labels_path);
    ds.split = split;
    if (static_cast<int>(ds.labels.size()) != ds.images.dim(0)) {
        throw std::runtime_error(images_path + ": image count " + std::to_string(ds.images.dim(0)) +
                                 " != label count " + std::to_string(ds.labels.size()) + " in " + labels_path);
    }
    return ds;
}

namespace {
std::string find_idx_file(const std::string& dir, const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        const std::string path = dir + "/" + stem + suffix;
        std::ifstream probe(path, std::ios::binary);
        if (probe) return path;
    }
    throw std::runtime_error("dataset file " + dir + "/" + stem + "[.gz] not found");
}
}  // namespace

MnistFiles load_mnist_dir(const std::string& dir) {
    MnistFiles f;
    f.train = load_idx_pair(find_idx_file(dir, "train-images-idx3-ubyte"),
                            find_idx_file(dir, "train-labels-idx1-ubyte"), "train");
    f.test = load_idx_pair(find_idx_file(dir, "t10k-images-idx3-ubyte"),
                           find_idx_file(dir, "t10k-labels-idx1-ubyte"), "test");
    return f;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& source, uint64_t seed) {
    if (source.size() != 60000) {
        throw std::invalid_argument("split_train_val: expected the 60000-image source, got " +
                                    std::to_string(source.size()));
    }
    const int h = source.images.dim(1);
    const int w = source.images.dim(2);
    const int64_t plane = static_cast<int64_t>(h) * w;

    std::vector<int> order(60000);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng(seed).split(1001);  // dedicated split stream
    rng.shuffle(order);

    auto gather = [&](int begin, int count, const std::string& split) {
        Dataset out;
        out.split = split;
        out.images = Tensor({count, h, w});
        out.labels.resize(static_cast<size_t>(count));
        for (int i = 0; i < count; ++i) {
            const int src = order[static_cast<size_t>(begin + i)];
            std::copy(source.images.data() + src * plane, source.images.data() + (src + 1) * plane,
                      out.images.data() + i * plane);
            out.labels[static_cast<size_t>(i)] = source.labels[static_cast<size_t>(src)];
        }
        return out;
    };
    return {gather(0, 50000, "train"), gather(50000, 10000, "val")};
}

void save_dataset_cache(const std::string& path, const Dataset& ds) {
    ContainerWriter w;
    w.str(ds.split);
    w.tensor(ds.images);
    w.str(std::string(ds.labels.begin(), ds.labels.end()));
    w.save(path, PayloadType::Dataset, "split=" + ds.split);
}

Dataset load_dataset_cache(const std::string& path) {
    ContainerReader r(path);
    if (r.type() != PayloadType::Dataset) {
        throw std::runtime_error(path + ": container does not hold a dataset payload");
    }
    Dataset ds;
    ds.split = r.str();
    ds.images = r.tensor();
    const std::string raw = r.str();
    ds.labels.assign(raw.begin(), raw.end());
    if (static_cast<int>(ds.labels.size()) != ds.images.dim(0)) {
        throw std::runtime_error(path + ": cached label count " + std::to_string(ds.labels.size()) +
                                 " != image count " + std::to_string(ds.images.dim(0)));
    }
    return ds;
}

}  // namespace ffcnn
