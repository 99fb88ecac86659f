#include "ffcnn/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(sizeof(float) == 4, "32-bit IEEE float required");

namespace ffcnn {

namespace {
const char kMagic[5] = {'F', 'F', 'C', 'N', 'N'};
}

void ContainerWriter::bytes(const void* p, size_t n) {
    const uint8_t* b = static_cast<const uint8_t*>(p);
    body_.insert(body_.end(), b, b + n);
}

void ContainerWriter::u32(uint32_t v) {
    uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8), static_cast<uint8_t>(v >> 16),
                    static_cast<uint8_t>(v >> 24)};
    bytes(b, 4);
}

void ContainerWriter::u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
}

void ContainerWriter::f32(float v) {
    uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
}

void ContainerWriter::f32_array(const float* p, int64_t n) {
    // little-endian host writes the raw array
    bytes(p, static_cast<size_t>(n) * 4);
}

void ContainerWriter::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    bytes(s.data(), s.size());
}

void ContainerWriter::tensor(const Tensor& t) {
    u32(static_cast<uint32_t>(t.rank()));
    for (int i = 0; i < t.rank(); ++i) u32(static_cast<uint32_t>(t.dim(i)));
    f32_array(t.data(), t.size());
}

void ContainerWriter::save(const std::string& path, PayloadType type, const std::string& config_echo) const {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("checkpoint: cannot open " + tmp + " for writing");
        ContainerWriter header;
        header.bytes(kMagic, 5);
        header.u32(kContainerVersion);
        header.u32(static_cast<uint32_t>(type));
        header.str(config_echo);
        out.write(reinterpret_cast<const char*>(header.body_.data()), static_cast<std::streamsize>(header.body_.size()));
        out.write(reinterpret_cast<const char*>(body_.data()), static_cast<std::streamsize>(body_.size()));
        if (!out) throw std::runtime_error("checkpoint: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw std::runtime_error("checkpoint: cannot rename " + tmp + " to " + path);
    }
}

ContainerReader::ContainerReader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    if (buf_.size() < 5 || std::memcmp(buf_.data(), kMagic, 5) != 0) {
        throw std::runtime_error("checkpoint " + path + ": bad magic, expected \"FFCNN\"");
    }
    pos_ = 5;
    const uint32_t version = u32();
    if (version != kContainerVersion) {
        throw std::runtime_error("checkpoint " + path + ": unsupported version " + std::to_string(version));
    }
    const uint32_t t = u32();
    if (t > 2) throw std::runtime_error("checkpoint " + path + ": unknown payload type " + std::to_string(t));
    type_ = static_cast<PayloadType>(t);
    config_echo_ = str();
}

void ContainerReader::need(size_t n) const {
    if (pos_ + n > buf_.size()) {
        throw std::runtime_error("checkpoint " + path_ + ": truncated, needed " + std::to_string(n) +
                                 " bytes at offset " + std::to_string(pos_) + ", file has " +
                                 std::to_string(buf_.size()));
    }
}

uint32_t ContainerReader::u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(buf_[pos_]) | static_cast<uint32_t>(buf_[pos_ + 1]) << 8 |
                 static_cast<uint32_t>(buf_[pos_ + 2]) << 16 | static_cast<uint32_t>(buf_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
}

uint64_t ContainerReader::u64() {
    const uint64_t lo = u32();
    const uint64_t hi = u32();
    return lo | hi << 32;
}

float ContainerReader::f32() {
    const uint32_t u = u32();
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

void ContainerReader::f32_array(float* p, int64_t n) {
    need(static_cast<size_t>(n) * 4);
    std::memcpy(p, buf_.data() + pos_, static_cast<size_t>(n) * 4);
    pos_ += static_cast<size_t>(n) * 4;
}

std::string ContainerReader::str() {
    const uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

Tensor ContainerReader::tensor() {
    const uint32_t rank = u32();
    if (rank < 1 || rank > 4) {
        throw std::runtime_error("checkpoint " + path_ + ": bad tensor rank " + std::to_string(rank));
    }
    std::vector<int> shape(rank);
    for (uint32_t i = 0; i < rank; ++i) shape[i] = static_cast<int>(u32());
    Tensor t(shape);
    f32_array(t.data(), t.size());
    return t;
}

}  // namespace ffcnn
