#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ffcnn {

// Minimal RGB raster with binary PPM (P6) I/O. Lossless and dependency-free,
// which keeps rendered maps machine-checkable.
class Image {
   public:
    Image(int width, int height) : width_(width), height_(height), pixels_(static_cast<size_t>(width) * height * 3) {}

    int width() const { return width_; }
    int height() const { return height_; }

    void set(int x, int y, uint8_t r, uint8_t g, uint8_t b) {
        size_t i = (static_cast<size_t>(y) * width_ + x) * 3;
        pixels_[i] = r;
        pixels_[i + 1] = g;
        pixels_[i + 2] = b;
    }

    uint8_t red(int x, int y) const { return pixels_[(static_cast<size_t>(y) * width_ + x) * 3]; }
    uint8_t green(int x, int y) const { return pixels_[(static_cast<size_t>(y) * width_ + x) * 3 + 1]; }
    uint8_t blue(int x, int y) const { return pixels_[(static_cast<size_t>(y) * width_ + x) * 3 + 2]; }

    void write_ppm(const std::string& path) const;
    static Image read_ppm(const std::string& path);

   private:
    int width_;
    int height_;
    std::vector<uint8_t> pixels_;
};

}  // namespace ffcnn
