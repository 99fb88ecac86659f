#include "ffcnn/image.hpp"

#include <fstream>
#include <stdexcept>

namespace ffcnn {

void Image::write_ppm(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write image " + path);
    out << "P6\n" << width_ << " " << height_ << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels_.data()), static_cast<std::streamsize>(pixels_.size()));
    if (!out) throw std::runtime_error("write failed for image " + path);
}

Image Image::read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
        throw std::runtime_error(path + ": not a P6/255 PPM image");
    }
    in.get();  // single whitespace after the header
    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels_.data()), static_cast<std::streamsize>(img.pixels_.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels_.size())) {
        throw std::runtime_error(path + ": truncated PPM payload");
    }
    return img;
}

}  // namespace ffcnn
