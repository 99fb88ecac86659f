#include "ffcnn/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ffcnn {

int64_t shape_product(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    if (shape_.empty() || shape_.size() > 4) {
        throw std::invalid_argument("Tensor: rank must be 1..4, got " + shape_str(shape_));
    }
    for (int d : shape_) {
        if (d <= 0) throw std::invalid_argument("Tensor: non-positive extent in " + shape_str(shape_));
    }
    data_.assign(static_cast<size_t>(shape_product(shape_)), 0.0f);
}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_.empty() || shape_.size() > 4) {
        throw std::invalid_argument("Tensor: rank must be 1..4, got " + shape_str(shape_));
    }
    if (static_cast<int64_t>(data_.size()) != shape_product(shape_)) {
        throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_str(shape_));
    }
}

Tensor Tensor::full(std::vector<int> shape, float value) {
    Tensor t(std::move(shape));
    t.fill(value);
    return t;
}

void Tensor::fill(float value) {
    for (auto& x : data_) x = value;
}

bool Tensor::all_finite() const {
    for (float x : data_) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

std::string Tensor::shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ",";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

std::string Tensor::shape_str() const { return shape_str(shape_); }

}  // namespace ffcnn
