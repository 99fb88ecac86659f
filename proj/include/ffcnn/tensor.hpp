#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ffcnn {

// Dense rank-1..4 float32 array, row-major, value semantics.
class Tensor {
   public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape);
    Tensor(std::vector<int> shape, std::vector<float> data);

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, float value);

    const std::vector<int>& shape() const { return shape_; }
    int rank() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(data_.size()); }
    bool empty() const { return data_.empty(); }

    float* data() { return data_.data(); }
    const float* data() const { return data_.data(); }
    std::vector<float>& vec() { return data_; }
    const std::vector<float>& vec() const { return data_; }

    float& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    float operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // multi-index access, row-major
    float& at(int a) { return data_[static_cast<size_t>(a)]; }
    float at(int a) const { return data_[static_cast<size_t>(a)]; }
    float& at(int a, int b) { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    float at(int a, int b) const { return data_[static_cast<size_t>(a) * shape_[1] + b]; }
    float& at(int a, int b, int c) {
        return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
    }
    float at(int a, int b, int c) const {
        return data_[(static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c];
    }
    float& at(int a, int b, int c, int d) {
        return data_[((static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }
    float at(int a, int b, int c, int d) const {
        return data_[((static_cast<size_t>(a) * shape_[1] + b) * shape_[2] + c) * shape_[3] + d];
    }

    void fill(float value);
    bool all_finite() const;
    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    // "[2,3,4]" for diagnostics
    std::string shape_str() const;
    static std::string shape_str(const std::vector<int>& shape);

   private:
    std::vector<int> shape_;
    std::vector<float> data_;
};

int64_t shape_product(const std::vector<int>& shape);

}  // namespace ffcnn
