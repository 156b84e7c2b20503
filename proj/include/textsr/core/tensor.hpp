#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "textsr/core/errors.hpp"

namespace textsr {

// Dense row-major tensor with value semantics. Feature maps use CHW layout,
// matrices are {rows, cols}, scalars are {1}.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
        size_ = static_cast<size_t>(numel_of(shape_));
        data_ = std::make_unique<T[]>(size_); // value-initialized: zeros
    }

    Tensor(std::vector<int> shape, T fill) : Tensor(uninit(std::move(shape))) {
        for (size_t i = 0; i < size_; ++i) data_[i] = fill;
    }

    Tensor(const Tensor& o) : shape_(o.shape_), size_(o.size_) {
        if (size_) {
            data_ = std::unique_ptr<T[]>(new T[size_]);
            std::memcpy(data_.get(), o.data_.get(), size_ * sizeof(T));
        }
    }
    Tensor& operator=(const Tensor& o) {
        if (this != &o) *this = Tensor(o);
        return *this;
    }
    Tensor(Tensor&&) noexcept = default;
    Tensor& operator=(Tensor&&) noexcept = default;

    // allocation without the zero fill, for outputs written in full
    static Tensor uninit(std::vector<int> shape) {
        Tensor t;
        t.shape_ = std::move(shape);
        t.size_ = static_cast<size_t>(numel_of(t.shape_));
        t.data_ = std::unique_ptr<T[]>(new T[t.size_]);
        return t;
    }

    static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
    static Tensor full(std::vector<int> shape, T v) { return Tensor(std::move(shape), v); }
    static Tensor scalar(T v) { return Tensor({1}, v); }

    const std::vector<int>& shape() const { return shape_; }
    int ndim() const { return static_cast<int>(shape_.size()); }
    int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
    int64_t numel() const { return static_cast<int64_t>(size_); }
    bool empty() const { return size_ == 0; }

    T* data() { return data_.get(); }
    const T* data() const { return data_.get(); }

    T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
    const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

    // 2D access {rows, cols}
    T& at(int r, int c) { return data_[static_cast<size_t>(r) * dim(1) + c]; }
    const T& at(int r, int c) const { return data_[static_cast<size_t>(r) * dim(1) + c]; }

    // 3D access {C, H, W}
    T& at(int c, int y, int x) {
        return data_[(static_cast<size_t>(c) * dim(1) + y) * dim(2) + x];
    }
    const T& at(int c, int y, int x) const {
        return data_[(static_cast<size_t>(c) * dim(1) + y) * dim(2) + x];
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    Tensor reshaped(std::vector<int> shape) const {
        if (numel_of(shape) != numel())
            throw ShapeError("reshape: element count mismatch " + shape_str() + " -> " +
                             shape_str_of(shape));
        Tensor out = *this;
        out.shape_ = std::move(shape);
        return out;
    }

    bool all_finite() const {
        for (size_t i = 0; i < size_; ++i)
            if (!std::isfinite(static_cast<double>(data_[i]))) return false;
        return true;
    }

    std::string shape_str() const { return shape_str_of(shape_); }

    static int64_t numel_of(const std::vector<int>& shape) {
        int64_t n = 1;
        for (int d : shape) {
            if (d < 0) throw ShapeError("negative dimension");
            n *= d;
        }
        return n;
    }

    static std::string shape_str_of(const std::vector<int>& shape) {
        std::ostringstream os;
        os << "(";
        for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
        os << ")";
        return os.str();
    }

private:
    std::vector<int> shape_;
    size_t size_ = 0;
    std::unique_ptr<T[]> data_;
};

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* who) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(who) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

} // namespace textsr
