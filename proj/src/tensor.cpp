#include "aagan/tensor.hpp"

#include <cmath>
#include <numeric>

#include "aagan/errors.hpp"

namespace aagan {

namespace {
std::size_t product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}
} // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(product(shape_), 0.0) {
    for (std::size_t d : shape_)
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str());
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    for (std::size_t d : shape_)
        if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str());
    if (product(shape_) != values_.size())
        throw ShapeError("tensor value count " + std::to_string(values_.size()) +
                         " does not match shape " + shape_str());
}

Tensor Tensor::row(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({1, n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
    return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const { return shape_.size() >= 2 ? shape_[0] : 1; }

std::size_t Tensor::cols() const {
    if (shape_.empty()) return 0;
    return shape_.size() >= 2 ? shape_[1] : shape_[0];
}

bool Tensor::all_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor::fill(double v) {
    for (double& x : values_) x = v;
}

std::string Tensor::shape_str() const { return aagan::shape_str(shape_); }

std::string shape_str(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(where) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}

} // namespace aagan
