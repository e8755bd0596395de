#ifndef AAGAN_TENSOR_HPP
#define AAGAN_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace aagan {

// Dense row-major tensor of 64-bit floats. Rank is dynamic but the library
// only ever builds rank-1 and rank-2 tensors.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> values);

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }
    static Tensor scalar(double v) { return Tensor({1}, {v}); }
    static Tensor row(std::vector<double> values);                      // [1 x n]
    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    std::size_t size() const { return values_.size(); }
    std::size_t rank() const { return shape_.size(); }
    bool empty() const { return values_.empty(); }

    // 2-D accessors; a rank-1 tensor behaves as a single row.
    std::size_t rows() const;
    std::size_t cols() const;
    double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;
    void fill(double v);

    std::string shape_str() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

std::string shape_str(const std::vector<std::size_t>& shape);

// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const Tensor& a, const Tensor& b, const char* where);

} // namespace aagan

#endif
