#ifndef FACET_TENSOR_HPP
#define FACET_TENSOR_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "facet/errors.hpp"

namespace facet {

// Shape-tagged flat array of doubles, row-major. The single numeric carrier
// used across the library; rank is 1 or 2 in practice.
class Tensor {
public:
    Tensor() = default;

    static Tensor vec(std::size_t n, double fill = 0.0);
    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t rows() const;
    std::size_t cols() const;

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    // 2-D access; no bounds check in release builds, callers validate shapes.
    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    // Pointer to row r of a rank-2 tensor.
    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    void fill(double v);
    bool all_finite() const;
    // Throws numeric_error naming `what` if any entry is NaN/Inf.
    void require_finite(const std::string& what) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    std::vector<double>& raw() { return data_; }
    const std::vector<double>& raw() const { return data_; }

private:
    Tensor(std::vector<std::size_t> shape, std::size_t total);

    std::vector<std::size_t> shape_;
    std::size_t cols_ = 0; // cached for rank-2 access
    std::vector<double> data_;
};

} // namespace facet

#endif
