#include "facet/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace facet {

Tensor::Tensor(std::vector<std::size_t> shape, std::size_t total)
    : shape_(std::move(shape)), data_(total, 0.0) {
    for (std::size_t d : shape_) {
        if (d == 0) throw shape_error("tensor dimension must be positive");
    }
    cols_ = shape_.size() == 2 ? shape_[1] : (shape_.empty() ? 0 : shape_[0]);
}

Tensor Tensor::vec(std::size_t n, double fill) {
    Tensor t({n}, n);
    t.fill(fill);
    return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, double fill) {
    Tensor t({rows, cols}, rows * cols);
    t.fill(fill);
    return t;
}

std::size_t Tensor::rows() const {
    if (rank() != 2) throw shape_error("rows(): tensor is not rank 2");
    return shape_[0];
}

std::size_t Tensor::cols() const {
    if (rank() != 2) throw shape_error("cols(): tensor is not rank 2");
    return shape_[1];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::require_finite(const std::string& what) const {
    if (!all_finite()) throw numeric_error("non-finite values in " + what);
}

} // namespace facet
