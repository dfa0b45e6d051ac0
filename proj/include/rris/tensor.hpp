#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rris/error.hpp"
#include "rris/random.hpp"

namespace rris {

/// Dense row-major f64 array.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
        : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != element_count(shape_))
            throw Error(ErrorCode::shape_mismatch, "data length " + std::to_string(data_.size()) +
                                                       " does not match shape " + shape_string());
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) { return Tensor({rows, cols}, fill); }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

    // Matrix view; valid for rank-2 tensors.
    std::size_t rows() const { return shape_.at(0); }
    std::size_t cols() const { return shape_.at(1); }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    std::string shape_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < shape_.size(); ++i) s += (i ? "x" : "") + std::to_string(shape_[i]);
        return s + "]";
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
    }

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline Tensor random_normal(std::vector<std::size_t> shape, Rng& rng, double scale) {
    Tensor t(std::move(shape));
    for (auto& v : t.data()) v = scale * rng.normal();
    return t;
}

/// Max-subtracted softmax along `axis` of a tensor of any rank.
inline Tensor softmax(const Tensor& logits, std::size_t axis) {
    if (axis >= logits.rank()) throw Error(ErrorCode::invalid_argument, "softmax axis out of range");
    Tensor out = logits;
    const std::size_t n = logits.dim(axis);
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < logits.rank(); ++a) inner *= logits.dim(a);
    const std::size_t outer = n == 0 ? 0 : logits.size() / (n * inner);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * n * inner + i;
            double peak = -INFINITY;
            for (std::size_t k = 0; k < n; ++k) peak = std::max(peak, logits[base + k * inner]);
            double total = 0.0;
            for (std::size_t k = 0; k < n; ++k) total += (out[base + k * inner] = std::exp(logits[base + k * inner] - peak));
            for (std::size_t k = 0; k < n; ++k) out[base + k * inner] /= total;
        }
    }
    return out;
}

}  // namespace rris
