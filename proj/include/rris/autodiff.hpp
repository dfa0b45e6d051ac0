#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

#include "rris/error.hpp"
#include "rris/tensor.hpp"

// Minimal define-by-run reverse-mode differentiation over rank-2 tensors.
// Every op computes its value eagerly and records a closure that maps the
// output gradient onto its inputs.

namespace rris::ad {

struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const { return id != std::numeric_limits<std::size_t>::max(); }
};

class Graph {
public:
    using Backward = std::function<void(Graph&, const Tensor& out_grad)>;

    Var constant(Tensor value) { return push(std::move(value), false, nullptr); }
    Var variable(Tensor value) { return push(std::move(value), true, nullptr); }

    const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
    bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

    /// Gradient accumulated by the last backward(); zeros if none reached.
    Tensor grad(Var v) const {
        const auto& n = nodes_.at(v.id);
        return n.has_grad ? n.grad : Tensor(n.value.shape());
    }

    Var record(Tensor value, std::initializer_list<Var> inputs, Backward fn) {
        bool needs = false;
        for (Var in : inputs) needs = needs || nodes_.at(in.id).requires_grad;
        return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
    }

    Var record(Tensor value, std::span<const Var> inputs, Backward fn) {
        bool needs = false;
        for (Var in : inputs) needs = needs || nodes_.at(in.id).requires_grad;
        return push(std::move(value), needs, needs ? std::move(fn) : nullptr);
    }

    /// Accumulation target for an input's gradient, or nullptr when the
    /// input does not need one.
    Tensor* grad_sink(Var v) {
        auto& n = nodes_.at(v.id);
        if (!n.requires_grad) return nullptr;
        if (!n.has_grad) {
            n.grad = Tensor(n.value.shape());
            n.has_grad = true;
        }
        return &n.grad;
    }

    void backward(Var output) {
        if (value(output).size() != 1) throw Error(ErrorCode::shape_mismatch, "backward() needs a scalar output");
        for (auto& n : nodes_) n.has_grad = false;
        if (!nodes_[output.id].requires_grad) return;
        *grad_sink(output) = Tensor(value(output).shape(), 1.0);
        for (std::size_t i = output.id + 1; i-- > 0;) {
            auto& n = nodes_[i];
            if (n.has_grad && n.backward) n.backward(*this, n.grad);
        }
    }

    std::size_t size() const noexcept { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad = false;
        bool has_grad = false;
        Backward backward;
    };

    Var push(Tensor value, bool requires_grad, Backward fn) {
        nodes_.push_back({std::move(value), Tensor{}, requires_grad, false, std::move(fn)});
        return Var{nodes_.size() - 1};
    }

    std::vector<Node> nodes_;
};

namespace detail {
inline void require_matrix(const Tensor& t, const char* op) {
    if (t.rank() != 2) throw Error(ErrorCode::shape_mismatch, std::string(op) + " expects a matrix, got " + t.shape_string());
}
inline void require_same(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw Error(ErrorCode::shape_mismatch, std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
}
// out += a * b (or with transposes), all row-major matrices.
inline void gemm_acc(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& out) {
    const std::size_t m = ta ? a.cols() : a.rows();
    const std::size_t k = ta ? a.rows() : a.cols();
    const std::size_t n = tb ? b.rows() : b.cols();
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = ta ? a(p, i) : a(i, p);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out(i, j) += av * (tb ? b(j, p) : b(p, j));
        }
}
}  // namespace detail

inline Var matmul(Graph& g, Var a, Var b) {
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    detail::require_matrix(av, "matmul");
    detail::require_matrix(bv, "matmul");
    if (av.cols() != bv.rows())
        throw Error(ErrorCode::shape_mismatch, "matmul: " + av.shape_string() + " x " + bv.shape_string());
    Tensor out = Tensor::matrix(av.rows(), bv.cols());
    detail::gemm_acc(av, false, bv, false, out);
    return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a)) detail::gemm_acc(dy, false, gr.value(b), true, *da);
        if (Tensor* db = gr.grad_sink(b)) detail::gemm_acc(gr.value(a), true, dy, false, *db);
    });
}

inline Var transpose(Graph& g, Var a) {
    const Tensor& av = g.value(a);
    detail::require_matrix(av, "transpose");
    Tensor out = Tensor::matrix(av.cols(), av.rows());
    for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) out(j, i) = av(i, j);
    return g.record(std::move(out), {a}, [a](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < da->rows(); ++i)
                for (std::size_t j = 0; j < da->cols(); ++j) (*da)(i, j) += dy(j, i);
    });
}

inline Var add(Graph& g, Var a, Var b) {
    detail::require_same(g.value(a), g.value(b), "add");
    Tensor out = g.value(a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += g.value(b)[i];
    return g.record(std::move(out), {a, b}, [a, b](Graph& gr, const Tensor& dy) {
        for (Var v : {a, b})
            if (Tensor* d = gr.grad_sink(v))
                for (std::size_t i = 0; i < dy.size(); ++i) (*d)[i] += dy[i];
    });
}

/// a[m x n] + bias[1 x n] broadcast over rows.
inline Var add_bias(Graph& g, Var a, Var bias) {
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(bias);
    detail::require_matrix(av, "add_bias");
    if (bv.rank() != 2 || bv.rows() != 1 || bv.cols() != av.cols())
        throw Error(ErrorCode::shape_mismatch, "add_bias: " + av.shape_string() + " + " + bv.shape_string());
    Tensor out = av;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bv(0, j);
    return g.record(std::move(out), {a, bias}, [a, bias](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i];
        if (Tensor* db = gr.grad_sink(bias))
            for (std::size_t i = 0; i < dy.rows(); ++i)
                for (std::size_t j = 0; j < dy.cols(); ++j) (*db)(0, j) += dy(i, j);
    });
}

inline Var scale(Graph& g, Var a, double s) {
    Tensor out = g.value(a);
    for (auto& v : out.data()) v *= s;
    return g.record(std::move(out), {a}, [a, s](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += s * dy[i];
    });
}

inline Var softmax_rows(Graph& g, Var a) {
    detail::require_matrix(g.value(a), "softmax_rows");
    Tensor y = softmax(g.value(a), 1);
    Tensor saved = y;
    return g.record(std::move(y), {a}, [a, saved](Graph& gr, const Tensor& dy) {
        Tensor* da = gr.grad_sink(a);
        if (!da) return;
        for (std::size_t i = 0; i < saved.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < saved.cols(); ++j) dot += dy(i, j) * saved(i, j);
            for (std::size_t j = 0; j < saved.cols(); ++j) (*da)(i, j) += saved(i, j) * (dy(i, j) - dot);
        }
    });
}

/// out.flat[i] = a.flat[index[i]]; covers reshapes, slices, patch
/// rearrangement and nearest-neighbour upsampling.
inline Var gather(Graph& g, Var a, std::vector<std::size_t> shape, std::vector<std::size_t> index) {
    const Tensor& av = g.value(a);
    Tensor out(std::move(shape));
    if (out.size() != index.size()) throw Error(ErrorCode::shape_mismatch, "gather: index length vs output shape");
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= av.size()) throw Error(ErrorCode::shape_mismatch, "gather: index out of range");
        out[i] = av[index[i]];
    }
    return g.record(std::move(out), {a}, [a, idx = std::move(index)](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < idx.size(); ++i) (*da)[idx[i]] += dy[i];
    });
}

inline Var slice_cols(Graph& g, Var a, std::size_t begin, std::size_t count) {
    const Tensor& av = g.value(a);
    detail::require_matrix(av, "slice_cols");
    if (begin + count > av.cols()) throw Error(ErrorCode::shape_mismatch, "slice_cols out of range");
    std::vector<std::size_t> idx;
    idx.reserve(av.rows() * count);
    for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < count; ++c) idx.push_back(r * av.cols() + begin + c);
    return gather(g, a, {av.rows(), count}, std::move(idx));
}

inline Var concat_rows(Graph& g, Var a, Var b) {
    const Tensor& av = g.value(a);
    const Tensor& bv = g.value(b);
    detail::require_matrix(av, "concat_rows");
    detail::require_matrix(bv, "concat_rows");
    if (av.cols() != bv.cols())
        throw Error(ErrorCode::shape_mismatch, "concat_rows: " + av.shape_string() + " vs " + bv.shape_string());
    Tensor out = Tensor::matrix(av.rows() + bv.rows(), av.cols());
    std::copy(av.data().begin(), av.data().end(), out.data().begin());
    std::copy(bv.data().begin(), bv.data().end(), out.data().begin() + static_cast<std::ptrdiff_t>(av.size()));
    const std::size_t split = av.size();
    return g.record(std::move(out), {a, b}, [a, b, split](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < split; ++i) (*da)[i] += dy[i];
        if (Tensor* db = gr.grad_sink(b))
            for (std::size_t i = split; i < dy.size(); ++i) (*db)[i - split] += dy[i];
    });
}

inline Var concat_cols(Graph& g, const std::vector<Var>& parts) {
    if (parts.empty()) throw Error(ErrorCode::shape_mismatch, "concat_cols of nothing");
    const std::size_t rows = g.value(parts[0]).rows();
    std::size_t cols = 0;
    for (Var p : parts) {
        detail::require_matrix(g.value(p), "concat_cols");
        if (g.value(p).rows() != rows) throw Error(ErrorCode::shape_mismatch, "concat_cols: row counts differ");
        cols += g.value(p).cols();
    }
    Tensor out = Tensor::matrix(rows, cols);
    std::size_t offset = 0;
    for (Var p : parts) {
        const Tensor& pv = g.value(p);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < pv.cols(); ++c) out(r, offset + c) = pv(r, c);
        offset += pv.cols();
    }
    return g.record(std::move(out), std::span<const Var>(parts), [parts](Graph& gr, const Tensor& dy) {
        std::size_t off = 0;
        for (Var p : parts) {
            const std::size_t width = gr.value(p).cols();
            if (Tensor* dp = gr.grad_sink(p))
                for (std::size_t r = 0; r < dy.rows(); ++r)
                    for (std::size_t c = 0; c < width; ++c) (*dp)(r, c) += dy(r, off + c);
            off += width;
        }
    });
}

/// Column means: [m x n] -> [1 x n].
inline Var mean_rows(Graph& g, Var a) {
    const Tensor& av = g.value(a);
    detail::require_matrix(av, "mean_rows");
    if (av.rows() == 0) throw Error(ErrorCode::shape_mismatch, "mean_rows of an empty matrix");
    Tensor out = Tensor::matrix(1, av.cols());
    for (std::size_t i = 0; i < av.rows(); ++i)
        for (std::size_t j = 0; j < av.cols(); ++j) out(0, j) += av(i, j);
    const double inv = 1.0 / static_cast<double>(av.rows());
    for (auto& v : out.data()) v *= inv;
    return g.record(std::move(out), {a}, [a, inv](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < da->rows(); ++i)
                for (std::size_t j = 0; j < da->cols(); ++j) (*da)(i, j) += inv * dy(0, j);
    });
}

/// Per-column standardization over rows: (x - mean) / sqrt(var + eps), with
/// the population variance.
inline Var standardize_cols(Graph& g, Var a, double eps) {
    const Tensor& av = g.value(a);
    detail::require_matrix(av, "standardize_cols");
    const std::size_t m = av.rows();
    const std::size_t n = av.cols();
    Tensor y = Tensor::matrix(m, n);
    std::vector<double> inv_std(n);
    for (std::size_t j = 0; j < n; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < m; ++i) mean += av(i, j);
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = 0; i < m; ++i) var += (av(i, j) - mean) * (av(i, j) - mean);
        var /= static_cast<double>(m);
        inv_std[j] = 1.0 / std::sqrt(var + eps);
        for (std::size_t i = 0; i < m; ++i) y(i, j) = (av(i, j) - mean) * inv_std[j];
    }
    Tensor saved = y;
    return g.record(std::move(y), {a}, [a, saved, inv_std](Graph& gr, const Tensor& dy) {
        Tensor* da = gr.grad_sink(a);
        if (!da) return;
        const std::size_t rows = saved.rows();
        const double inv_m = 1.0 / static_cast<double>(rows);
        for (std::size_t j = 0; j < saved.cols(); ++j) {
            double mean_dy = 0.0;
            double mean_dy_y = 0.0;
            for (std::size_t i = 0; i < rows; ++i) {
                mean_dy += dy(i, j);
                mean_dy_y += dy(i, j) * saved(i, j);
            }
            mean_dy *= inv_m;
            mean_dy_y *= inv_m;
            for (std::size_t i = 0; i < rows; ++i)
                (*da)(i, j) += inv_std[j] * (dy(i, j) - mean_dy - saved(i, j) * mean_dy_y);
        }
    });
}

inline Var sigmoid(Graph& g, Var a) {
    Tensor y = g.value(a);
    for (auto& v : y.data()) v = 1.0 / (1.0 + std::exp(-v));
    Tensor saved = y;
    return g.record(std::move(y), {a}, [a, saved](Graph& gr, const Tensor& dy) {
        if (Tensor* da = gr.grad_sink(a))
            for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * saved[i] * (1.0 - saved[i]);
    });
}

/// Mean per-row cross-entropy of softmaxed scores against integer labels.
inline Var cross_entropy(Graph& g, Var logits, std::vector<int> labels) {
    const Tensor& lv = g.value(logits);
    detail::require_matrix(lv, "cross_entropy");
    if (labels.size() != lv.rows()) throw Error(ErrorCode::shape_mismatch, "cross_entropy: label count vs rows");
    Tensor probs = softmax(lv, 1);
    double loss = 0.0;
    for (std::size_t i = 0; i < lv.rows(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= lv.cols())
            throw Error(ErrorCode::invalid_argument, "cross_entropy: label out of range");
        double peak = -INFINITY;
        for (std::size_t j = 0; j < lv.cols(); ++j) peak = std::max(peak, lv(i, j));
        double total = 0.0;
        for (std::size_t j = 0; j < lv.cols(); ++j) total += std::exp(lv(i, j) - peak);
        loss -= lv(i, static_cast<std::size_t>(labels[i])) - peak - std::log(total);
    }
    const double inv = 1.0 / static_cast<double>(lv.rows());
    return g.record(Tensor({1, 1}, {loss * inv}), {logits},
                    [logits, probs, labels = std::move(labels), inv](Graph& gr, const Tensor& dy) {
                        Tensor* dl = gr.grad_sink(logits);
                        if (!dl) return;
                        for (std::size_t i = 0; i < probs.rows(); ++i)
                            for (std::size_t j = 0; j < probs.cols(); ++j)
                                (*dl)(i, j) += dy[0] * inv *
                                               (probs(i, j) - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0));
                    });
}

/// Binary cross-entropy of sigmoid(z) against target e, computed from the
/// logit for numerical stability: softplus(z) - e*z.
inline Var bce_with_logit(Graph& g, Var z, double target) {
    const Tensor& zv = g.value(z);
    if (zv.size() != 1) throw Error(ErrorCode::shape_mismatch, "bce_with_logit expects a scalar");
    const double x = zv[0];
    const double softplus = x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
    const double p = 1.0 / (1.0 + std::exp(-x));
    return g.record(Tensor({1, 1}, {softplus - target * x}), {z}, [z, p, target](Graph& gr, const Tensor& dy) {
        if (Tensor* dz = gr.grad_sink(z)) (*dz)[0] += dy[0] * (p - target);
    });
}

inline Var linear(Graph& g, Var x, Var weight, Var bias) { return add_bias(g, matmul(g, x, weight), bias); }

}  // namespace rris::ad
