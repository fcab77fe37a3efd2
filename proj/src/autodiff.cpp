#include "jointidsf/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace jointidsf {

std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    if (shape_numel(shape) != values.size()) {
        throw ShapeError("tensor init: shape " + shape_to_string(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
    }
    node_ = std::make_shared<detail::TensorNode>();
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    std::vector<double> v(shape_numel(shape), 0.0);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    std::vector<double> v(shape_numel(shape), value);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{}, {value}, requires_grad);
}

double Tensor::item() const {
    if (size() != 1) {
        throw ShapeError("item(): tensor has " + std::to_string(size()) + " elements");
    }
    return node_->values[0];
}

const std::vector<double>& Tensor::grad() const {
    if (node_->grad.empty()) {
        throw ContractError("grad(): gradient not populated; call backward first");
    }
    return node_->grad;
}

Tensor Tensor::detached_copy() const {
    return Tensor(node_->shape, node_->values, node_->requires_grad);
}

namespace {
thread_local bool g_autograd_enabled = true;
}

bool autograd_enabled() { return g_autograd_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_autograd_enabled) { g_autograd_enabled = false; }
NoGradGuard::~NoGradGuard() { g_autograd_enabled = prev_; }

Tensor make_op_result(Shape shape, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(detail::TensorNode&)> backprop) {
    Tensor out(std::move(shape), std::move(values));
    bool need_grad = false;
    if (g_autograd_enabled) {
        for (const Tensor& p : parents) {
            if (p.requires_grad()) {
                need_grad = true;
                break;
            }
        }
    }
    if (need_grad) {
        out.node_->requires_grad = true;
        for (const Tensor& p : parents) out.node_->parents.push_back(p.node_ptr());
        detail::TensorNode* raw = out.node_.get();
        out.node_->backprop = [raw, fn = std::move(backprop)]() { fn(*raw); };
    }
    return out;
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
}

void accumulate(detail::TensorNode* n, const std::vector<double>& g) {
    if (!n->requires_grad) return;
    auto& buf = n->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {a, b}, [an, bn](detail::TensorNode& o) {
        accumulate(an.get(), o.grad);
        accumulate(bn.get(), o.grad);
    });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op_result(a.shape(), std::move(out), {a, b}, [an, bn](detail::TensorNode& o) {
        if (an->requires_grad) {
            auto& g = an->grad_buffer();
            for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * bn->values[i];
        }
        if (bn->requires_grad) {
            auto& g = bn->grad_buffer();
            for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * an->values[i];
        }
    });
}

Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * c;
    auto an = a.node_ptr();
    return make_op_result(a.shape(), std::move(out), {a}, [an, c](detail::TensorNode& o) {
        if (!an->requires_grad) return;
        auto& g = an->grad_buffer();
        for (std::size_t i = 0; i < o.grad.size(); ++i) g[i] += o.grad[i] * c;
    });
}

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    auto an = a.node_ptr();
    return make_op_result(Shape{}, {s}, {a}, [an](detail::TensorNode& o) {
        if (!an->requires_grad) return;
        auto& g = an->grad_buffer();
        for (double& gi : g) gi += o.grad[0];
    });
}

Tensor reshape(const Tensor& a, Shape new_shape) {
    if (shape_numel(new_shape) != a.size()) {
        throw ShapeError("reshape: " + shape_to_string(a.shape()) + " to " +
                         shape_to_string(new_shape));
    }
    auto an = a.node_ptr();
    return make_op_result(std::move(new_shape), a.values(), {a}, [an](detail::TensorNode& o) {
        accumulate(an.get(), o.grad);
    });
}

Tensor concat(const Tensor& a, const Tensor& b) {
    if (a.rank() != 1 || b.rank() != 1) {
        throw ShapeError("concat: expects 1-D inputs, got " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
    }
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.values().begin(), a.values().end());
    out.insert(out.end(), b.values().begin(), b.values().end());
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    std::size_t da = a.size();
    return make_op_result(Shape{a.size() + b.size()}, std::move(out), {a, b},
                          [an, bn, da](detail::TensorNode& o) {
                              if (an->requires_grad) {
                                  auto& g = an->grad_buffer();
                                  for (std::size_t i = 0; i < da; ++i) g[i] += o.grad[i];
                              }
                              if (bn->requires_grad) {
                                  auto& g = bn->grad_buffer();
                                  for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[da + i];
                              }
                          });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rank() == 1 && b.rank() == 1) return concat(a, b);
    if (a.rank() != 2 || b.rank() != 2 || a.dim(0) != b.dim(0)) {
        throw ShapeError("concat_cols: incompatible shapes " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
    }
    std::size_t n = a.dim(0), da = a.dim(1), db = b.dim(1);
    std::vector<double> out(n * (da + db));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < da; ++j) out[i * (da + db) + j] = a.values()[i * da + j];
        for (std::size_t j = 0; j < db; ++j) out[i * (da + db) + da + j] = b.values()[i * db + j];
    }
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op_result(Shape{n, da + db}, std::move(out), {a, b},
                          [an, bn, n, da, db](detail::TensorNode& o) {
                              if (an->requires_grad) {
                                  auto& g = an->grad_buffer();
                                  for (std::size_t i = 0; i < n; ++i)
                                      for (std::size_t j = 0; j < da; ++j)
                                          g[i * da + j] += o.grad[i * (da + db) + j];
                              }
                              if (bn->requires_grad) {
                                  auto& g = bn->grad_buffer();
                                  for (std::size_t i = 0; i < n; ++i)
                                      for (std::size_t j = 0; j < db; ++j)
                                          g[i * db + j] += o.grad[i * (da + db) + da + j];
                              }
                          });
}

Tensor row(const Tensor& m, std::size_t i) {
    if (m.rank() != 2) throw ShapeError("row: expects 2-D, got " + shape_to_string(m.shape()));
    if (i >= m.dim(0)) throw IndexError("row: index " + std::to_string(i) + " out of range");
    std::size_t d = m.dim(1);
    std::vector<double> out(m.values().begin() + static_cast<std::ptrdiff_t>(i * d),
                            m.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    auto mn = m.node_ptr();
    return make_op_result(Shape{d}, std::move(out), {m}, [mn, i, d](detail::TensorNode& o) {
        if (!mn->requires_grad) return;
        auto& g = mn->grad_buffer();
        for (std::size_t j = 0; j < d; ++j) g[i * d + j] += o.grad[j];
    });
}

Tensor rows(const Tensor& m, std::size_t from, std::size_t to) {
    if (m.rank() != 2) throw ShapeError("rows: expects 2-D, got " + shape_to_string(m.shape()));
    if (from > to || to > m.dim(0)) throw IndexError("rows: bad range");
    std::size_t d = m.dim(1), n = to - from;
    std::vector<double> out(m.values().begin() + static_cast<std::ptrdiff_t>(from * d),
                            m.values().begin() + static_cast<std::ptrdiff_t>(to * d));
    auto mn = m.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {m}, [mn, from, n, d](detail::TensorNode& o) {
        if (!mn->requires_grad) return;
        auto& g = mn->grad_buffer();
        for (std::size_t i = 0; i < n * d; ++i) g[from * d + i] += o.grad[i];
    });
}

Tensor cols(const Tensor& m, std::size_t from, std::size_t to) {
    if (m.rank() != 2) throw ShapeError("cols: expects 2-D, got " + shape_to_string(m.shape()));
    if (from > to || to > m.dim(1)) throw IndexError("cols: bad range");
    std::size_t n = m.dim(0), d = m.dim(1), w = to - from;
    std::vector<double> out(n * w);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) out[i * w + j] = m.values()[i * d + from + j];
    auto mn = m.node_ptr();
    return make_op_result(Shape{n, w}, std::move(out), {m},
                          [mn, from, n, d, w](detail::TensorNode& o) {
                              if (!mn->requires_grad) return;
                              auto& g = mn->grad_buffer();
                              for (std::size_t i = 0; i < n; ++i)
                                  for (std::size_t j = 0; j < w; ++j)
                                      g[i * d + from + j] += o.grad[i * w + j];
                          });
}

Tensor repeat_row(const Tensor& v, std::size_t n) {
    if (v.rank() != 1) throw ShapeError("repeat_row: expects 1-D");
    std::size_t d = v.size();
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = v.values()[j];
    auto vn = v.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {v}, [vn, n, d](detail::TensorNode& o) {
        if (!vn->requires_grad) return;
        auto& g = vn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) g[j] += o.grad[i * d + j];
    });
}

Tensor scale_rows(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.dim(0) != v.size()) {
        throw ShapeError("scale_rows: " + shape_to_string(m.shape()) + " vs " +
                         shape_to_string(v.shape()));
    }
    std::size_t n = m.dim(0), d = m.dim(1);
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = m.values()[i * d + j] * v.values()[i];
    auto mn = m.node_ptr();
    auto vn = v.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {m, v}, [mn, vn, n, d](detail::TensorNode& o) {
        if (mn->requires_grad) {
            auto& g = mn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) g[i * d + j] += o.grad[i * d + j] * vn->values[i];
        }
        if (vn->requires_grad) {
            auto& g = vn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < d; ++j) s += o.grad[i * d + j] * mn->values[i * d + j];
                g[i] += s;
            }
        }
    });
}

Tensor add_rows(const Tensor& m, const Tensor& v) {
    if (m.rank() != 2 || v.rank() != 1 || m.dim(1) != v.size()) {
        throw ShapeError("add_rows: " + shape_to_string(m.shape()) + " vs " +
                         shape_to_string(v.shape()));
    }
    std::size_t n = m.dim(0), d = m.dim(1);
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = m.values()[i * d + j] + v.values()[j];
    auto mn = m.node_ptr();
    auto vn = v.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {m, v}, [mn, vn, n, d](detail::TensorNode& o) {
        accumulate(mn.get(), o.grad);
        if (vn->requires_grad) {
            auto& g = vn->grad_buffer();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) g[j] += o.grad[i * d + j];
        }
    });
}

namespace {

// Normalizes 1-D operands of matmul to matrix form.
struct MatView {
    std::size_t rows, cols;
};

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() == 0 || b.rank() == 0 || a.rank() > 2 || b.rank() > 2) {
        throw ShapeError("matmul: unsupported ranks " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
    }
    MatView av{a.rank() == 2 ? a.dim(0) : 1, a.rank() == 2 ? a.dim(1) : a.dim(0)};
    MatView bv{b.rank() == 2 ? b.dim(0) : b.dim(0), b.rank() == 2 ? b.dim(1) : 1};
    if (av.cols != bv.rows) {
        throw ShapeError("matmul: inner dimension mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
    std::size_t m = av.rows, k = av.cols, n = bv.cols;
    std::vector<double> out(m * n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t l = 0; l < k; ++l) {
            double ail = a.values()[i * k + l];
            if (ail == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out[i * n + j] += ail * b.values()[l * n + j];
        }
    Shape out_shape;
    if (a.rank() == 2 && b.rank() == 2) out_shape = {m, n};
    else if (a.rank() == 2) out_shape = {m};
    else if (b.rank() == 2) out_shape = {n};
    else out_shape = {};  // dot product
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op_result(std::move(out_shape), std::move(out), {a, b},
                          [an, bn, m, k, n](detail::TensorNode& o) {
                              // dA = G B^T, dB = A^T G
                              if (an->requires_grad) {
                                  auto& g = an->grad_buffer();
                                  for (std::size_t i = 0; i < m; ++i)
                                      for (std::size_t l = 0; l < k; ++l) {
                                          double s = 0.0;
                                          for (std::size_t j = 0; j < n; ++j)
                                              s += o.grad[i * n + j] * bn->values[l * n + j];
                                          g[i * k + l] += s;
                                      }
                              }
                              if (bn->requires_grad) {
                                  auto& g = bn->grad_buffer();
                                  for (std::size_t l = 0; l < k; ++l)
                                      for (std::size_t j = 0; j < n; ++j) {
                                          double s = 0.0;
                                          for (std::size_t i = 0; i < m; ++i)
                                              s += an->values[i * k + l] * o.grad[i * n + j];
                                          g[l * n + j] += s;
                                      }
                              }
                          });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(1)) {
        throw ShapeError("matmul_nt: incompatible shapes " + shape_to_string(a.shape()) +
                         " and " + shape_to_string(b.shape()));
    }
    std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(0);
    std::vector<double> out(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < k; ++l) s += a.values()[i * k + l] * b.values()[j * k + l];
            out[i * n + j] = s;
        }
    auto an = a.node_ptr();
    auto bn = b.node_ptr();
    return make_op_result(Shape{m, n}, std::move(out), {a, b},
                          [an, bn, m, k, n](detail::TensorNode& o) {
                              // dA = G B, dB = G^T A
                              if (an->requires_grad) {
                                  auto& g = an->grad_buffer();
                                  for (std::size_t i = 0; i < m; ++i)
                                      for (std::size_t l = 0; l < k; ++l) {
                                          double s = 0.0;
                                          for (std::size_t j = 0; j < n; ++j)
                                              s += o.grad[i * n + j] * bn->values[j * k + l];
                                          g[i * k + l] += s;
                                      }
                              }
                              if (bn->requires_grad) {
                                  auto& g = bn->grad_buffer();
                                  for (std::size_t j = 0; j < n; ++j)
                                      for (std::size_t l = 0; l < k; ++l) {
                                          double s = 0.0;
                                          for (std::size_t i = 0; i < m; ++i)
                                              s += o.grad[i * n + j] * an->values[i * k + l];
                                          g[j * k + l] += s;
                                      }
                              }
                          });
}

namespace {

// Stable exp-normalize of one row; masked positions get exactly 0.
void softmax_row(const double* in, double* out, std::size_t n, const std::vector<bool>* mask) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        if (!mask || (*mask)[i]) mx = std::max(mx, in[i]);
    if (mx == -std::numeric_limits<double>::infinity()) {
        throw MaskError("softmax: all positions masked");
    }
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask || (*mask)[i]) {
            out[i] = std::exp(in[i] - mx);
            z += out[i];
        } else {
            out[i] = 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) out[i] /= z;
}

// dL/dx_j = y_j * (g_j - sum_i g_i y_i), masked positions get 0.
void softmax_row_backward(const double* y, const double* g, double* gx, std::size_t n,
                          const std::vector<bool>* mask) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += g[i] * y[i];
    for (std::size_t i = 0; i < n; ++i) {
        if (!mask || (*mask)[i]) gx[i] += y[i] * (g[i] - dot);
    }
}

}  // namespace

Tensor softmax(const Tensor& x, const std::vector<bool>* mask) {
    if (x.rank() != 1) throw ShapeError("softmax: expects 1-D, got " + shape_to_string(x.shape()));
    if (mask && mask->size() != x.size()) throw MaskError("softmax: mask length mismatch");
    std::size_t n = x.size();
    std::vector<double> out(n);
    softmax_row(x.values().data(), out.data(), n, mask);
    auto xn = x.node_ptr();
    std::vector<bool> mask_copy = mask ? *mask : std::vector<bool>{};
    bool has_mask = mask != nullptr;
    return make_op_result(Shape{n}, std::move(out), {x},
                          [xn, n, mask_copy, has_mask](detail::TensorNode& o) {
                              if (!xn->requires_grad) return;
                              auto& g = xn->grad_buffer();
                              softmax_row_backward(o.values.data(), o.grad.data(), g.data(), n,
                                                   has_mask ? &mask_copy : nullptr);
                          });
}

Tensor softmax_rows(const Tensor& m, const std::vector<bool>* col_mask) {
    if (m.rank() != 2) throw ShapeError("softmax_rows: expects 2-D");
    if (col_mask && col_mask->size() != m.dim(1)) throw MaskError("softmax_rows: mask length mismatch");
    std::size_t n = m.dim(0), d = m.dim(1);
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i)
        softmax_row(m.values().data() + i * d, out.data() + i * d, d, col_mask);
    auto mn = m.node_ptr();
    std::vector<bool> mask_copy = col_mask ? *col_mask : std::vector<bool>{};
    bool has_mask = col_mask != nullptr;
    return make_op_result(Shape{n, d}, std::move(out), {m},
                          [mn, n, d, mask_copy, has_mask](detail::TensorNode& o) {
                              if (!mn->requires_grad) return;
                              auto& g = mn->grad_buffer();
                              for (std::size_t i = 0; i < n; ++i)
                                  softmax_row_backward(o.values.data() + i * d, o.grad.data() + i * d,
                                                       g.data() + i * d, d,
                                                       has_mask ? &mask_copy : nullptr);
                          });
}

Tensor gelu(const Tensor& x) {
    std::size_t n = x.size();
    std::vector<double> out(n);
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    for (std::size_t i = 0; i < n; ++i) {
        double v = x.values()[i];
        out[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
    }
    auto xn = x.node_ptr();
    return make_op_result(x.shape(), std::move(out), {x}, [xn, n](detail::TensorNode& o) {
        if (!xn->requires_grad) return;
        auto& g = xn->grad_buffer();
        constexpr double inv_sqrt2 = 0.7071067811865475244;
        constexpr double inv_sqrt2pi = 0.3989422804014326779;
        for (std::size_t i = 0; i < n; ++i) {
            double v = xn->values[i];
            double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
            double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
            g[i] += o.grad[i] * (cdf + v * pdf);
        }
    });
}

Tensor layer_norm_rows(const Tensor& m, const Tensor& gain, const Tensor& bias, double eps) {
    if (m.rank() != 2) throw ShapeError("layer_norm_rows: expects 2-D");
    std::size_t n = m.dim(0), d = m.dim(1);
    if (gain.size() != d || bias.size() != d) throw ShapeError("layer_norm_rows: gain/bias size");
    std::vector<double> out(n * d);
    std::vector<double> mu(n), inv_sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = m.values().data() + i * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += xi[j];
        mu[i] = s / static_cast<double>(d);
        double var = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            double c = xi[j] - mu[i];
            var += c * c;
        }
        var /= static_cast<double>(d);
        inv_sigma[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < d; ++j)
            out[i * d + j] = (xi[j] - mu[i]) * inv_sigma[i] * gain.values()[j] + bias.values()[j];
    }
    auto mn = m.node_ptr();
    auto gn = gain.node_ptr();
    auto bn = bias.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {m, gain, bias},
                          [mn, gn, bn, n, d, mu, inv_sigma](detail::TensorNode& o) {
                              for (std::size_t i = 0; i < n; ++i) {
                                  const double* xi = mn->values.data() + i * d;
                                  const double* gi = o.grad.data() + i * d;
                                  // xhat_j = (x_j - mu) * inv_sigma
                                  std::vector<double> xhat(d), gxhat(d);
                                  for (std::size_t j = 0; j < d; ++j) {
                                      xhat[j] = (xi[j] - mu[i]) * inv_sigma[i];
                                      gxhat[j] = gi[j] * gn->values[j];
                                  }
                                  if (gn->requires_grad) {
                                      auto& gg = gn->grad_buffer();
                                      for (std::size_t j = 0; j < d; ++j) gg[j] += gi[j] * xhat[j];
                                  }
                                  if (bn->requires_grad) {
                                      auto& gb = bn->grad_buffer();
                                      for (std::size_t j = 0; j < d; ++j) gb[j] += gi[j];
                                  }
                                  if (mn->requires_grad) {
                                      double mean_g = 0.0, mean_gx = 0.0;
                                      for (std::size_t j = 0; j < d; ++j) {
                                          mean_g += gxhat[j];
                                          mean_gx += gxhat[j] * xhat[j];
                                      }
                                      mean_g /= static_cast<double>(d);
                                      mean_gx /= static_cast<double>(d);
                                      auto& gm = mn->grad_buffer();
                                      for (std::size_t j = 0; j < d; ++j)
                                          gm[i * d + j] += inv_sigma[i] *
                                                           (gxhat[j] - mean_g - xhat[j] * mean_gx);
                                  }
                              }
                          });
}

Tensor embedding_rows(const Tensor& table, const std::vector<std::size_t>& ids) {
    if (table.rank() != 2) throw ShapeError("embedding_rows: table must be 2-D");
    std::size_t d = table.dim(1), n = ids.size();
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        if (ids[i] >= table.dim(0))
            throw IndexError("embedding_rows: id " + std::to_string(ids[i]) + " out of range");
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = table.values()[ids[i] * d + j];
    }
    auto tn = table.node_ptr();
    return make_op_result(Shape{n, d}, std::move(out), {table}, [tn, ids, n, d](detail::TensorNode& o) {
        if (!tn->requires_grad) return;
        auto& g = tn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) g[ids[i] * d + j] += o.grad[i * d + j];
    });
}

Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng, bool enabled) {
    if (!enabled || rate == 0.0) return x;
    if (rate < 0.0 || rate >= 1.0) throw ContractError("dropout: rate must be in [0,1)");
    std::size_t n = x.size();
    std::bernoulli_distribution keep(1.0 - rate);
    std::vector<double> mask(n);
    double inv_keep = 1.0 / (1.0 - rate);
    for (std::size_t i = 0; i < n; ++i) mask[i] = keep(rng) ? inv_keep : 0.0;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x.values()[i] * mask[i];
    auto xn = x.node_ptr();
    return make_op_result(x.shape(), std::move(out), {x}, [xn, mask, n](detail::TensorNode& o) {
        if (!xn->requires_grad) return;
        auto& g = xn->grad_buffer();
        for (std::size_t i = 0; i < n; ++i) g[i] += o.grad[i] * mask[i];
    });
}

Tensor cross_entropy(const Tensor& probs, std::size_t gold) {
    if (probs.rank() != 1) throw ShapeError("cross_entropy: expects 1-D distribution");
    if (gold >= probs.size())
        throw IndexError("cross_entropy: gold index " + std::to_string(gold) + " out of range [0," +
                         std::to_string(probs.size()) + ")");
    double p = std::max(probs.values()[gold], 1e-12);
    auto pn = probs.node_ptr();
    return make_op_result(Shape{}, {-std::log(p)}, {probs}, [pn, gold, p](detail::TensorNode& o) {
        if (!pn->requires_grad) return;
        auto& g = pn->grad_buffer();
        g[gold] += o.grad[0] * (-1.0 / p);
    });
}

void backward(const Tensor& loss) {
    if (!loss.defined() || !loss.is_scalar()) {
        throw ContractError("backward: loss must be a scalar tensor");
    }
    // Topological order via iterative DFS over parents.
    std::vector<detail::TensorNode*> order;
    std::unordered_set<detail::TensorNode*> visited;
    struct Frame {
        detail::TensorNode* node;
        std::size_t next_parent;
    };
    std::vector<Frame> stack;
    if (visited.insert(loss.node()).second) stack.push_back({loss.node(), 0});
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            detail::TensorNode* p = f.node->parents[f.next_parent++].get();
            if (visited.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    loss.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::TensorNode* n = *it;
        if (n->backprop && !n->grad.empty()) n->backprop();
    }
}

double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                  std::vector<Tensor>& params, double eps) {
    for (Tensor& p : params) {
        p.set_requires_grad(true);
        p.zero_grad();
    }
    Tensor loss = f(params);
    backward(loss);
    if (!std::isfinite(loss.item())) throw ContractError("grad_check: non-finite loss");

    double max_err = 0.0;
    for (Tensor& p : params) {
        const std::vector<double> analytic =
            p.has_grad() ? p.grad() : std::vector<double>(p.size(), 0.0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            double orig = p.values_mut()[i];
            p.values_mut()[i] = orig + eps;
            double up = f(params).item();
            p.values_mut()[i] = orig - eps;
            double down = f(params).item();
            p.values_mut()[i] = orig;
            double numeric = (up - down) / (2.0 * eps);
            double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace jointidsf
