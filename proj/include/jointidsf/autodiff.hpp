#pragma once

// Minimal reverse-mode automatic differentiation over dense 64-bit tensors.
// A Tensor is a shared handle to a node in a dynamically recorded graph;
// calling backward() on a scalar result accumulates gradients into every
// requires_grad ancestor. The graph is rebuilt on every forward pass.

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace jointidsf {

using Shape = std::vector<std::size_t>;

class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

class IndexError : public std::runtime_error {
public:
    explicit IndexError(const std::string& msg) : std::runtime_error(msg) {}
};

class MaskError : public std::runtime_error {
public:
    explicit MaskError(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractError : public std::runtime_error {
public:
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

std::string shape_to_string(const Shape& s);
std::size_t shape_numel(const Shape& s);

namespace detail {

struct TensorNode {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void()> backprop;  // pulls from this->grad into parents

    std::vector<double>& grad_buffer() {
        if (grad.empty()) grad.assign(values.size(), 0.0);
        return grad;
    }
};

}  // namespace detail

class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t size() const { return node_->values.size(); }
    bool is_scalar() const { return node_->shape.empty(); }

    const std::vector<double>& values() const { return node_->values; }
    std::vector<double>& values_mut() { return node_->values; }
    double item() const;

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool on) { node_->requires_grad = on; }

    bool has_grad() const { return !node_->grad.empty(); }
    const std::vector<double>& grad() const;
    void zero_grad() { node_->grad.clear(); }

    // Value-only copy: drops graph history and gradient.
    Tensor detached_copy() const;

    detail::TensorNode* node() const { return node_.get(); }
    std::shared_ptr<detail::TensorNode> node_ptr() const { return node_; }

    friend void backward(const Tensor& loss);
    friend Tensor make_op_result(Shape shape, std::vector<double> values,
                                 std::vector<Tensor> parents,
                                 std::function<void(detail::TensorNode&)> backprop);

private:
    std::shared_ptr<detail::TensorNode> node_;
};

// Thread-local switch: when disabled, ops compute values but record no graph.
bool autograd_enabled();
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

// Core op helper: builds the result node and wires the backward closure.
Tensor make_op_result(Shape shape, std::vector<double> values,
                      std::vector<Tensor> parents,
                      std::function<void(detail::TensorNode&)> backprop);

// ---- elementwise / structural ops ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sum(const Tensor& a);
Tensor reshape(const Tensor& a, Shape new_shape);
Tensor concat(const Tensor& a, const Tensor& b);        // 1-D vectors
Tensor concat_cols(const Tensor& a, const Tensor& b);   // 2-D, along last axis
Tensor row(const Tensor& m, std::size_t i);             // 2-D -> 1-D
Tensor rows(const Tensor& m, std::size_t from, std::size_t to);  // [from, to)
Tensor cols(const Tensor& m, std::size_t from, std::size_t to);  // [from, to)
Tensor repeat_row(const Tensor& v, std::size_t n);      // 1-D -> n x d
Tensor scale_rows(const Tensor& m, const Tensor& v);    // row i *= v[i]
Tensor add_rows(const Tensor& m, const Tensor& v);      // row i += v

// ---- linear algebra ----
// (m x k)(k x n) -> (m x n); (m x k)(k) -> (m); (k)(k x n) -> (n)
Tensor matmul(const Tensor& a, const Tensor& b);
// (m x k)(n x k) -> (m x n), i.e. a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// ---- nonlinearities ----
// 1-D softmax with optional mask; masked positions output exactly 0.
Tensor softmax(const Tensor& x, const std::vector<bool>* mask = nullptr);
// Row-wise softmax over a 2-D tensor; col_mask (over columns) shared by rows.
Tensor softmax_rows(const Tensor& m, const std::vector<bool>* col_mask = nullptr);
Tensor gelu(const Tensor& x);
Tensor layer_norm_rows(const Tensor& m, const Tensor& gain, const Tensor& bias,
                       double eps = 1e-5);
Tensor embedding_rows(const Tensor& table, const std::vector<std::size_t>& ids);
Tensor dropout(const Tensor& x, double rate, std::mt19937_64& rng, bool enabled);

// ---- losses ----
// -log(probs[gold]) with the probability clamped at 1e-12 before the log.
Tensor cross_entropy(const Tensor& probs, std::size_t gold);

// Populates grads of all requires_grad ancestors of a scalar loss.
// Repeated calls without zeroing accumulate.
void backward(const Tensor& loss);

// Central-difference gradient checker. `f` must be a deterministic function
// of the parameter values; returns max over all parameter entries of
// |analytic - numeric| / max(1, |numeric|).
double grad_check(const std::function<Tensor(const std::vector<Tensor>&)>& f,
                  std::vector<Tensor>& params, double eps = 1e-5);

}  // namespace jointidsf
