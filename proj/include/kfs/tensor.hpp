#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "kfs/errors.hpp"

namespace kfs {

int64_t shape_size(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

namespace detail {

struct Node {
    std::vector<int> shape;
    std::vector<double> values;
    std::vector<double> grad;      // mirrored here by Tape::backward for leaf access
    bool requires_grad = false;    // leaf parameter
    bool on_tape = false;          // produced while recording, or a parameter
    std::string name;              // optional parameter name
};

using NodePtr = std::shared_ptr<Node>;

}  // namespace detail

class Tape;

// Dense tensor of 64-bit floats in row-major order. Value-semantic handle;
// copies share the underlying node. Rank 0 (scalar), 1, and 2 are what the
// ops support.
class Tensor {
public:
    Tensor() = default;
    Tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(std::vector<int> shape);
    static Tensor full(std::vector<int> shape, double value);
    static Tensor scalar(double value);
    static Tensor param(std::vector<int> shape, std::vector<double> values, std::string name = "");

    bool defined() const { return node_ != nullptr; }
    const std::vector<int>& shape() const { return node_->shape; }
    int rank() const { return static_cast<int>(node_->shape.size()); }
    int dim(int i) const { return node_->shape[static_cast<size_t>(i)]; }
    int64_t size() const { return static_cast<int64_t>(node_->values.size()); }

    const std::vector<double>& values() const { return node_->values; }
    // Direct mutation is for leaf tensors between passes (optimizer updates,
    // finite-difference probes); mutating a recorded intermediate invalidates
    // the tape.
    std::vector<double>& mutable_values() { return node_->values; }

    double value() const;                 // scalar tensors only
    double at(int i) const { return node_->values[static_cast<size_t>(i)]; }
    double at(int i, int j) const;

    bool requires_grad() const { return node_->requires_grad; }
    const std::string& name() const { return node_->name; }

    // Gradient mirrored by the most recent Tape::backward with node mirroring
    // enabled; zeros when this tensor was unreachable from the loss.
    std::vector<double> grad() const;

    detail::Node* node() const { return node_.get(); }
    const detail::NodePtr& node_ptr() const { return node_; }

private:
    explicit Tensor(detail::NodePtr n) : node_(std::move(n)) {}
    detail::NodePtr node_;

    friend Tensor make_op_output(std::vector<int>, std::vector<double>, const std::vector<Tensor>&,
                                 std::function<void(const std::vector<double>&, Tape&)>);
};

// Reverse-mode tape. Ops executed while a tape is active (and touching at
// least one gradient-bearing input) append a backward step; backward() then
// replays steps once, in reverse record order. A tape is confined to the
// thread that created it.
class Tape {
public:
    Tape();
    ~Tape();
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    static Tape* active();

    // Seeds d(loss)/d(loss) = 1 and runs every recorded step once in reverse.
    // When write_node_grads is set, accumulated gradients are mirrored into
    // the nodes' grad fields afterwards (single-tape convenience); parallel
    // workers should pass false and read grads via grad().
    void backward(const Tensor& loss, bool write_node_grads = true);

    // Gradient of the loss w.r.t. t; zeros if t was unreachable.
    std::vector<double> grad(const Tensor& t) const;

    size_t recorded_steps() const { return steps_.size(); }

    // --- extension points for op implementations ---
    void record_step(std::function<void(Tape&)> step) { steps_.push_back(std::move(step)); }
    // Accumulation buffer for a node, zero-initialized to its shape.
    std::vector<double>& grad_slot(const detail::NodePtr& n);
    // Gradient buffer if this node received any, else nullptr.
    const std::vector<double>* grad_if(const detail::Node* n) const;

private:
    std::vector<std::function<void(Tape&)>> steps_;
    std::unordered_map<const detail::Node*, std::vector<double>> grads_;
    bool consumed_ = false;
    Tape* prev_ = nullptr;
};

// Output node of a differentiable op with an analytic backward rule. The
// backward callback receives d(loss)/d(output) and must accumulate into the
// inputs' grad slots. Recording is skipped when no tape is active or no
// input carries gradient.
Tensor make_op_output(std::vector<int> shape, std::vector<double> values,
                      const std::vector<Tensor>& inputs,
                      std::function<void(const std::vector<double>&, Tape&)> backward);

// ---- ops ----

Tensor matmul(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, double s);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, double s);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, double s);
Tensor div(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor abs(const Tensor& a);               // d|x|/dx at 0 is defined as 0
Tensor pow_int(const Tensor& a, int n);    // n >= 0
Tensor gelu(const Tensor& a);              // exact erf form

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, int axis);     // rank-2 only
Tensor mean(const Tensor& a, int axis);    // rank-2 only

Tensor concat(const std::vector<Tensor>& parts, int axis);
Tensor slice(const Tensor& a, int axis, int start, int len);
Tensor transpose(const Tensor& a);
// Replicates a [1 x k] or [k] tensor into [n x k]; gradient sums over rows.
Tensor broadcast_rows(const Tensor& row, int nrows);

// x [d_in] or [m x d_in], weight [d_in x d_out], bias [d_out].
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(const Tensor& a, double s) { return mul(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return mul(a, s); }
inline Tensor operator-(const Tensor& a) { return neg(a); }

}  // namespace kfs
