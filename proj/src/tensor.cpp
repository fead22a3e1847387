#include "kfs/tensor.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace kfs {

namespace {

thread_local Tape* g_active_tape = nullptr;

constexpr double kDivGuard = 1e-300;

bool tracked(const Tensor& t) {
    return t.defined() && (t.node()->requires_grad || t.node()->on_tape);
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    }
}

}  // namespace

int64_t shape_size(const std::vector<int>& shape) {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
}

std::string shape_str(const std::vector<int>& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) os << "x";
        os << shape[i];
    }
    os << "]";
    return os.str();
}

// ---- Tensor ----

Tensor::Tensor(std::vector<int> shape, std::vector<double> values, bool requires_grad) {
    for (int d : shape) {
        if (d < 0) throw ShapeError("Tensor: negative dimension in " + shape_str(shape));
    }
    if (shape_size(shape) != static_cast<int64_t>(values.size())) {
        throw ShapeError("Tensor: " + std::to_string(values.size()) + " values for shape " +
                         shape_str(shape));
    }
    node_ = std::make_shared<detail::Node>();
    node_->shape = std::move(shape);
    node_->values = std::move(values);
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::vector<int> shape) {
    std::vector<double> v(static_cast<size_t>(shape_size(shape)), 0.0);
    return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::full(std::vector<int> shape, double value) {
    std::vector<double> v(static_cast<size_t>(shape_size(shape)), value);
    return Tensor(std::move(shape), std::move(v));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::param(std::vector<int> shape, std::vector<double> values, std::string name) {
    Tensor t(std::move(shape), std::move(values), true);
    t.node_->name = std::move(name);
    return t;
}

double Tensor::value() const {
    if (size() != 1) throw ShapeError("value(): tensor is not scalar, shape " + shape_str(shape()));
    return node_->values[0];
}

double Tensor::at(int i, int j) const {
    return node_->values[static_cast<size_t>(i) * node_->shape[1] + j];
}

std::vector<double> Tensor::grad() const {
    if (node_->grad.size() == node_->values.size()) return node_->grad;
    return std::vector<double>(node_->values.size(), 0.0);
}

// ---- Tape ----

Tape::Tape() {
    prev_ = g_active_tape;
    g_active_tape = this;
}

Tape::~Tape() { g_active_tape = prev_; }

Tape* Tape::active() { return g_active_tape; }

std::vector<double>& Tape::grad_slot(const detail::NodePtr& n) {
    auto& g = grads_[n.get()];
    if (g.size() != n->values.size()) g.assign(n->values.size(), 0.0);
    return g;
}

const std::vector<double>* Tape::grad_if(const detail::Node* n) const {
    auto it = grads_.find(n);
    return it == grads_.end() ? nullptr : &it->second;
}

std::vector<double> Tape::grad(const Tensor& t) const {
    const std::vector<double>* g = grad_if(t.node());
    if (g != nullptr && g->size() == t.node()->values.size()) return *g;
    return std::vector<double>(t.node()->values.size(), 0.0);
}

void Tape::backward(const Tensor& loss, bool write_node_grads) {
    if (consumed_) throw NumericError("backward: tape already consumed");
    if (!loss.defined() || loss.size() != 1) {
        throw ShapeError("backward: loss must be scalar, got shape " +
                         (loss.defined() ? shape_str(loss.shape()) : std::string("<null>")));
    }
    consumed_ = true;
    grads_[loss.node()] = {1.0};
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)(*this);
    if (write_node_grads) {
        for (auto& [node, g] : grads_) const_cast<detail::Node*>(node)->grad = g;
    }
}

Tensor make_op_output(std::vector<int> shape, std::vector<double> values,
                      const std::vector<Tensor>& inputs,
                      std::function<void(const std::vector<double>&, Tape&)> backward) {
    if (shape_size(shape) != static_cast<int64_t>(values.size())) {
        throw ShapeError("op output: " + std::to_string(values.size()) + " values for shape " +
                         shape_str(shape));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->values = std::move(values);

    Tape* tape = Tape::active();
    bool track = false;
    if (tape != nullptr) {
        for (const Tensor& t : inputs) {
            if (tracked(t)) {
                track = true;
                break;
            }
        }
    }
    if (track) {
        node->on_tape = true;
        tape->record_step([out = node, bw = std::move(backward)](Tape& tp) {
            const std::vector<double>* g = tp.grad_if(out.get());
            if (g == nullptr) return;
            bw(*g, tp);
        });
    }
    return Tensor(std::move(node));
}

// ---- elementwise ----

namespace {

using BinFwd = double (*)(double, double);

Tensor binary_op(const char* name, const Tensor& a, const Tensor& b, BinFwd f,
                 std::function<void(const std::vector<double>&, Tape&)> bw) {
    check_same_shape(name, a, b);
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = f(a.values()[i], b.values()[i]);
    return make_op_output(a.shape(), std::move(out), {a, b}, std::move(bw));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        "add", a, b, [](double x, double y) { return x + y; },
        [a, b](const std::vector<double>& g, Tape& tp) {
            if (tracked(a)) {
                auto& ga = tp.grad_slot(a.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (tracked(b)) {
                auto& gb = tp.grad_slot(b.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            }
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        "sub", a, b, [](double x, double y) { return x - y; },
        [a, b](const std::vector<double>& g, Tape& tp) {
            if (tracked(a)) {
                auto& ga = tp.grad_slot(a.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (tracked(b)) {
                auto& gb = tp.grad_slot(b.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            }
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        "mul", a, b, [](double x, double y) { return x * y; },
        [a, b](const std::vector<double>& g, Tape& tp) {
            if (tracked(a)) {
                auto& ga = tp.grad_slot(a.node_ptr());
                const auto& bv = b.values();
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
            }
            if (tracked(b)) {
                auto& gb = tp.grad_slot(b.node_ptr());
                const auto& av = a.values();
                for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
            }
        });
}

Tensor div(const Tensor& a, const Tensor& b) {
    for (double d : b.values()) {
        if (std::fabs(d) < kDivGuard) {
            throw NumericError("div: |denominator| < 1e-300");
        }
    }
    return binary_op(
        "div", a, b, [](double x, double y) { return x / y; },
        [a, b](const std::vector<double>& g, Tape& tp) {
            const auto& av = a.values();
            const auto& bv = b.values();
            if (tracked(a)) {
                auto& ga = tp.grad_slot(a.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / bv[i];
            }
            if (tracked(b)) {
                auto& gb = tp.grad_slot(b.node_ptr());
                for (size_t i = 0; i < g.size(); ++i) gb[i] -= g[i] * av[i] / (bv[i] * bv[i]);
            }
        });
}

namespace {

// Scalar right-hand operand: the scalar is a constant, only `a` gets grads.
Tensor scalar_rhs_op(const Tensor& a, double s, double dda, BinFwd f) {
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = f(a.values()[i], s);
    return make_op_output(a.shape(), std::move(out), {a},
                          [a, dda](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dda;
                          });
}

}  // namespace

Tensor add(const Tensor& a, double s) {
    return scalar_rhs_op(a, s, 1.0, [](double x, double y) { return x + y; });
}

Tensor sub(const Tensor& a, double s) {
    return scalar_rhs_op(a, s, 1.0, [](double x, double y) { return x - y; });
}

Tensor mul(const Tensor& a, double s) {
    return scalar_rhs_op(a, s, s, [](double x, double y) { return x * y; });
}

Tensor div(const Tensor& a, double s) {
    if (std::fabs(s) < kDivGuard) throw NumericError("div: |denominator| < 1e-300");
    return scalar_rhs_op(a, s, 1.0 / s, [](double x, double y) { return x / y; });
}

Tensor neg(const Tensor& a) {
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = -a.values()[i];
    return make_op_output(a.shape(), std::move(out), {a},
                          [a](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (size_t i = 0; i < g.size(); ++i) ga[i] -= g[i];
                          });
}

Tensor abs(const Tensor& a) {
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(a.values()[i]);
    return make_op_output(a.shape(), std::move(out), {a},
                          [a](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              const auto& av = a.values();
                              for (size_t i = 0; i < g.size(); ++i) {
                                  const double s = av[i] > 0.0 ? 1.0 : (av[i] < 0.0 ? -1.0 : 0.0);
                                  ga[i] += g[i] * s;
                              }
                          });
}

Tensor pow_int(const Tensor& a, int n) {
    if (n < 0) throw ConfigError("pow_int: negative exponent " + std::to_string(n));
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        double p = 1.0;
        for (int j = 0; j < n; ++j) p *= a.values()[i];
        out[i] = p;
    }
    return make_op_output(a.shape(), std::move(out), {a},
                          [a, n](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a) || n == 0) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              const auto& av = a.values();
                              for (size_t i = 0; i < g.size(); ++i) {
                                  double p = 1.0;
                                  for (int j = 0; j < n - 1; ++j) p *= av[i];
                                  ga[i] += g[i] * n * p;
                              }
                          });
}

Tensor gelu(const Tensor& a) {
    static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
    static const double kInvSqrt2Pi = 1.0 / std::sqrt(8.0 * std::atan(1.0));
    std::vector<double> out(a.values().size());
    for (size_t i = 0; i < out.size(); ++i) {
        const double x = a.values()[i];
        out[i] = 0.5 * x * (1.0 + std::erf(x * kInvSqrt2));
    }
    return make_op_output(a.shape(), std::move(out), {a},
                          [a](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              const auto& av = a.values();
                              for (size_t i = 0; i < g.size(); ++i) {
                                  const double x = av[i];
                                  const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
                                  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
                                  ga[i] += g[i] * (cdf + x * pdf);
                              }
                          });
}

// ---- reductions ----

Tensor sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.values()) s += v;
    return make_op_output({}, {s}, {a}, [a](const std::vector<double>& g, Tape& tp) {
        if (!tracked(a)) return;
        auto& ga = tp.grad_slot(a.node_ptr());
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[0];
    });
}

Tensor mean(const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean: empty tensor");
    double s = 0.0;
    for (double v : a.values()) s += v;
    const double inv_n = 1.0 / static_cast<double>(a.size());
    return make_op_output({}, {s * inv_n}, {a},
                          [a, inv_n](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[0] * inv_n;
                          });
}

namespace {

Tensor reduce_axis(const Tensor& a, int axis, bool take_mean) {
    if (a.rank() != 2) throw ShapeError("reduce: axis form requires rank 2, got " + shape_str(a.shape()));
    if (axis != 0 && axis != 1) throw ShapeError("reduce: axis " + std::to_string(axis) + " out of range");
    const int rows = a.dim(0), cols = a.dim(1);
    const int n = axis == 0 ? rows : cols;
    if (n == 0) throw ShapeError("reduce: empty axis");
    const int out_len = axis == 0 ? cols : rows;
    std::vector<double> out(static_cast<size_t>(out_len), 0.0);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            out[static_cast<size_t>(axis == 0 ? c : r)] += a.at(r, c);
        }
    }
    const double scale = take_mean ? 1.0 / n : 1.0;
    if (take_mean) {
        for (double& v : out) v *= scale;
    }
    return make_op_output({out_len}, std::move(out), {a},
                          [a, axis, rows, cols, scale](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (int r = 0; r < rows; ++r) {
                                  for (int c = 0; c < cols; ++c) {
                                      ga[static_cast<size_t>(r) * cols + c] +=
                                          g[static_cast<size_t>(axis == 0 ? c : r)] * scale;
                                  }
                              }
                          });
}

}  // namespace

Tensor sum(const Tensor& a, int axis) { return reduce_axis(a, axis, false); }
Tensor mean(const Tensor& a, int axis) { return reduce_axis(a, axis, true); }

// ---- shape ops ----

Tensor concat(const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ShapeError("concat: no inputs");
    const int rank = parts[0].rank();
    if (axis < 0 || axis >= rank) throw ShapeError("concat: axis out of range");
    std::vector<int> out_shape = parts[0].shape();
    out_shape[static_cast<size_t>(axis)] = 0;
    for (const Tensor& p : parts) {
        if (p.rank() != rank) throw ShapeError("concat: rank mismatch");
        for (int d = 0; d < rank; ++d) {
            if (d == axis) continue;
            if (p.dim(d) != out_shape[static_cast<size_t>(d)]) {
                throw ShapeError("concat: off-axis dims differ, " + shape_str(p.shape()) + " vs " +
                                 shape_str(parts[0].shape()));
            }
        }
        out_shape[static_cast<size_t>(axis)] += p.dim(axis);
    }

    std::vector<double> out(static_cast<size_t>(shape_size(out_shape)));
    if (rank == 1) {
        size_t off = 0;
        for (const Tensor& p : parts) {
            std::copy(p.values().begin(), p.values().end(), out.begin() + off);
            off += p.values().size();
        }
    } else if (rank == 2) {
        const int rows = out_shape[0], cols = out_shape[1];
        if (axis == 0) {
            size_t off = 0;
            for (const Tensor& p : parts) {
                std::copy(p.values().begin(), p.values().end(), out.begin() + off);
                off += p.values().size();
            }
        } else {
            int col_off = 0;
            for (const Tensor& p : parts) {
                const int pc = p.dim(1);
                for (int r = 0; r < rows; ++r) {
                    for (int c = 0; c < pc; ++c) {
                        out[static_cast<size_t>(r) * cols + col_off + c] = p.at(r, c);
                    }
                }
                col_off += pc;
            }
        }
    } else {
        throw ShapeError("concat: rank > 2 unsupported");
    }

    return make_op_output(out_shape, std::move(out), parts,
                          [parts, axis, out_shape](const std::vector<double>& g, Tape& tp) {
                              const int rank = static_cast<int>(out_shape.size());
                              if (rank == 1 || axis == 0) {
                                  size_t off = 0;
                                  for (const Tensor& p : parts) {
                                      if (tracked(p)) {
                                          auto& gp = tp.grad_slot(p.node_ptr());
                                          for (size_t i = 0; i < gp.size(); ++i) gp[i] += g[off + i];
                                      }
                                      off += p.values().size();
                                  }
                              } else {
                                  const int rows = out_shape[0], cols = out_shape[1];
                                  int col_off = 0;
                                  for (const Tensor& p : parts) {
                                      const int pc = p.shape()[1];
                                      if (tracked(p)) {
                                          auto& gp = tp.grad_slot(p.node_ptr());
                                          for (int r = 0; r < rows; ++r) {
                                              for (int c = 0; c < pc; ++c) {
                                                  gp[static_cast<size_t>(r) * pc + c] +=
                                                      g[static_cast<size_t>(r) * cols + col_off + c];
                                              }
                                          }
                                      }
                                      col_off += pc;
                                  }
                              }
                          });
}

Tensor slice(const Tensor& a, int axis, int start, int len) {
    if (axis < 0 || axis >= a.rank()) throw ShapeError("slice: axis out of range");
    if (start < 0 || len < 0 || start + len > a.dim(axis)) {
        throw ShapeError("slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                         ") out of bounds for dim " + std::to_string(a.dim(axis)));
    }
    if (a.rank() == 1) {
        std::vector<double> out(a.values().begin() + start, a.values().begin() + start + len);
        return make_op_output({len}, std::move(out), {a},
                              [a, start, len](const std::vector<double>& g, Tape& tp) {
                                  if (!tracked(a)) return;
                                  auto& ga = tp.grad_slot(a.node_ptr());
                                  for (int i = 0; i < len; ++i) ga[static_cast<size_t>(start + i)] += g[static_cast<size_t>(i)];
                              });
    }
    if (a.rank() != 2) throw ShapeError("slice: rank > 2 unsupported");
    const int rows = a.dim(0), cols = a.dim(1);
    const int out_rows = axis == 0 ? len : rows;
    const int out_cols = axis == 1 ? len : cols;
    std::vector<double> out(static_cast<size_t>(out_rows) * out_cols);
    for (int r = 0; r < out_rows; ++r) {
        for (int c = 0; c < out_cols; ++c) {
            out[static_cast<size_t>(r) * out_cols + c] = a.at(axis == 0 ? r + start : r, axis == 1 ? c + start : c);
        }
    }
    return make_op_output({out_rows, out_cols}, std::move(out), {a},
                          [a, axis, start, out_rows, out_cols, cols](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (int r = 0; r < out_rows; ++r) {
                                  for (int c = 0; c < out_cols; ++c) {
                                      const int sr = axis == 0 ? r + start : r;
                                      const int sc = axis == 1 ? c + start : c;
                                      ga[static_cast<size_t>(sr) * cols + sc] += g[static_cast<size_t>(r) * out_cols + c];
                                  }
                              }
                          });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() != 2) throw ShapeError("transpose: requires rank 2, got " + shape_str(a.shape()));
    const int rows = a.dim(0), cols = a.dim(1);
    std::vector<double> out(a.values().size());
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) out[static_cast<size_t>(c) * rows + r] = a.at(r, c);
    }
    return make_op_output({cols, rows}, std::move(out), {a},
                          [a, rows, cols](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(a)) return;
                              auto& ga = tp.grad_slot(a.node_ptr());
                              for (int r = 0; r < rows; ++r) {
                                  for (int c = 0; c < cols; ++c) {
                                      ga[static_cast<size_t>(r) * cols + c] += g[static_cast<size_t>(c) * rows + r];
                                  }
                              }
                          });
}

Tensor broadcast_rows(const Tensor& row, int nrows) {
    int k = 0;
    if (row.rank() == 1) {
        k = row.dim(0);
    } else if (row.rank() == 2 && row.dim(0) == 1) {
        k = row.dim(1);
    } else {
        throw ShapeError("broadcast_rows: input must be [k] or [1xk], got " + shape_str(row.shape()));
    }
    if (nrows < 0) throw ShapeError("broadcast_rows: negative row count");
    std::vector<double> out(static_cast<size_t>(nrows) * k);
    for (int r = 0; r < nrows; ++r) {
        std::copy(row.values().begin(), row.values().end(), out.begin() + static_cast<size_t>(r) * k);
    }
    return make_op_output({nrows, k}, std::move(out), {row},
                          [row, nrows, k](const std::vector<double>& g, Tape& tp) {
                              if (!tracked(row)) return;
                              auto& gr = tp.grad_slot(row.node_ptr());
                              for (int r = 0; r < nrows; ++r) {
                                  for (int c = 0; c < k; ++c) gr[static_cast<size_t>(c)] += g[static_cast<size_t>(r) * k + c];
                              }
                          });
}

// ---- linear algebra ----

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0)) {
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
    }
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
    const auto& av = a.values();
    const auto& bv = b.values();
    for (int i = 0; i < m; ++i) {
        for (int p = 0; p < k; ++p) {
            const double aip = av[static_cast<size_t>(i) * k + p];
            const size_t brow = static_cast<size_t>(p) * n;
            const size_t orow = static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) out[orow + j] += aip * bv[brow + j];
        }
    }
    return make_op_output({m, n}, std::move(out), {a, b},
                          [a, b, m, k, n](const std::vector<double>& g, Tape& tp) {
                              const auto& av = a.values();
                              const auto& bv = b.values();
                              if (tracked(a)) {
                                  auto& ga = tp.grad_slot(a.node_ptr());
                                  // ga += g . b^T
                                  for (int i = 0; i < m; ++i) {
                                      for (int j = 0; j < n; ++j) {
                                          const double gij = g[static_cast<size_t>(i) * n + j];
                                          for (int p = 0; p < k; ++p) {
                                              ga[static_cast<size_t>(i) * k + p] += gij * bv[static_cast<size_t>(p) * n + j];
                                          }
                                      }
                                  }
                              }
                              if (tracked(b)) {
                                  auto& gb = tp.grad_slot(b.node_ptr());
                                  // gb += a^T . g
                                  for (int i = 0; i < m; ++i) {
                                      for (int p = 0; p < k; ++p) {
                                          const double aip = av[static_cast<size_t>(i) * k + p];
                                          for (int j = 0; j < n; ++j) {
                                              gb[static_cast<size_t>(p) * n + j] += aip * g[static_cast<size_t>(i) * n + j];
                                          }
                                      }
                                  }
                              }
                          });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    if (weight.rank() != 2) throw ShapeError("affine: weight must be rank 2, got " + shape_str(weight.shape()));
    const int d_in = weight.dim(0), d_out = weight.dim(1);
    if (bias.rank() != 1 || bias.dim(0) != d_out) {
        throw ShapeError("affine: bias shape " + shape_str(bias.shape()) + " does not match weight " +
                         shape_str(weight.shape()));
    }
    const bool vec = x.rank() == 1;
    if (!vec && x.rank() != 2) throw ShapeError("affine: input rank must be 1 or 2");
    const int rows = vec ? 1 : x.dim(0);
    const int xin = vec ? x.dim(0) : x.dim(1);
    if (xin != d_in) {
        throw ShapeError("affine: input width " + std::to_string(xin) + " does not match weight " +
                         shape_str(weight.shape()));
    }

    std::vector<double> out(static_cast<size_t>(rows) * d_out);
    const auto& xv = x.values();
    const auto& wv = weight.values();
    const auto& bv = bias.values();
    for (int r = 0; r < rows; ++r) {
        const size_t orow = static_cast<size_t>(r) * d_out;
        for (int j = 0; j < d_out; ++j) out[orow + j] = bv[static_cast<size_t>(j)];
        for (int p = 0; p < d_in; ++p) {
            const double xrp = xv[static_cast<size_t>(r) * d_in + p];
            const size_t wrow = static_cast<size_t>(p) * d_out;
            for (int j = 0; j < d_out; ++j) out[orow + j] += xrp * wv[wrow + j];
        }
    }
    std::vector<int> out_shape = vec ? std::vector<int>{d_out} : std::vector<int>{rows, d_out};
    return make_op_output(std::move(out_shape), std::move(out), {x, weight, bias},
                          [x, weight, bias, rows, d_in, d_out](const std::vector<double>& g, Tape& tp) {
                              const auto& xv = x.values();
                              const auto& wv = weight.values();
                              if (tracked(x)) {
                                  auto& gx = tp.grad_slot(x.node_ptr());
                                  for (int r = 0; r < rows; ++r) {
                                      for (int j = 0; j < d_out; ++j) {
                                          const double grj = g[static_cast<size_t>(r) * d_out + j];
                                          for (int p = 0; p < d_in; ++p) {
                                              gx[static_cast<size_t>(r) * d_in + p] += grj * wv[static_cast<size_t>(p) * d_out + j];
                                          }
                                      }
                                  }
                              }
                              if (tracked(weight)) {
                                  auto& gw = tp.grad_slot(weight.node_ptr());
                                  for (int r = 0; r < rows; ++r) {
                                      for (int p = 0; p < d_in; ++p) {
                                          const double xrp = xv[static_cast<size_t>(r) * d_in + p];
                                          for (int j = 0; j < d_out; ++j) {
                                              gw[static_cast<size_t>(p) * d_out + j] += xrp * g[static_cast<size_t>(r) * d_out + j];
                                          }
                                      }
                                  }
                              }
                              if (tracked(bias)) {
                                  auto& gb = tp.grad_slot(bias.node_ptr());
                                  for (int r = 0; r < rows; ++r) {
                                      for (int j = 0; j < d_out; ++j) gb[static_cast<size_t>(j)] += g[static_cast<size_t>(r) * d_out + j];
                                  }
                              }
                          });
}

}  // namespace kfs
