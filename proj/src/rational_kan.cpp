#include "kfs/rational_kan.hpp"

#include <cmath>

namespace kfs {

double rational_eval(double x, const std::vector<double>& numer, const std::vector<double>& denom) {
    if (numer.empty()) throw ConfigError("rational_eval: numerator coefficients must be non-empty");
    double p = numer.back();
    for (size_t i = numer.size() - 1; i-- > 0;) p = p * x + numer[i];
    if (denom.empty()) return p;
    // q(x) = b1*x + ... + bn*x^n
    double q = denom.back();
    for (size_t i = denom.size() - 1; i-- > 0;) q = q * x + denom[i];
    q *= x;
    return p / (1.0 + std::fabs(q));
}

std::pair<std::vector<double>, std::vector<double>> init_rational_identity(int num_order, int den_order) {
    if (num_order < 1) throw ConfigError("init_rational_identity: numerator order must be >= 1");
    if (den_order < 0) throw ConfigError("init_rational_identity: negative denominator order");
    std::vector<double> a(static_cast<size_t>(num_order) + 1, 0.0);
    a[1] = 1.0;
    std::vector<double> b(static_cast<size_t>(den_order), 0.0);
    return {a, b};
}

int effective_groups(int d_in, int requested) {
    if (requested < 1) throw ConfigError("groups must be >= 1");
    return d_in < requested ? d_in : requested;
}

namespace {

// Row [1 x d_in] where channel i carries coefs[group(i)][col]; the gradient
// rule sums channel grads back per group.
Tensor group_coef_row(const Tensor& coefs, int col, int d_in, int groups) {
    const int dg = d_in / groups;
    const int cols = coefs.dim(1);
    std::vector<double> v(static_cast<size_t>(d_in));
    for (int i = 0; i < d_in; ++i) v[static_cast<size_t>(i)] = coefs.at(i / dg, col);
    return make_op_output({1, d_in}, std::move(v), {coefs},
                          [coefs, col, d_in, dg, cols](const std::vector<double>& g, Tape& tp) {
                              auto& gc = tp.grad_slot(coefs.node_ptr());
                              for (int i = 0; i < d_in; ++i) {
                                  gc[static_cast<size_t>(i / dg) * cols + col] += g[static_cast<size_t>(i)];
                              }
                          });
}

}  // namespace

Tensor rational_activation(const Tensor& x, const RationalParams& params) {
    if (x.rank() != 2) throw ShapeError("rational_activation: input must be rank 2, got " + shape_str(x.shape()));
    const int rows = x.dim(0);
    const int d_in = x.dim(1);
    if (params.groups < 1 || d_in % params.groups != 0) {
        throw ConfigError("rational_activation: d_in " + std::to_string(d_in) + " not divisible by " +
                          std::to_string(params.groups) + " groups");
    }
    const int m = params.num_order();
    Tensor p = broadcast_rows(group_coef_row(params.numer, m, d_in, params.groups), rows);
    for (int k = m - 1; k >= 0; --k) {
        p = add(mul(p, x), broadcast_rows(group_coef_row(params.numer, k, d_in, params.groups), rows));
    }
    const int n = params.den_order();
    if (n == 0) return p;
    Tensor q = broadcast_rows(group_coef_row(params.denom, n - 1, d_in, params.groups), rows);
    for (int k = n - 1; k >= 1; --k) {
        q = add(mul(q, x), broadcast_rows(group_coef_row(params.denom, k - 1, d_in, params.groups), rows));
    }
    q = mul(q, x);
    return div(p, add(kfs::abs(q), 1.0));
}

Tensor grkan_forward(const Tensor& x, const GrKanLayer& layer) {
    return affine(rational_activation(x, layer.rational), layer.weight, layer.bias);
}

Tensor kan_block_forward(const Tensor& x, const GrKanLayer& unit1, const GrKanLayer& unit2) {
    if (unit1.d_out() != unit2.d_in()) {
        throw ConfigError("kan_block: unit widths do not chain, " + std::to_string(unit1.d_out()) +
                          " -> " + std::to_string(unit2.d_in()));
    }
    return grkan_forward(grkan_forward(x, unit1), unit2);
}

Tensor mlp_block_forward(const Tensor& x, const MlpLayer& unit1, const MlpLayer& unit2) {
    if (unit1.weight.dim(1) != unit2.weight.dim(0)) {
        throw ConfigError("mlp_block: unit widths do not chain, " + std::to_string(unit1.weight.dim(1)) +
                          " -> " + std::to_string(unit2.weight.dim(0)));
    }
    return affine(gelu(affine(x, unit1.weight, unit1.bias)), unit2.weight, unit2.bias);
}

namespace {

Tensor uniform_affine_weight(int d_in, int d_out, Rng& rng, const std::string& name) {
    const double bound = std::sqrt(6.0 / (d_in + d_out));
    std::vector<double> w(static_cast<size_t>(d_in) * d_out);
    for (double& v : w) v = rng.uniform(-bound, bound);
    return Tensor::param({d_in, d_out}, std::move(w), name);
}

}  // namespace

GrKanLayer make_grkan_layer(int d_in, int d_out, int groups, int num_order, int den_order, Rng& rng,
                            const std::string& name_prefix) {
    if (d_in % groups != 0) {
        throw ConfigError("make_grkan_layer: d_in " + std::to_string(d_in) + " not divisible by " +
                          std::to_string(groups) + " groups");
    }
    auto [a, b] = init_rational_identity(num_order, den_order);
    std::vector<double> numer(static_cast<size_t>(groups) * a.size());
    for (int gi = 0; gi < groups; ++gi) {
        std::copy(a.begin(), a.end(), numer.begin() + static_cast<size_t>(gi) * a.size());
    }
    GrKanLayer layer;
    layer.rational.groups = groups;
    layer.rational.numer =
        Tensor::param({groups, static_cast<int>(a.size())}, std::move(numer), name_prefix + ".numer");
    layer.rational.denom = Tensor::param(
        {groups, den_order}, std::vector<double>(static_cast<size_t>(groups) * den_order, 0.0),
        name_prefix + ".denom");
    layer.weight = uniform_affine_weight(d_in, d_out, rng, name_prefix + ".weight");
    layer.bias = Tensor::param({d_out}, std::vector<double>(static_cast<size_t>(d_out), 0.0),
                               name_prefix + ".bias");
    return layer;
}

MlpLayer make_mlp_layer(int d_in, int d_out, Rng& rng, const std::string& name_prefix) {
    MlpLayer layer;
    layer.weight = uniform_affine_weight(d_in, d_out, rng, name_prefix + ".weight");
    layer.bias = Tensor::param({d_out}, std::vector<double>(static_cast<size_t>(d_out), 0.0),
                               name_prefix + ".bias");
    return layer;
}

}  // namespace kfs
