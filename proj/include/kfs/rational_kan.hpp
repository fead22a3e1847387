#pragma once

#include <string>
#include <utility>
#include <vector>

#include "kfs/rng.hpp"
#include "kfs/tensor.hpp"

namespace kfs {

// Per-group coefficients of the pole-free rational basis
//   F(x) = (a0 + a1*x + ... + a_m*x^m) / (1 + |b1*x + ... + b_n*x^n|).
// Channels within a group share one (a, b) pair; the denominator is >= 1 for
// every real x, so the activation has no poles.
struct RationalParams {
    Tensor numer;  // [groups x (num_order + 1)], column k holds a_k
    Tensor denom;  // [groups x den_order], column k holds b_{k+1}; may be 0 columns
    int groups = 0;

    int num_order() const { return numer.dim(1) - 1; }
    int den_order() const { return denom.defined() ? denom.dim(1) : 0; }
};

// One GR-KAN unit: grouped rational activation followed by an affine map.
struct GrKanLayer {
    RationalParams rational;
    Tensor weight;  // [d_in x d_out]
    Tensor bias;    // [d_out]

    int d_in() const { return weight.dim(0); }
    int d_out() const { return weight.dim(1); }
};

// Affine unit of the parameter-matched MLP ablation block.
struct MlpLayer {
    Tensor weight;
    Tensor bias;
};

// Scalar rational basis, evaluated by Horner's rule. numer holds a_0..a_m
// (at least one element), denom holds b_1..b_n and may be empty.
double rational_eval(double x, const std::vector<double>& numer, const std::vector<double>& denom);

// Identity coefficients: a = [0, 1, 0, ...], b = 0, so F(x) = x exactly.
std::pair<std::vector<double>, std::vector<double>> init_rational_identity(int num_order, int den_order);

// Requested group count clamped down to d_in when d_in is smaller.
int effective_groups(int d_in, int requested);

// Applies each group's rational function elementwise to its channels.
// x is [rows x d_in]; d_in must be divisible by params.groups.
Tensor rational_activation(const Tensor& x, const RationalParams& params);

// W * F(x): grouped rational activation, then affine.
Tensor grkan_forward(const Tensor& x, const GrKanLayer& layer);

// Two-unit block d_model -> d_ff -> d_model.
Tensor kan_block_forward(const Tensor& x, const GrKanLayer& unit1, const GrKanLayer& unit2);

// Ablation block with the same dimension chain: affine -> GELU -> affine.
Tensor mlp_block_forward(const Tensor& x, const MlpLayer& unit1, const MlpLayer& unit2);

// Constructors with identity rationals and uniform +-sqrt(6/(d_in+d_out))
// affine init, zero bias. Parameter names get `name_prefix` + ".numer" etc.
GrKanLayer make_grkan_layer(int d_in, int d_out, int groups, int num_order, int den_order, Rng& rng,
                            const std::string& name_prefix);
MlpLayer make_mlp_layer(int d_in, int d_out, Rng& rng, const std::string& name_prefix);

}  // namespace kfs
