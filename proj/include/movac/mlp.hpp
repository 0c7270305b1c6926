#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "movac/autodiff.hpp"
#include "movac/types.hpp"

namespace movac {

// Dense feed-forward net: ReLU on hidden layers, identity on the output.
// Layout: activations are row vectors, x [n x in] * weight [in x out] + bias.
struct MlpLayer {
    Matrix weight;
    Matrix bias;  // 1 x out
};

struct MlpParams {
    std::vector<MlpLayer> layers;

    [[nodiscard]] int input_dim() const;
    [[nodiscard]] int output_dim() const;
};

// Uniform init in +-sqrt(6 / (fan_in + fan_out)), biases zero. Deterministic
// per seed.
MlpParams make_mlp(const std::vector<int>& widths, std::uint64_t seed);

Matrix mlp_forward(const MlpParams& p, const Matrix& x);
Vector mlp_forward(const MlpParams& p, const Vector& x);

// Flat tensor views for optimizers and gradient plumbing: [W1, b1, W2, b2, …].
using TensorList = std::vector<Matrix>;

TensorList mlp_tensors(const MlpParams& p);
void set_mlp_tensors(MlpParams& p, const TensorList& tensors);

// Graph-side parameters for building differentiable losses.
struct MlpVars {
    std::vector<std::pair<ad::Var, ad::Var>> layers;  // (weight, bias)

    [[nodiscard]] std::vector<ad::Var> all() const;
};

MlpVars lift(ad::Tape& t, const MlpParams& p);
ad::Var mlp_forward(ad::Tape& t, const MlpVars& vars, ad::Var x);

// Backward pass from a scalar loss; gradients in parameter order.
TensorList grads_of(ad::Tape& t, ad::Var loss, const std::vector<ad::Var>& params);
TensorList grad(ad::Tape& t, ad::Var loss, const MlpVars& vars);

struct AdamState {
    TensorList m;
    TensorList v;
    long step = 0;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

AdamState make_adam(const TensorList& params, double learning_rate);

// Bias-corrected Adam descent step. NaN/inf gradients raise NumericError and
// leave parameters and state untouched.
void adam_step(AdamState& state, TensorList& params, const TensorList& grads);

double global_norm(const TensorList& tensors);
void clip_global_norm(TensorList& tensors, double max_norm);

// Central finite differences over every parameter against the tape gradient;
// returns the worst relative error. The loss builder is evaluated afresh for
// each probe, so only forward values feed the reference side.
double finite_diff_check(const MlpParams& p,
                         const std::function<ad::Var(ad::Tape&, const MlpVars&)>& loss_builder,
                         double h);

}  // namespace movac
