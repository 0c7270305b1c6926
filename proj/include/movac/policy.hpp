#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "movac/mlp.hpp"
#include "movac/types.hpp"

// The single actor: action distributions, log-probabilities, the clipped
// surrogate update, and the stepsize schedules that pair it with the critics.
namespace movac {

enum class ActionFamily { kGaussian, kCategorical };

inline constexpr double kLogStdMin = -20.0;
inline constexpr double kLogStdMax = 2.0;

// Trunk maps state to per-dimension means (Gaussian) or logits (categorical).
// Gaussian heads carry a state-independent learnable log-std row.
struct PolicyParams {
    MlpParams trunk;
    Matrix log_std;  // 1 x action_dim, Gaussian only
    ActionFamily family = ActionFamily::kGaussian;
    int action_dim = 0;

    [[nodiscard]] int state_dim() const { return trunk.input_dim(); }
};

PolicyParams make_policy(int state_dim, int action_dim, ActionFamily family, int hidden,
                         std::uint64_t seed);

TensorList policy_tensors(const PolicyParams& p);
void set_policy_tensors(PolicyParams& p, const TensorList& tensors);

struct ClipConfig {
    double epsilon_clip = 0.2;
    int epochs = 4;
    int minibatch = 64;
};

enum class ScheduleKind { kConstant, kInversePower };

struct StepsizeSchedule {
    ScheduleKind kind = ScheduleKind::kConstant;
    double base = 3e-4;
    double power = 0.0;  // inverse-power exponent
};

// constant -> base; inverse-power -> base / (1 + k)^power.
double schedule_rate(const StepsizeSchedule& s, long k);

// Divergent rate sum with convergent squared sum; by the p-series criterion
// this is the inverse-power kind with power in (0.5, 1].
bool satisfies_robbins_monro(const StepsizeSchedule& s);

// Actor must update much slower than the critic: rate ratio non-increasing
// with limit zero, or both constant with the actor rate strictly smaller.
bool validate_two_timescale(const StepsizeSchedule& actor, const StepsizeSchedule& critic);

struct ActionSample {
    Vector action;  // one entry per dimension; categorical stores the index
    double log_prob = 0.0;
};

ActionSample sample_action(const PolicyParams& p, const Vector& state, std::mt19937_64& rng);

// Distribution mean (Gaussian) or argmax logits (categorical).
Vector deterministic_action(const PolicyParams& p, const Vector& state);

double log_prob(const PolicyParams& p, const Vector& state, const Vector& action);

struct PpoBatch {
    Matrix states;         // n x state_dim
    Matrix actions;        // n x action_dim
    Vector old_log_probs;  // n
    Vector advantages;     // n, normalized by the caller
};

// Scalar-aligned in-place normalization to zero mean / unit variance.
Vector normalize_advantages(const Vector& advantages);

// Minibatch ascent on mean(min(ratio*A, clip(ratio)*A)) for cfg.epochs, with
// gradients clipped to global norm 0.5 before Adam. Returns the full-batch
// surrogate after the last epoch. NaN advantages raise and update nothing.
double ppo_clip_update(PolicyParams& p, const PpoBatch& batch, const ClipConfig& cfg,
                       AdamState& opt, std::mt19937_64& shuffle_rng);

// Differentiable batch log-probability column: used by the update and by the
// anchor-gradient identity checks.
ad::Var log_prob_graph(ad::Tape& t, const MlpVars& trunk_vars, ad::Var log_std_var,
                       const PolicyParams& p, const Matrix& states, const Matrix& actions);

}  // namespace movac
