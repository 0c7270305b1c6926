#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "movac/mlp.hpp"
#include "movac/types.hpp"
#include "movac/weight_geometry.hpp"

// One critic network per objective, the correlation matrix tying objectives
// together, and the temporal-difference machinery built on them.
namespace movac {

// Rows of the correlation matrix are simplex weights: row i mixes the
// per-objective values into objective i's composite.
bool is_correlation_matrix(const Matrix& w, double tol = kSimplexTol);
Matrix identity_correlation(int objectives);

// Composite value vector: W * v.
Vector compose_vector_value(const Matrix& w, const Vector& v);

// Streaming mean/variance used to keep regression targets near unit scale.
struct RunningNormalizer {
    double mean = 0.0;
    double m2 = 0.0;
    std::uint64_t count = 0;

    void update(double x);
    [[nodiscard]] double variance() const;
    [[nodiscard]] double normalize(double x) const;
    [[nodiscard]] double denormalize(double x) const;
};

struct CriticEnsemble {
    std::vector<MlpParams> critics;   // state -> 1 each
    std::vector<MlpParams> targets;   // frozen copies refreshed after fits
    std::vector<RunningNormalizer> normalizers;
    std::vector<AdamState> optimizers;

    [[nodiscard]] int objectives() const { return static_cast<int>(critics.size()); }
    [[nodiscard]] int state_dim() const;
};

// Critics with one hidden layer, deterministic per seed.
CriticEnsemble make_critic_ensemble(int objectives, int state_dim, int hidden,
                                    double learning_rate, std::uint64_t seed);

// Denormalized per-objective value estimates at one state.
Vector predict_values(const CriticEnsemble& ens, const Vector& state);
double predict_value(const CriticEnsemble& ens, int objective, const Vector& state,
                     bool use_target = false);
Vector predict_value_batch(const CriticEnsemble& ens, int objective, const Matrix& states,
                           bool use_target = false);

// r + gamma * v_next - v_old. Terminal transitions pass v_next = 0.
double td_residual(double reward, double v_next, double v_old, double gamma);

// Backward recursion adv_t = delta_t + gamma*lambda*adv_{t+1} over one
// episode segment.
std::vector<double> gae(std::span<const double> deltas, double gamma, double lambda);

// Adam regression of critic `objective` onto normalized targets; refreshes
// the target copy afterwards and returns the final mean-squared-error loss.
double fit_critic(CriticEnsemble& ens, int objective, const Matrix& states,
                  const Vector& normalized_targets, int epochs, int minibatch,
                  std::mt19937_64& rng);

// Row `objective` becomes the marginal weight with the best evaluated payoff
// (lowest index on ties), projected to the simplex. Other rows untouched.
// Empty marginal-weight lists keep the previous row and set *fell_back.
Matrix update_w_row(const Matrix& w, int objective, const AolsResult& aols_out,
                    const std::vector<std::pair<Vector, double>>& evaluations,
                    bool* fell_back = nullptr);

// Updates objective i's running statistics with the raw returns, then maps
// them to (x - mean) / sqrt(var + 1e-8).
Vector normalize_objective(CriticEnsemble& ens, int objective, const Vector& raw_returns);

}  // namespace movac
