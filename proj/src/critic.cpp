#include "movac/critic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace movac {

bool is_correlation_matrix(const Matrix& w, double tol) {
    if (w.rows() != w.cols() || w.rows() < 1) return false;
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (!is_simplex_weight(w.row(i).transpose(), tol)) return false;
    }
    return true;
}

Matrix identity_correlation(int objectives) {
    if (objectives < 1) throw DimensionError("identity_correlation: need at least one objective");
    return Matrix::Identity(objectives, objectives);
}

Vector compose_vector_value(const Matrix& w, const Vector& v) {
    if (w.cols() != v.size())
        throw DimensionError("compose_vector_value: dimensions disagree");
    return w * v;
}

void RunningNormalizer::update(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

double RunningNormalizer::variance() const {
    return count > 0 ? m2 / static_cast<double>(count) : 0.0;
}

double RunningNormalizer::normalize(double x) const {
    return (x - mean) / std::sqrt(variance() + 1e-8);
}

double RunningNormalizer::denormalize(double x) const {
    return x * std::sqrt(variance() + 1e-8) + mean;
}

int CriticEnsemble::state_dim() const {
    if (critics.empty()) throw ContractError("CriticEnsemble: no critics");
    return critics.front().input_dim();
}

CriticEnsemble make_critic_ensemble(int objectives, int state_dim, int hidden,
                                    double learning_rate, std::uint64_t seed) {
    if (objectives < 1) throw DimensionError("make_critic_ensemble: need at least one objective");
    CriticEnsemble ens;
    for (int i = 0; i < objectives; ++i) {
        MlpParams critic = make_mlp({state_dim, hidden, 1}, seed + static_cast<std::uint64_t>(i));
        ens.targets.push_back(critic);
        ens.optimizers.push_back(make_adam(mlp_tensors(critic), learning_rate));
        ens.critics.push_back(std::move(critic));
        ens.normalizers.emplace_back();
    }
    return ens;
}

double predict_value(const CriticEnsemble& ens, int objective, const Vector& state,
                     bool use_target) {
    if (objective < 0 || objective >= ens.objectives())
        throw DimensionError("predict_value: objective index out of range");
    const MlpParams& net = use_target ? ens.targets[static_cast<std::size_t>(objective)]
                                      : ens.critics[static_cast<std::size_t>(objective)];
    const double raw = mlp_forward(net, state)(0);
    return ens.normalizers[static_cast<std::size_t>(objective)].denormalize(raw);
}

Vector predict_value_batch(const CriticEnsemble& ens, int objective, const Matrix& states,
                           bool use_target) {
    if (objective < 0 || objective >= ens.objectives())
        throw DimensionError("predict_value_batch: objective index out of range");
    const MlpParams& net = use_target ? ens.targets[static_cast<std::size_t>(objective)]
                                      : ens.critics[static_cast<std::size_t>(objective)];
    Vector raw = mlp_forward(net, states).col(0);
    const auto& norm = ens.normalizers[static_cast<std::size_t>(objective)];
    for (Eigen::Index i = 0; i < raw.size(); ++i) raw[i] = norm.denormalize(raw[i]);
    return raw;
}

Vector predict_values(const CriticEnsemble& ens, const Vector& state) {
    Vector out(ens.objectives());
    for (int i = 0; i < ens.objectives(); ++i) out[i] = predict_value(ens, i, state);
    return out;
}

double td_residual(double reward, double v_next, double v_old, double gamma) {
    return reward + gamma * v_next - v_old;
}

std::vector<double> gae(std::span<const double> deltas, double gamma, double lambda) {
    std::vector<double> adv(deltas.size(), 0.0);
    double running = 0.0;
    for (std::size_t i = deltas.size(); i-- > 0;) {
        running = deltas[i] + gamma * lambda * running;
        adv[i] = running;
    }
    return adv;
}

double fit_critic(CriticEnsemble& ens, int objective, const Matrix& states,
                  const Vector& normalized_targets, int epochs, int minibatch,
                  std::mt19937_64& rng) {
    if (objective < 0 || objective >= ens.objectives())
        throw DimensionError("fit_critic: objective index out of range");
    if (states.rows() != normalized_targets.size())
        throw DimensionError("fit_critic: states and targets misaligned");
    if (!normalized_targets.allFinite()) throw NumericError("fit_critic: non-finite targets");

    const auto oi = static_cast<std::size_t>(objective);
    MlpParams& critic = ens.critics[oi];
    AdamState& opt = ens.optimizers[oi];

    const Eigen::Index n = states.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    auto full_loss = [&] {
        const Matrix pred = mlp_forward(critic, states);
        return 0.5 * (pred.col(0) - normalized_targets).squaredNorm() / static_cast<double>(n);
    };

    const Eigen::Index mb = std::max<Eigen::Index>(1, std::min<Eigen::Index>(minibatch, n));
    double monitored = full_loss();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (Eigen::Index start = 0; start < n; start += mb) {
            const Eigen::Index len = std::min(mb, n - start);
            Matrix xs(len, states.cols());
            Matrix ys(len, 1);
            for (Eigen::Index k = 0; k < len; ++k) {
                xs.row(k) = states.row(order[static_cast<std::size_t>(start + k)]);
                ys(k, 0) = normalized_targets[order[static_cast<std::size_t>(start + k)]];
            }
            ad::Tape t;
            MlpVars vars = lift(t, critic);
            ad::Var pred = mlp_forward(t, vars, ad::constant(t, xs));
            ad::Var diff = ad::sub(pred, ad::constant(t, ys));
            ad::Var loss = ad::scale(ad::mean(ad::mul(diff, diff)), 0.5);
            TensorList g = grad(t, loss, vars);
            TensorList params = mlp_tensors(critic);
            adam_step(opt, params, g);
            set_mlp_tensors(critic, params);
        }
        // overshoot monitor: a pass that raised the full loss halves the rate
        const double after = full_loss();
        if (after > monitored) opt.learning_rate *= 0.5;
        monitored = after;
    }

    ens.targets[oi] = critic;
    return monitored;
}

Matrix update_w_row(const Matrix& w, int objective, const AolsResult& aols_out,
                    const std::vector<std::pair<Vector, double>>& evaluations,
                    bool* fell_back) {
    if (objective < 0 || objective >= w.rows())
        throw DimensionError("update_w_row: objective index out of range");
    if (fell_back != nullptr) *fell_back = false;
    if (aols_out.marginal_weights.empty()) {
        if (fell_back != nullptr) *fell_back = true;
        return w;
    }

    const Vector* best = nullptr;
    double best_payoff = -std::numeric_limits<double>::infinity();
    for (const auto& mw : aols_out.marginal_weights) {
        for (const auto& [weight, payoff] : evaluations) {
            if (!almost_equal(weight, mw)) continue;
            if (payoff > best_payoff) {
                best_payoff = payoff;
                best = &mw;
            }
            break;
        }
    }
    if (best == nullptr) {
        if (fell_back != nullptr) *fell_back = true;
        return w;
    }
    Matrix out = w;
    out.row(objective) = simplex_project(*best).transpose();
    return out;
}

Vector normalize_objective(CriticEnsemble& ens, int objective, const Vector& raw_returns) {
    if (objective < 0 || objective >= ens.objectives())
        throw DimensionError("normalize_objective: objective index out of range");
    auto& norm = ens.normalizers[static_cast<std::size_t>(objective)];
    for (Eigen::Index i = 0; i < raw_returns.size(); ++i) norm.update(raw_returns[i]);
    Vector out(raw_returns.size());
    for (Eigen::Index i = 0; i < raw_returns.size(); ++i) out[i] = norm.normalize(raw_returns[i]);
    return out;
}

}  // namespace movac
