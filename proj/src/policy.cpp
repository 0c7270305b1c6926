#include "movac/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace movac {

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;  // 0.5 * log(2*pi)

void clamp_log_std(PolicyParams& p) {
    if (p.family != ActionFamily::kGaussian) return;
    p.log_std = p.log_std.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

std::vector<int> action_indices(const Matrix& actions) {
    std::vector<int> idx(static_cast<std::size_t>(actions.rows()));
    for (Eigen::Index r = 0; r < actions.rows(); ++r)
        idx[static_cast<std::size_t>(r)] = static_cast<int>(std::lround(actions(r, 0)));
    return idx;
}

}  // namespace

PolicyParams make_policy(int state_dim, int action_dim, ActionFamily family, int hidden,
                         std::uint64_t seed) {
    if (action_dim < 1) throw DimensionError("make_policy: need at least one action dimension");
    PolicyParams p;
    p.trunk = make_mlp({state_dim, hidden, hidden, action_dim}, seed);
    p.family = family;
    p.action_dim = action_dim;
    p.log_std = family == ActionFamily::kGaussian ? Matrix::Zero(1, action_dim) : Matrix();
    return p;
}

TensorList policy_tensors(const PolicyParams& p) {
    TensorList out = mlp_tensors(p.trunk);
    if (p.family == ActionFamily::kGaussian) out.push_back(p.log_std);
    return out;
}

void set_policy_tensors(PolicyParams& p, const TensorList& tensors) {
    const std::size_t trunk_count = 2 * p.trunk.layers.size();
    const std::size_t expect =
        trunk_count + (p.family == ActionFamily::kGaussian ? 1 : 0);
    if (tensors.size() != expect) throw DimensionError("set_policy_tensors: tensor count mismatch");
    TensorList trunk(tensors.begin(), tensors.begin() + static_cast<std::ptrdiff_t>(trunk_count));
    set_mlp_tensors(p.trunk, trunk);
    if (p.family == ActionFamily::kGaussian) p.log_std = tensors.back();
}

double schedule_rate(const StepsizeSchedule& s, long k) {
    if (k < 0) throw ContractError("schedule_rate: negative step");
    if (s.kind == ScheduleKind::kConstant) return s.base;
    return s.base / std::pow(1.0 + static_cast<double>(k), s.power);
}

bool satisfies_robbins_monro(const StepsizeSchedule& s) {
    return s.kind == ScheduleKind::kInversePower && s.base > 0.0 && s.power > 0.5 &&
           s.power <= 1.0;
}

bool validate_two_timescale(const StepsizeSchedule& actor, const StepsizeSchedule& critic) {
    if (actor.base <= 0.0 || critic.base <= 0.0) return false;
    if (actor.kind == ScheduleKind::kInversePower && actor.power <= 0.0) return false;
    if (critic.kind == ScheduleKind::kInversePower && critic.power <= 0.0) return false;

    const bool actor_const = actor.kind == ScheduleKind::kConstant;
    const bool critic_const = critic.kind == ScheduleKind::kConstant;
    if (actor_const && critic_const) return actor.base < critic.base;
    if (actor_const && !critic_const) return false;  // ratio diverges
    if (!actor_const && critic_const) return true;   // ratio ~ (1+k)^-p -> 0
    return actor.power > critic.power;               // ratio ~ (1+k)^(p_c - p_a)
}

ActionSample sample_action(const PolicyParams& p, const Vector& state, std::mt19937_64& rng) {
    if (state.size() != p.state_dim()) throw DimensionError("sample_action: state width mismatch");
    ActionSample out;
    const Vector head = mlp_forward(p.trunk, state);
    if (p.family == ActionFamily::kGaussian) {
        std::normal_distribution<double> gauss(0.0, 1.0);
        out.action.resize(p.action_dim);
        for (int d = 0; d < p.action_dim; ++d) {
            const double sd = std::exp(std::clamp(p.log_std(0, d), kLogStdMin, kLogStdMax));
            out.action[d] = head[d] + sd * gauss(rng);
        }
    } else {
        // inverse-CDF over softmax probabilities
        const double lse = [&] {
            const double m = head.maxCoeff();
            return m + std::log((head.array() - m).exp().sum());
        }();
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double u = unit(rng);
        double acc = 0.0;
        int pick = p.action_dim - 1;
        for (int d = 0; d < p.action_dim; ++d) {
            acc += std::exp(head[d] - lse);
            if (u <= acc) {
                pick = d;
                break;
            }
        }
        out.action = Vector::Constant(1, static_cast<double>(pick));
    }
    out.log_prob = log_prob(p, state, out.action);
    return out;
}

Vector deterministic_action(const PolicyParams& p, const Vector& state) {
    const Vector head = mlp_forward(p.trunk, state);
    if (p.family == ActionFamily::kGaussian) return head;
    Eigen::Index best = 0;
    head.maxCoeff(&best);
    return Vector::Constant(1, static_cast<double>(best));
}

double log_prob(const PolicyParams& p, const Vector& state, const Vector& action) {
    const Vector head = mlp_forward(p.trunk, state);
    if (p.family == ActionFamily::kGaussian) {
        if (action.size() != p.action_dim) throw DimensionError("log_prob: action width mismatch");
        double lp = 0.0;
        for (int d = 0; d < p.action_dim; ++d) {
            const double ls = std::clamp(p.log_std(0, d), kLogStdMin, kLogStdMax);
            const double z = (action[d] - head[d]) * std::exp(-ls);
            lp += -0.5 * z * z - ls - kHalfLog2Pi;
        }
        return lp;
    }
    const int a = static_cast<int>(std::lround(action[0]));
    if (a < 0 || a >= p.action_dim) throw DimensionError("log_prob: action index out of range");
    const double m = head.maxCoeff();
    const double lse = m + std::log((head.array() - m).exp().sum());
    return head[a] - lse;
}

Vector normalize_advantages(const Vector& advantages) {
    if (advantages.size() == 0) return advantages;
    const double mean = advantages.mean();
    const double var = (advantages.array() - mean).square().mean();
    // the floor keeps an all-but-converged batch from blowing numerical
    // noise up to unit scale
    return (advantages.array() - mean) / std::max(std::sqrt(var), 1e-6);
}

ad::Var log_prob_graph(ad::Tape& t, const MlpVars& trunk_vars, ad::Var log_std_var,
                       const PolicyParams& p, const Matrix& states, const Matrix& actions) {
    ad::Var head = mlp_forward(t, trunk_vars, ad::constant(t, states));
    if (p.family == ActionFamily::kGaussian) {
        ad::Var diff = ad::sub(ad::constant(t, actions), head);
        ad::Var inv_std = ad::exp_op(ad::neg(log_std_var));
        ad::Var z = ad::mul_rowvec(diff, inv_std);
        ad::Var quad = ad::scale(ad::row_sum(ad::mul(z, z)), -0.5);
        ad::Var lp = ad::add_scalar(quad, ad::neg(ad::sum(log_std_var)));
        return ad::add_const(lp, -kHalfLog2Pi * p.action_dim);
    }
    return ad::gather_cols(ad::sub_colvec(head, ad::row_logsumexp(head)),
                           action_indices(actions));
}

namespace {

double surrogate_value(const PolicyParams& p, const PpoBatch& batch, double eps_clip) {
    ad::Tape t;
    MlpVars trunk_vars = lift(t, p.trunk);
    ad::Var log_std_var = p.family == ActionFamily::kGaussian
                              ? ad::constant(t, p.log_std)
                              : ad::constant(t, Matrix::Zero(1, 1));
    ad::Var lp = log_prob_graph(t, trunk_vars, log_std_var, p, batch.states, batch.actions);
    ad::Var ratio = ad::exp_op(ad::sub(lp, ad::constant(t, Matrix(batch.old_log_probs))));
    ad::Var adv = ad::constant(t, Matrix(batch.advantages));
    ad::Var surr =
        ad::mean(ad::min_op(ad::mul(ratio, adv),
                            ad::mul(ad::clamp(ratio, 1.0 - eps_clip, 1.0 + eps_clip), adv)));
    return surr.value()(0, 0);
}

}  // namespace

double ppo_clip_update(PolicyParams& p, const PpoBatch& batch, const ClipConfig& cfg,
                       AdamState& opt, std::mt19937_64& shuffle_rng) {
    const Eigen::Index n = batch.states.rows();
    if (batch.actions.rows() != n || batch.old_log_probs.size() != n ||
        batch.advantages.size() != n)
        throw DimensionError("ppo_clip_update: batch fields misaligned");
    if (cfg.epsilon_clip <= 0.0) throw ContractError("ppo_clip_update: epsilon_clip must be > 0");
    if (!batch.advantages.allFinite()) throw NumericError("ppo_clip_update: non-finite advantage");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::Index mb = std::max<Eigen::Index>(1, std::min<Eigen::Index>(cfg.minibatch, n));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (Eigen::Index start = 0; start < n; start += mb) {
            const Eigen::Index len = std::min(mb, n - start);
            Matrix xs(len, batch.states.cols());
            Matrix as(len, batch.actions.cols());
            Matrix old_lp(len, 1);
            Matrix adv(len, 1);
            for (Eigen::Index k = 0; k < len; ++k) {
                const Eigen::Index r = order[static_cast<std::size_t>(start + k)];
                xs.row(k) = batch.states.row(r);
                as.row(k) = batch.actions.row(r);
                old_lp(k, 0) = batch.old_log_probs[r];
                adv(k, 0) = batch.advantages[r];
            }

            ad::Tape t;
            MlpVars trunk_vars = lift(t, p.trunk);
            ad::Var log_std_var = p.family == ActionFamily::kGaussian
                                      ? ad::constant(t, p.log_std)
                                      : ad::constant(t, Matrix::Zero(1, 1));
            ad::Var lp = log_prob_graph(t, trunk_vars, log_std_var, p, xs, as);
            ad::Var ratio = ad::exp_op(ad::sub(lp, ad::constant(t, old_lp)));
            ad::Var adv_var = ad::constant(t, adv);
            ad::Var clipped = ad::clamp(ratio, 1.0 - cfg.epsilon_clip, 1.0 + cfg.epsilon_clip);
            ad::Var surr =
                ad::mean(ad::min_op(ad::mul(ratio, adv_var), ad::mul(clipped, adv_var)));
            ad::Var loss = ad::neg(surr);

            std::vector<ad::Var> param_vars = trunk_vars.all();
            if (p.family == ActionFamily::kGaussian) param_vars.push_back(log_std_var);
            TensorList g = grads_of(t, loss, param_vars);
            clip_global_norm(g, 0.5);

            TensorList params = policy_tensors(p);
            adam_step(opt, params, g);
            set_policy_tensors(p, params);
            clamp_log_std(p);
        }
    }
    return surrogate_value(p, batch, cfg.epsilon_clip);
}

}  // namespace movac
