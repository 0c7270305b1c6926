#include "movac/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <thread>

namespace movac {

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t a,
                          std::uint64_t b) {
    // splitmix64 over the combined words
    std::uint64_t x = master;
    for (std::uint64_t word : {purpose, a, b}) {
        x += 0x9e3779b97f4a7c15ULL + word;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        x = z ^ (z >> 31);
    }
    return x;
}

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Deterministic per-env trajectory; safe to run one thread per env copy.
void roll_env(const MomdpEnv& proto, const PolicyParams& policy, const TrainConfig& cfg,
              long batch_index, int env_index, RolloutBatch& out) {
    auto env = proto.clone();
    std::uint64_t resets = 0;
    Vector state = env->reset(stream_seed(cfg.seed, streams::kEnvReset,
                                          static_cast<std::uint64_t>(batch_index),
                                          (static_cast<std::uint64_t>(env_index) << 20) + resets));
    std::mt19937_64 action_rng(stream_seed(cfg.seed, streams::kActionSampling,
                                           static_cast<std::uint64_t>(batch_index),
                                           static_cast<std::uint64_t>(env_index)));
    for (int t = 0; t < cfg.horizon; ++t) {
        const Eigen::Index r = out.row(env_index, t);
        ActionSample sample = sample_action(policy, state, action_rng);
        StepResult res = env->step(sample.action);

        out.states.row(r) = state.transpose();
        out.actions.row(r) = sample.action.transpose();
        out.log_probs[r] = sample.log_prob;
        out.rewards.row(r) = res.reward.transpose();
        out.next_states.row(r) = res.next_state.transpose();
        out.terminal[static_cast<std::size_t>(r)] = res.terminal ? 1 : 0;
        out.truncated[static_cast<std::size_t>(r)] = res.truncated ? 1 : 0;

        if (res.terminal || res.truncated) {
            ++resets;
            state = env->reset(stream_seed(cfg.seed, streams::kEnvReset,
                                           static_cast<std::uint64_t>(batch_index),
                                           (static_cast<std::uint64_t>(env_index) << 20) + resets));
        } else {
            state = res.next_state;
        }
    }
}

}  // namespace

Trainer::Trainer(TrainConfig cfg) : cfg_(std::move(cfg)) {
    validate_train_config(cfg_);
    proto_env_ = make_env(cfg_.env_name, cfg_.env_options);
    const MomdpSpec& spec = proto_env_->spec();
    objectives_ = spec.objectives;
    if (cfg_.horizon % objectives_ != 0)
        throw ConfigError("horizon (" + std::to_string(cfg_.horizon) +
                          ") must divide evenly into " + std::to_string(objectives_) +
                          " sequences");

    const ActionFamily family =
        spec.action.discrete ? ActionFamily::kCategorical : ActionFamily::kGaussian;
    const int action_dim = spec.action.discrete ? spec.action.n : spec.action.dim();
    policy_ = make_policy(spec.state_dim, action_dim, family, cfg_.hidden_actor,
                          stream_seed(cfg_.seed, 10, 0, 0));
    critics_ = make_critic_ensemble(objectives_, spec.state_dim, cfg_.hidden_critic,
                                    cfg_.critic_schedule.base,
                                    stream_seed(cfg_.seed, 11, 0, 0));
    w_ = identity_correlation(objectives_);
    actor_opt_ = make_adam(policy_tensors(policy_), cfg_.actor_schedule.base);
    fronts_.resize(static_cast<std::size_t>(objectives_));
}

RolloutBatch Trainer::collect_rollouts(long batch_index) {
    RolloutBatch batch;
    batch.n_envs = cfg_.n_envs;
    batch.horizon = cfg_.horizon;
    const Eigen::Index rows = static_cast<Eigen::Index>(cfg_.n_envs) * cfg_.horizon;
    const MomdpSpec& spec = proto_env_->spec();
    batch.states = Matrix(rows, spec.state_dim);
    batch.actions = Matrix(rows, policy_.family == ActionFamily::kCategorical ? 1 : policy_.action_dim);
    batch.log_probs = Vector(rows);
    batch.rewards = Matrix(rows, objectives_);
    batch.next_states = Matrix(rows, spec.state_dim);
    batch.terminal.assign(static_cast<std::size_t>(rows), 0);
    batch.truncated.assign(static_cast<std::size_t>(rows), 0);

    if (cfg_.workers <= 0) {
        for (int e = 0; e < cfg_.n_envs; ++e)
            roll_env(*proto_env_, policy_, cfg_, batch_index, e, batch);
        return batch;
    }

    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> faults(static_cast<std::size_t>(cfg_.n_envs));
    std::atomic<int> next{0};
    const int n_threads = std::min(cfg_.workers, cfg_.n_envs);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&] {
            for (int e = next.fetch_add(1); e < cfg_.n_envs; e = next.fetch_add(1)) {
                try {
                    roll_env(*proto_env_, policy_, cfg_, batch_index, e, batch);
                } catch (...) {
                    faults[static_cast<std::size_t>(e)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& f : faults)
        if (f) std::rethrow_exception(f);
    return batch;
}

std::vector<Vector> Trainer::value_candidates(const RolloutBatch& sub, double gamma,
                                              int max_candidates) {
    const Eigen::Index rows = sub.rows();
    const int objectives = static_cast<int>(sub.rewards.cols());

    // discounted per-objective rewards-to-go, segmented at episode ends and
    // taken straight from the batch
    Matrix rtg(rows, objectives);
    for (int e = 0; e < sub.n_envs; ++e) {
        Vector running = Vector::Zero(objectives);
        for (int t = sub.horizon - 1; t >= 0; --t) {
            const Eigen::Index r = sub.row(e, t);
            if (sub.terminal[static_cast<std::size_t>(r)] ||
                sub.truncated[static_cast<std::size_t>(r)])
                running.setZero();
            running = sub.rewards.row(r).transpose() + gamma * running;
            rtg.row(r) = running.transpose();
        }
    }


    // one estimate per episode: the rewards-to-go vector at each episode
    // start measures what the policy actually achieved from there. Episodes
    // cut off by the slice or the horizon carry truncated profiles, so they
    // only count when no episode ran to termination.
    std::vector<Eigen::Index> starts;
    std::vector<Eigen::Index> complete_starts;
    for (int e = 0; e < sub.n_envs; ++e) {
        Eigen::Index episode_start = sub.row(e, 0);
        for (int t = 0; t < sub.horizon; ++t) {
            const Eigen::Index r = sub.row(e, t);
            if (t == 0 || episode_start == r) starts.push_back(r);
            if (sub.terminal[static_cast<std::size_t>(r)] != 0) {
                complete_starts.push_back(episode_start);
                episode_start = r + 1;
            } else if (sub.truncated[static_cast<std::size_t>(r)] != 0) {
                episode_start = r + 1;
            }
        }
    }
    if (!complete_starts.empty()) starts = std::move(complete_starts);

    // keep only Pareto-undominated episode profiles; only they can carry the
    // envelope
    std::vector<Vector> kept;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const Vector v = rtg.row(starts[i]).transpose();
        bool dominated = false;
        for (std::size_t o = 0; o < starts.size() && !dominated; ++o) {
            if (o == i) continue;
            const Vector u = rtg.row(starts[o]).transpose();
            const bool geq = (u.array() >= v.array() - 1e-12).all();
            const bool gt = (u.array() > v.array() + 1e-12).any();
            dominated = geq && (gt || o < i);  // exact duplicates keep the first
        }
        if (dominated) continue;
        bool duplicate = false;
        for (const auto& u : kept) duplicate = duplicate || almost_equal(u, v);
        if (!duplicate) kept.push_back(v);
    }
    std::sort(kept.begin(), kept.end(), lex_greater);

    if (static_cast<int>(kept.size()) > max_candidates) {
        std::vector<Vector> thinned;
        const double stride =
            static_cast<double>(kept.size()) / static_cast<double>(max_candidates);
        for (int k = 0; k < max_candidates; ++k)
            thinned.push_back(kept[static_cast<std::size_t>(k * stride)]);
        kept = std::move(thinned);
    }
    return kept;
}

std::vector<RolloutBatch> Trainer::split_sequences(const RolloutBatch& batch, int objectives) {
    if (objectives < 1) throw DimensionError("split_sequences: need at least one objective");
    if (batch.horizon % objectives != 0)
        throw ConfigError("split_sequences: batch horizon not divisible by objective count");
    const int slice = batch.horizon / objectives;

    std::vector<RolloutBatch> subs;
    for (int i = 0; i < objectives; ++i) {
        RolloutBatch sub;
        sub.n_envs = batch.n_envs;
        sub.horizon = slice;
        const Eigen::Index rows = static_cast<Eigen::Index>(batch.n_envs) * slice;
        sub.states = Matrix(rows, batch.states.cols());
        sub.actions = Matrix(rows, batch.actions.cols());
        sub.log_probs = Vector(rows);
        sub.rewards = Matrix(rows, batch.rewards.cols());
        sub.next_states = Matrix(rows, batch.next_states.cols());
        sub.terminal.assign(static_cast<std::size_t>(rows), 0);
        sub.truncated.assign(static_cast<std::size_t>(rows), 0);
        for (int e = 0; e < batch.n_envs; ++e) {
            for (int t = 0; t < slice; ++t) {
                const Eigen::Index dst = sub.row(e, t);
                const Eigen::Index src = batch.row(e, i * slice + t);
                sub.states.row(dst) = batch.states.row(src);
                sub.actions.row(dst) = batch.actions.row(src);
                sub.log_probs[dst] = batch.log_probs[src];
                sub.rewards.row(dst) = batch.rewards.row(src);
                sub.next_states.row(dst) = batch.next_states.row(src);
                sub.terminal[static_cast<std::size_t>(dst)] =
                    batch.terminal[static_cast<std::size_t>(src)];
                sub.truncated[static_cast<std::size_t>(dst)] =
                    batch.truncated[static_cast<std::size_t>(src)];
            }
        }
        subs.push_back(std::move(sub));
    }
    return subs;
}

SequenceReport Trainer::run_sequence(int objective, const RolloutBatch& sub, long batch_index) {
    if (objective < 0 || objective >= objectives_)
        throw DimensionError("run_sequence: objective index out of range");
    SequenceReport rep;
    rep.batch = batch_index;
    rep.sequence = objective;
    rep.objective = objective;
    rep.w_row_before = w_.row(objective).transpose();

    const Eigen::Index rows = sub.rows();
    const int slice = sub.horizon;

    // (1)-(2) refresh the per-state value-vector estimates and run AOLS over
    // them; the undominated survivors form this sequence's front
    std::vector<Vector> candidates = value_candidates(sub, cfg_.gamma);
    AolsResult aols_out =
        aols(lookup_evaluator(candidates), objectives_, cfg_.eps_aols, cfg_.aols_max_iters);
    rep.delta_max = aols_out.delta_max;

    // (3) movement of the estimated surface against the previous batch's
    // front for this objective, measured with the slack-free bound at the
    // fresh marginal weights; a repeated cloud reports exactly zero
    UndominatedSet& prev_front = fronts_[static_cast<std::size_t>(objective)];
    OptimisticBound tight_bound(aols_out.us.explored, 0.0);
    rep.delta_abs = 0.0;
    rep.v_upper = 0.0;
    rep.v_surface = 0.0;
    if (prev_front.members.empty()) {
        rep.delta_r = 1.0;
        for (const auto& mw : aols_out.marginal_weights) {
            const double ub = tight_bound.at(mw);
            if (ub > rep.v_upper) rep.v_upper = ub;
        }
        rep.delta_abs = std::abs(rep.v_upper);
    } else {
        for (const auto& mw : aols_out.marginal_weights) {
            const double ub = tight_bound.at(mw);
            const double surface = max_scalarized(prev_front.members, mw).first;
            const double d = std::abs(ub - surface);
            if (d > rep.delta_abs) {
                rep.delta_abs = d;
                rep.v_upper = std::max(ub, surface);
                rep.v_surface = std::min(ub, surface);
            }
        }
        rep.delta_r =
            rep.delta_abs == 0.0 ? 0.0 : rep.delta_abs / std::max(std::abs(rep.v_upper), 1e-12);
    }
    prev_front = aols_out.us;

    // (4) refresh row `objective` with the best-evaluated marginal weight
    std::vector<std::pair<Vector, double>> evaluations;
    for (const auto& mw : aols_out.marginal_weights)
        evaluations.emplace_back(mw, max_scalarized(aols_out.us.members, mw).first);
    w_ = update_w_row(w_, objective, aols_out, evaluations, &rep.w_fell_back);
    rep.w_row_after = w_.row(objective).transpose();

    // (5) composite stream for this objective, TD residuals, GAE
    const Vector row_w = w_.row(objective).transpose();
    Vector composite(rows);
    for (Eigen::Index r = 0; r < rows; ++r) composite[r] = row_w.dot(sub.rewards.row(r).transpose());

    const Vector v_state = predict_value_batch(critics_, objective, sub.states, true);
    const Vector v_next_all = predict_value_batch(critics_, objective, sub.next_states, false);

    Vector deltas(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const bool term = sub.terminal[static_cast<std::size_t>(r)] != 0;
        deltas[r] = td_residual(composite[r], term ? 0.0 : v_next_all[r], v_state[r], cfg_.gamma);
    }

    Vector advantages(rows);
    for (int e = 0; e < sub.n_envs; ++e) {
        double running = 0.0;
        for (int t = slice - 1; t >= 0; --t) {
            const Eigen::Index r = sub.row(e, t);
            if (sub.terminal[static_cast<std::size_t>(r)] ||
                sub.truncated[static_cast<std::size_t>(r)])
                running = 0.0;
            running = deltas[r] + cfg_.gamma * cfg_.lambda * running;
            advantages[r] = running;
        }
    }

    // (6) actor first, on advantages from the pre-fit critics
    PpoBatch ppo_batch{sub.states, sub.actions, sub.log_probs, normalize_advantages(advantages)};
    actor_opt_.learning_rate = schedule_rate(cfg_.actor_schedule, update_count_);
    std::mt19937_64 ppo_rng(stream_seed(cfg_.seed, streams::kPpoShuffle,
                                        static_cast<std::uint64_t>(batch_index),
                                        static_cast<std::uint64_t>(objective)));
    rep.surrogate = ppo_clip_update(policy_, ppo_batch,
                                    ClipConfig{cfg_.eps_clip, cfg_.epochs, cfg_.minibatch},
                                    actor_opt_, ppo_rng);

    // (7) composite rewards-to-go with bootstrap at truncation, then the fit
    Vector targets(rows);
    for (int e = 0; e < sub.n_envs; ++e) {
        double running = 0.0;
        bool have_tail = false;
        for (int t = slice - 1; t >= 0; --t) {
            const Eigen::Index r = sub.row(e, t);
            const bool term = sub.terminal[static_cast<std::size_t>(r)] != 0;
            const bool trunc = sub.truncated[static_cast<std::size_t>(r)] != 0;
            if (term) {
                running = 0.0;
            } else if (trunc || !have_tail) {
                running = v_next_all[r];  // horizon cut: bootstrap the suffix
            }
            running = composite[r] + cfg_.gamma * running;
            targets[r] = running;
            have_tail = true;
        }
    }
    Vector normalized = normalize_objective(critics_, objective, targets);
    critics_.optimizers[static_cast<std::size_t>(objective)].learning_rate =
        schedule_rate(cfg_.critic_schedule, update_count_);
    std::mt19937_64 critic_rng(stream_seed(cfg_.seed, streams::kCriticShuffle,
                                           static_cast<std::uint64_t>(batch_index),
                                           static_cast<std::uint64_t>(objective)));
    rep.critic_loss =
        fit_critic(critics_, objective, sub.states, normalized, cfg_.epochs, cfg_.minibatch,
                   critic_rng);
    ++update_count_;

    // per-objective mean episode returns inside this slice
    rep.ret_means = Vector::Zero(objectives_);
    int episodes = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
        rep.ret_means += sub.rewards.row(r).transpose();
        if (sub.terminal[static_cast<std::size_t>(r)]) ++episodes;
    }
    rep.ret_means /= episodes > 0 ? episodes : sub.n_envs;
    return rep;
}

std::string Trainer::csv_header(int objectives) {
    std::string h = "batch,sequence,objective,delta_max,delta_r,critic_loss,surrogate";
    for (int j = 1; j <= objectives; ++j) h += ",ret_mean_" + std::to_string(j);
    for (int i = 1; i <= objectives; ++i)
        for (int j = 1; j <= objectives; ++j)
            h += ",w_" + std::to_string(i) + std::to_string(j);
    return h;
}

std::string Trainer::csv_row(const SequenceReport& r) {
    std::string line = std::to_string(r.batch) + "," + std::to_string(r.sequence) + "," +
                       std::to_string(r.objective) + "," + format_double(r.delta_max) + "," +
                       format_double(r.delta_r) + "," + format_double(r.critic_loss) + "," +
                       format_double(r.surrogate);
    for (Eigen::Index j = 0; j < r.ret_means.size(); ++j)
        line += "," + format_double(r.ret_means[j]);
    return line;
}

TrainingCheckpoint Trainer::checkpoint() const {
    TrainingCheckpoint ckpt;
    ckpt.env_name = cfg_.env_name;
    ckpt.env_options = cfg_.env_options;
    ckpt.master_seed = cfg_.seed;
    ckpt.batches_done = static_cast<std::uint64_t>(update_count_ / std::max(1, objectives_));
    ckpt.policy = policy_;
    ckpt.critics = critics_;
    ckpt.w = w_;
    ckpt.actor_opt = actor_opt_;
    ckpt.fronts = fronts_;
    return ckpt;
}

TrainResult Trainer::train(const std::string& out_dir, const ProgressFn& progress) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    TrainResult result;
    result.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    result.checkpoint_path = (fs::path(out_dir) / "checkpoint.mvac").string();
    result.summary_path = (fs::path(out_dir) / "summary.json").string();

    std::ofstream csv(result.metrics_path, std::ios::trunc);
    if (!csv) throw ConfigError("cannot write metrics CSV: " + result.metrics_path);
    csv << csv_header(objectives_) << "\n";

    save_checkpoint(result.checkpoint_path, checkpoint());

    int streak = 0;
    for (long b = 0; b < cfg_.total_episodes; ++b) {
        RolloutBatch batch = collect_rollouts(b);
        auto subs = split_sequences(batch, objectives_);
        double batch_delta = 0.0;
        for (int i = 0; i < objectives_; ++i) {
            SequenceReport rep = run_sequence(i, subs[static_cast<std::size_t>(i)], b);
            std::string line = csv_row(rep);
            for (Eigen::Index k = 0; k < w_.rows(); ++k)
                for (Eigen::Index j = 0; j < w_.cols(); ++j)
                    line += "," + format_double(w_(k, j));
            csv << line << "\n";
            batch_delta = std::max(batch_delta, rep.delta_abs);
        }
        csv.flush();
        save_checkpoint(result.checkpoint_path, checkpoint());
        ++result.batches_run;
        if (progress) progress(b, batch_delta);

        streak = batch_delta < cfg_.eps_aols ? streak + 1 : 0;
        if (streak >= 2) {
            result.stopped_early = true;
            result.stop_batch = b;
            break;
        }
    }

    std::ofstream summary(result.summary_path, std::ios::trunc);
    summary << "{\n"
            << "  \"env\": \"" << cfg_.env_name << "\",\n"
            << "  \"seed\": " << cfg_.seed << ",\n"
            << "  \"objectives\": " << objectives_ << ",\n"
            << "  \"batches_run\": " << result.batches_run << ",\n"
            << "  \"stopped_early\": " << (result.stopped_early ? "true" : "false") << ",\n"
            << "  \"stop_batch\": " << result.stop_batch << "\n"
            << "}\n";
    return result;
}

EvalReport Trainer::evaluate(const TrainingCheckpoint& ckpt, MomdpEnv& env, int episodes,
                             std::uint64_t eval_seed) {
    const MomdpSpec& spec = env.spec();
    const int expected_dim = spec.action.discrete ? spec.action.n : spec.action.dim();
    if (ckpt.policy.state_dim() != spec.state_dim || ckpt.policy.action_dim != expected_dim ||
        ckpt.critics.objectives() != spec.objectives)
        throw CheckpointError("checkpoint is incompatible with environment '" + spec.name + "'");

    EvalReport rep;
    rep.objectives = spec.objective_names;
    rep.episodes = std::max(0, episodes);
    rep.means = Vector::Zero(spec.objectives);
    rep.stds = Vector::Zero(spec.objectives);
    rep.normalized = Vector::Zero(spec.objectives);
    if (episodes <= 0) return rep;

    Matrix returns(episodes, spec.objectives);
    for (int ep = 0; ep < episodes; ++ep) {
        Vector state = env.reset(stream_seed(eval_seed, streams::kEvalReset,
                                             static_cast<std::uint64_t>(ep), 0));
        Vector total = Vector::Zero(spec.objectives);
        for (int t = 0; t < spec.horizon_cap; ++t) {
            StepResult res = env.step(deterministic_action(ckpt.policy, state));
            total += res.reward;
            state = res.next_state;
            if (res.terminal || res.truncated) break;
        }
        returns.row(ep) = total.transpose();
    }

    rep.means = returns.colwise().mean().transpose();
    for (int j = 0; j < spec.objectives; ++j)
        rep.stds[j] = std::sqrt((returns.col(j).array() - rep.means[j]).square().mean());
    const double lo = rep.means.minCoeff();
    const double hi = rep.means.maxCoeff();
    for (int j = 0; j < spec.objectives; ++j)
        rep.normalized[j] = (rep.means[j] - lo) / (hi - lo + 1e-12);
    return rep;
}

}  // namespace movac
