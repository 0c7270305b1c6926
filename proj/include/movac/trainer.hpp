#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "movac/checkpoint.hpp"
#include "movac/critic.hpp"
#include "movac/env.hpp"
#include "movac/policy.hpp"
#include "movac/run_config.hpp"
#include "movac/weight_geometry.hpp"

// Batch loop: collect rollouts across env copies, split the batch into one
// sequence per objective, and per sequence run AOLS over the running value
// front, refresh the matching correlation-matrix row, take the PPO step and
// refit that objective's critic.
namespace movac {

// Deterministic stream derivation; every random draw in a run is keyed off
// (master seed, purpose, batch, lane).
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t purpose, std::uint64_t a,
                          std::uint64_t b);

namespace streams {
inline constexpr std::uint64_t kEnvReset = 1;
inline constexpr std::uint64_t kActionSampling = 2;
inline constexpr std::uint64_t kPpoShuffle = 3;
inline constexpr std::uint64_t kCriticShuffle = 4;
inline constexpr std::uint64_t kEvalReset = 5;
}  // namespace streams

// Flat env-major layout: row(e, t) = e * horizon + t.
struct RolloutBatch {
    Matrix states;
    Matrix actions;
    Vector log_probs;
    Matrix rewards;  // rows x objectives
    Matrix next_states;
    std::vector<std::uint8_t> terminal;
    std::vector<std::uint8_t> truncated;
    int n_envs = 0;
    int horizon = 0;

    [[nodiscard]] Eigen::Index rows() const { return states.rows(); }
    [[nodiscard]] Eigen::Index row(int env, int t) const {
        return static_cast<Eigen::Index>(env) * horizon + t;
    }
};

struct SequenceReport {
    long batch = 0;
    int sequence = 0;
    int objective = 0;
    Vector w_row_before;
    Vector w_row_after;
    double delta_max = 0.0;   // optimistic slack left inside this AOLS call
    double delta_abs = 0.0;   // front improvement vs the previous sequence
    double delta_r = 0.0;     // delta_abs relative to the upper value
    double v_upper = 0.0;
    double v_surface = 0.0;
    double critic_loss = 0.0;
    double surrogate = 0.0;
    Vector ret_means;         // per-objective mean episode returns in the slice
    bool w_fell_back = false;
};

struct TrainResult {
    long batches_run = 0;
    bool stopped_early = false;
    long stop_batch = -1;
    std::string metrics_path;
    std::string checkpoint_path;
    std::string summary_path;
};

struct EvalReport {
    std::vector<std::string> objectives;
    Vector means;
    Vector stds;
    Vector normalized;  // per-objective means rescaled to [0, 1]
    int episodes = 0;
};

class Trainer {
  public:
    explicit Trainer(TrainConfig cfg);

    RolloutBatch collect_rollouts(long batch_index);

    // Contiguous equal slices along the time axis, slice i -> objective i.
    static std::vector<RolloutBatch> split_sequences(const RolloutBatch& batch, int objectives);

    SequenceReport run_sequence(int objective, const RolloutBatch& sub, long batch_index);

    // Full loop; writes metrics.csv, checkpoint.mvac and summary.json under
    // out_dir. Stops early once the front improvement stays under eps_aols
    // for two consecutive batches.
    using ProgressFn = std::function<void(long batch, double batch_delta)>;
    TrainResult train(const std::string& out_dir, const ProgressFn& progress = {});

    static EvalReport evaluate(const TrainingCheckpoint& ckpt, MomdpEnv& env, int episodes,
                               std::uint64_t eval_seed = 0);

    [[nodiscard]] TrainingCheckpoint checkpoint() const;
    [[nodiscard]] const Matrix& correlation() const { return w_; }
    [[nodiscard]] const PolicyParams& policy() const { return policy_; }
    [[nodiscard]] const std::vector<UndominatedSet>& fronts() const { return fronts_; }
    [[nodiscard]] const TrainConfig& config() const { return cfg_; }
    [[nodiscard]] int objectives() const { return objectives_; }

    static std::string csv_header(int objectives);
    static std::string csv_row(const SequenceReport& r);

    // Undominated per-state value-vector estimates of one slice: discounted
    // per-objective rewards-to-go, Pareto-pruned and capped.
    static std::vector<Vector> value_candidates(const RolloutBatch& sub, double gamma,
                                                int max_candidates = 32);

  private:
    TrainConfig cfg_;
    std::unique_ptr<MomdpEnv> proto_env_;
    int objectives_ = 0;
    PolicyParams policy_;
    CriticEnsemble critics_;
    Matrix w_;
    AdamState actor_opt_;
    // one front per objective: the previous batch's estimate cloud, the
    // reference the next batch's improvement is measured against
    std::vector<UndominatedSet> fronts_;
    long update_count_ = 0;
};

}  // namespace movac
