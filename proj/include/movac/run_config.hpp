#pragma once

#include <cstdint>
#include <string>

#include "movac/env.hpp"
#include "movac/policy.hpp"

namespace movac {

struct TrainConfig {
    double gamma = 0.99;
    double lambda = 0.95;
    double eps_clip = 0.2;
    double eps_aols = 1e-3;
    int horizon = 200;  // steps collected per env copy per batch
    int n_envs = 4;
    int epochs = 4;
    int minibatch = 64;
    std::uint64_t seed = 0;
    long total_episodes = 50;  // batch budget
    StepsizeSchedule actor_schedule{ScheduleKind::kConstant, 3e-4, 0.0};
    StepsizeSchedule critic_schedule{ScheduleKind::kConstant, 1e-3, 0.0};
    int hidden_actor = 64;
    int hidden_critic = 64;
    int aols_max_iters = 200;
    int workers = 0;  // 0 = deterministic single-worker collection
    std::string env_name = "treasure-grid";
    EnvOptions env_options;
};

struct RunConfig {
    std::string name = "run";
    std::string out_dir = ".";
    std::string log_level = "info";
    TrainConfig train;
};

// Sectioned key-value format: [run] / [env] / [train], '#' comments.
// Errors carry "path:line:" prefixes.
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text, const std::string& path_for_errors);

// Range and schedule checks shared by the CLI and the trainer.
void validate_train_config(const TrainConfig& cfg);

}  // namespace movac
