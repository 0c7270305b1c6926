#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "movac/env.hpp"

// Subcommand bodies behind the CLI binary; split out so tests can drive them
// without spawning processes. Exit codes: 0 success, 2 bad config or input,
// 3 numeric failure at runtime, 4 checkpoint problems.
namespace movac::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitCheckpoint = 4;

struct TrainArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};
int cmd_train(const TrainArgs& args);

struct EvalArgs {
    std::string checkpoint_path;
    std::string env_name;  // empty: use the checkpoint's environment
    int episodes = 10;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};
int cmd_eval(const EvalArgs& args);

struct AolsArgs {
    std::string input_path;  // JSON value-vector list
    double eps = 1e-3;
    std::string out_dir = ".";
};
int cmd_aols(const AolsArgs& args);

struct ExportArgs {
    std::string run_dir;
    std::string what;  // delta-r | w-matrix | returns
};
int cmd_export(const ExportArgs& args);

}  // namespace movac::cli
