#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "movac/critic.hpp"
#include "movac/policy.hpp"
#include "movac/types.hpp"

// Versioned binary checkpoints. Layout, all little-endian:
//   magic "MVAC", version u32,
//   meta (env name, objective count, state dim, action head, seed, batches),
//   policy head descriptor + trunk tensors,
//   critic tensors, target tensors, correlation matrix,
//   normalizers, Adam states, undominated-set snapshot.
// Tensor blocks are: layer count u32, then per layer rows u32, cols u32,
// row-major f64 weights, f64 biases.
namespace movac {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainingCheckpoint {
    std::string env_name;
    std::map<std::string, std::string> env_options;
    std::uint64_t master_seed = 0;
    std::uint64_t batches_done = 0;
    PolicyParams policy;
    CriticEnsemble critics;
    Matrix w;  // correlation matrix
    AdamState actor_opt;
    std::vector<UndominatedSet> fronts;  // one per objective
};

void write_mlp(std::ostream& out, const MlpParams& p);
MlpParams read_mlp(std::istream& in);

void save_checkpoint(const std::string& path, const TrainingCheckpoint& ckpt);
TrainingCheckpoint load_checkpoint(const std::string& path);

}  // namespace movac
