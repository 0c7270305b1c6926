#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "movac/types.hpp"

// Built-in multi-objective MDPs with vector rewards, plus a tabular
// Pareto-front oracle for the finite ones.
namespace movac {

struct BoxSpace {
    Vector low;
    Vector high;
};

struct ActionSpace {
    bool discrete = false;
    int n = 0;       // discrete action count
    BoxSpace box;    // continuous bounds

    [[nodiscard]] int dim() const { return discrete ? 1 : static_cast<int>(box.low.size()); }
};

struct MomdpSpec {
    std::string name;
    int state_dim = 0;
    ActionSpace action;
    int objectives = 0;
    std::vector<std::string> objective_names;
    int horizon_cap = 0;
    double discount_hint = 0.99;
};

struct StepResult {
    Vector next_state;
    Vector reward;  // one entry per objective
    bool terminal = false;
    bool truncated = false;
};

// Finite-MDP view used by the Pareto oracle.
struct TabularModel {
    struct Transition {
        int next = 0;
        Vector reward;
        bool terminal = false;
    };
    int n_states = 0;
    int n_actions = 0;
    int start = 0;
    int objectives = 0;
    std::vector<std::vector<Transition>> transitions;  // [state][action]
};

class MomdpEnv {
  public:
    virtual ~MomdpEnv() = default;

    [[nodiscard]] virtual const MomdpSpec& spec() const = 0;
    virtual Vector reset(std::uint64_t seed) = 0;
    virtual StepResult step(const Vector& action) = 0;
    [[nodiscard]] virtual std::unique_ptr<MomdpEnv> clone() const = 0;

    // Finite envs expose their model; others return nullopt.
    [[nodiscard]] virtual std::optional<TabularModel> tabular_model() const { return std::nullopt; }

    // Continuous out-of-range actions are clipped and counted here.
    [[nodiscard]] long action_clips() const { return action_clips_; }

  protected:
    long action_clips_ = 0;
};

using EnvOptions = std::map<std::string, std::string>;

// Registered names: "treasure-grid", "point-mass-1d", "linear-quad".
std::unique_ptr<MomdpEnv> make_env(const std::string& name, const EnvOptions& options = {});

// 10 x 11 deterministic grid. Objectives: treasure value collected at
// terminal cells, and a -1 per-step time penalty. Four move actions; moves
// off the grid keep the agent in place.
class TreasureGrid final : public MomdpEnv {
  public:
    struct Treasure {
        int row = 0;
        int col = 0;
        double value = 0.0;
    };

    explicit TreasureGrid(std::vector<Treasure> treasures = default_treasures(),
                          int horizon_cap = 100);

    static std::vector<Treasure> default_treasures();

    [[nodiscard]] const MomdpSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override;
    StepResult step(const Vector& action) override;
    [[nodiscard]] std::unique_ptr<MomdpEnv> clone() const override;
    [[nodiscard]] std::optional<TabularModel> tabular_model() const override;

    static constexpr int kRows = 10;
    static constexpr int kCols = 11;

  private:
    [[nodiscard]] Vector observe() const;
    [[nodiscard]] double treasure_at(int row, int col) const;

    std::vector<Treasure> treasures_;
    MomdpSpec spec_;
    int row_ = 0;
    int col_ = 0;
    int steps_ = 0;
};

// Continuous point mass on a line: state (position, velocity), scalar force
// in [-1, 1]. Objectives: velocity, negated control cost, negated hinge
// impact cost beyond the velocity cap.
class PointMass1D final : public MomdpEnv {
  public:
    explicit PointMass1D(double v_cap = 1.0, double reset_noise = 0.05, int horizon_cap = 200);

    [[nodiscard]] const MomdpSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override;
    StepResult step(const Vector& action) override;
    [[nodiscard]] std::unique_ptr<MomdpEnv> clone() const override;

  private:
    MomdpSpec spec_;
    double v_cap_;
    double reset_noise_;
    double position_ = 0.0;
    double velocity_ = 0.0;
    int steps_ = 0;
};

// Two-dimensional linear dynamics with two negated quadratic objectives
// (state cost, control cost); amenable to a Riccati-style oracle.
class LinearQuad final : public MomdpEnv {
  public:
    explicit LinearQuad(double reset_noise = 0.0, int horizon_cap = 200, double start_x = 0.1);

    [[nodiscard]] const MomdpSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override;
    StepResult step(const Vector& action) override;
    [[nodiscard]] std::unique_ptr<MomdpEnv> clone() const override;

    [[nodiscard]] const Matrix& dynamics() const { return a_; }
    [[nodiscard]] const Matrix& input_map() const { return b_; }
    [[nodiscard]] const Matrix& state_cost() const { return q_; }
    [[nodiscard]] double control_cost() const { return r_; }
    [[nodiscard]] const Vector& start_state() const { return start_; }
    [[nodiscard]] Vector reward_bonus() const {
        Vector b(2);
        b << 0.0, 0.1;
        return b;
    }

  private:
    MomdpSpec spec_;
    Matrix a_, b_, q_;
    double r_;
    Vector start_;
    double reset_noise_;
    Vector state_;
    int steps_ = 0;
};

// Collapses a multi-objective env to a single fixed linear scalarization;
// registered through the "scalarize" env option ("w1:w2:…").
class ScalarizedView final : public MomdpEnv {
  public:
    ScalarizedView(std::unique_ptr<MomdpEnv> inner, Vector weights);

    [[nodiscard]] const MomdpSpec& spec() const override { return spec_; }
    Vector reset(std::uint64_t seed) override { return inner_->reset(seed); }
    StepResult step(const Vector& action) override;
    [[nodiscard]] std::unique_ptr<MomdpEnv> clone() const override;
    [[nodiscard]] std::optional<TabularModel> tabular_model() const override;

  private:
    std::unique_ptr<MomdpEnv> inner_;
    Vector weights_;
    MomdpSpec spec_;
};

// Non-dominated undiscounted-or-discounted return vectors achievable from the
// start state, via Pareto-set value iteration over the tabular model. Caps:
// 120 states, 4 actions.
std::vector<Vector> pareto_oracle(const MomdpEnv& env, double gamma);

}  // namespace movac
