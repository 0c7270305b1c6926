#include "movac/env.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace movac {

namespace {

constexpr double kDt = 0.1;

double parse_double(const EnvOptions& options, const std::string& key, double fallback) {
    auto it = options.find(key);
    if (it == options.end()) return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size()) throw std::invalid_argument(it->second);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("env option '" + key + "': not a number: " + it->second);
    }
}

int parse_int(const EnvOptions& options, const std::string& key, int fallback) {
    const double v = parse_double(options, key, fallback);
    if (v != std::floor(v)) throw ConfigError("env option '" + key + "': expected an integer");
    return static_cast<int>(v);
}

// "row:col:value,row:col:value,…"
std::vector<TreasureGrid::Treasure> parse_treasures(const std::string& text) {
    std::vector<TreasureGrid::Treasure> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        TreasureGrid::Treasure t;
        if (std::sscanf(item.c_str(), "%d:%d:%lf", &t.row, &t.col, &t.value) != 3)
            throw ConfigError("treasures: expected row:col:value, got '" + item + "'");
        out.push_back(t);
    }
    if (out.empty()) throw ConfigError("treasures: empty list");
    return out;
}

bool pareto_dominates(const Vector& a, const Vector& b) {
    bool strict = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - 1e-12) return false;
        if (a[i] > b[i] + 1e-12) strict = true;
    }
    return strict;
}

void pareto_prune(std::vector<Vector>& set) {
    std::vector<Vector> kept;
    for (const auto& v : set) {
        bool dominated = false;
        for (const auto& u : set) {
            if (&u == &v) continue;
            if (pareto_dominates(u, v)) {
                dominated = true;
                break;
            }
        }
        if (dominated) continue;
        bool duplicate = false;
        for (const auto& u : kept) duplicate = duplicate || almost_equal(u, v);
        if (!duplicate) kept.push_back(v);
    }
    set = std::move(kept);
}

}  // namespace

// --- TreasureGrid ---

std::vector<TreasureGrid::Treasure> TreasureGrid::default_treasures() {
    return {{1, 0, 0.7},  {2, 1, 8.2},  {3, 2, 11.5}, {4, 3, 14.0}, {5, 4, 15.1},
            {6, 5, 16.1}, {7, 6, 19.6}, {8, 7, 20.3}, {9, 8, 22.4}, {9, 10, 23.7}};
}

TreasureGrid::TreasureGrid(std::vector<Treasure> treasures, int horizon_cap)
    : treasures_(std::move(treasures)) {
    for (const auto& t : treasures_) {
        if (t.row < 0 || t.row >= kRows || t.col < 0 || t.col >= kCols)
            throw ConfigError("treasure-grid: treasure outside the grid");
        if (t.row == 0 && t.col == 0)
            throw ConfigError("treasure-grid: treasure on the start cell");
    }
    spec_.name = "treasure-grid";
    spec_.state_dim = 2;
    spec_.action.discrete = true;
    spec_.action.n = 4;
    spec_.objectives = 2;
    spec_.objective_names = {"treasure", "time"};
    spec_.horizon_cap = horizon_cap;
    spec_.discount_hint = 0.99;
    if (horizon_cap < 1) throw ConfigError("treasure-grid: horizon must be positive");
}

Vector TreasureGrid::observe() const {
    Vector s(2);
    s << static_cast<double>(row_) / (kRows - 1), static_cast<double>(col_) / (kCols - 1);
    return s;
}

double TreasureGrid::treasure_at(int row, int col) const {
    for (const auto& t : treasures_)
        if (t.row == row && t.col == col) return t.value;
    return 0.0;
}

Vector TreasureGrid::reset(std::uint64_t) {
    row_ = 0;
    col_ = 0;
    steps_ = 0;
    return observe();
}

StepResult TreasureGrid::step(const Vector& action) {
    if (action.size() != 1) throw DimensionError("treasure-grid: expected one action entry");
    const int a = static_cast<int>(std::lround(action[0]));
    if (a < 0 || a >= 4) throw ContractError("treasure-grid: action index out of range");

    int nr = row_, nc = col_;
    if (a == 0) nr -= 1;
    if (a == 1) nr += 1;
    if (a == 2) nc -= 1;
    if (a == 3) nc += 1;
    if (nr < 0 || nr >= kRows || nc < 0 || nc >= kCols) {
        nr = row_;
        nc = col_;
    }
    row_ = nr;
    col_ = nc;
    ++steps_;

    StepResult out;
    const double value = treasure_at(row_, col_);
    out.reward = Vector(2);
    out.reward << value, -1.0;
    out.terminal = value != 0.0;
    out.truncated = !out.terminal && steps_ >= spec_.horizon_cap;
    out.next_state = observe();
    return out;
}

std::unique_ptr<MomdpEnv> TreasureGrid::clone() const {
    return std::make_unique<TreasureGrid>(*this);
}

std::optional<TabularModel> TreasureGrid::tabular_model() const {
    TabularModel m;
    m.n_states = kRows * kCols;
    m.n_actions = 4;
    m.start = 0;
    m.objectives = 2;
    m.transitions.resize(static_cast<std::size_t>(m.n_states));
    for (int r = 0; r < kRows; ++r) {
        for (int c = 0; c < kCols; ++c) {
            auto& row = m.transitions[static_cast<std::size_t>(r * kCols + c)];
            row.resize(4);
            for (int a = 0; a < 4; ++a) {
                int nr = r, nc = c;
                if (a == 0) nr -= 1;
                if (a == 1) nr += 1;
                if (a == 2) nc -= 1;
                if (a == 3) nc += 1;
                if (nr < 0 || nr >= kRows || nc < 0 || nc >= kCols) {
                    nr = r;
                    nc = c;
                }
                TabularModel::Transition t;
                t.next = nr * kCols + nc;
                t.reward = Vector(2);
                const double value = treasure_at(nr, nc);
                t.reward << value, -1.0;
                t.terminal = value != 0.0;
                row[static_cast<std::size_t>(a)] = std::move(t);
            }
        }
    }
    return m;
}

// --- PointMass1D ---

PointMass1D::PointMass1D(double v_cap, double reset_noise, int horizon_cap)
    : v_cap_(v_cap), reset_noise_(reset_noise) {
    if (v_cap <= 0.0) throw ConfigError("point-mass-1d: v_cap must be positive");
    if (horizon_cap < 1) throw ConfigError("point-mass-1d: horizon must be positive");
    spec_.name = "point-mass-1d";
    spec_.state_dim = 2;
    spec_.action.discrete = false;
    spec_.action.box.low = Vector::Constant(1, -1.0);
    spec_.action.box.high = Vector::Constant(1, 1.0);
    spec_.objectives = 3;
    spec_.objective_names = {"velocity", "control-cost", "impact-cost"};
    spec_.horizon_cap = horizon_cap;
    spec_.discount_hint = 0.99;
}

Vector PointMass1D::reset(std::uint64_t seed) {
    position_ = 0.0;
    velocity_ = 0.0;
    steps_ = 0;
    if (reset_noise_ > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> noise(-reset_noise_, reset_noise_);
        position_ = noise(rng);
        velocity_ = noise(rng);
    }
    Vector s(2);
    s << position_, velocity_;
    return s;
}

StepResult PointMass1D::step(const Vector& action) {
    if (action.size() != 1) throw DimensionError("point-mass-1d: expected one action entry");
    double a = action[0];
    if (a < -1.0 || a > 1.0) {
        ++action_clips_;
        a = std::clamp(a, -1.0, 1.0);
    }
    velocity_ += kDt * a;
    position_ += kDt * velocity_;
    ++steps_;

    StepResult out;
    out.reward = Vector(3);
    const double overshoot = std::max(0.0, std::abs(velocity_) - v_cap_);
    out.reward << velocity_, -a * a, -overshoot * overshoot;
    out.terminal = false;
    out.truncated = steps_ >= spec_.horizon_cap;
    out.next_state = Vector(2);
    out.next_state << position_, velocity_;
    return out;
}

std::unique_ptr<MomdpEnv> PointMass1D::clone() const {
    return std::make_unique<PointMass1D>(*this);
}

// --- LinearQuad ---

LinearQuad::LinearQuad(double reset_noise, int horizon_cap, double start_x)
    : reset_noise_(reset_noise) {
    if (horizon_cap < 1) throw ConfigError("linear-quad: horizon must be positive");
    a_ = Matrix(2, 2);
    a_ << 1.0, kDt, 0.0, 1.0;
    b_ = Matrix(2, 1);
    b_ << 0.0, kDt;
    q_ = Matrix(2, 2);
    q_ << 1.0, 0.0, 0.0, 0.1;
    r_ = 0.1;
    start_ = Vector(2);
    start_ << start_x, 0.0;
    state_ = start_;

    spec_.name = "linear-quad";
    spec_.state_dim = 2;
    spec_.action.discrete = false;
    spec_.action.box.low = Vector::Constant(1, -3.0);
    spec_.action.box.high = Vector::Constant(1, 3.0);
    spec_.objectives = 2;
    spec_.objective_names = {"state-cost", "control-cost"};
    spec_.horizon_cap = horizon_cap;
    spec_.discount_hint = 0.99;
}

Vector LinearQuad::reset(std::uint64_t seed) {
    state_ = start_;
    steps_ = 0;
    if (reset_noise_ > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> noise(-reset_noise_, reset_noise_);
        state_[0] += noise(rng);
        state_[1] += noise(rng);
    }
    return state_;
}

StepResult LinearQuad::step(const Vector& action) {
    if (action.size() != 1) throw DimensionError("linear-quad: expected one action entry");
    double a = action[0];
    if (a < -3.0 || a > 3.0) {
        ++action_clips_;
        a = std::clamp(a, -3.0, 3.0);
    }

    StepResult out;
    out.reward = Vector(2);
    // the control objective carries a constant bonus: it keeps that value
    // away from zero for relative oracle comparisons, and it makes the
    // control corner the stable scalarization from the first batch on
    const Vector bonus = reward_bonus();
    out.reward << bonus[0] - state_.dot(q_ * state_), bonus[1] - r_ * a * a;

    state_ = a_ * state_ + b_.col(0) * a;
    ++steps_;
    out.terminal = false;
    out.truncated = steps_ >= spec_.horizon_cap;
    out.next_state = state_;
    return out;
}

std::unique_ptr<MomdpEnv> LinearQuad::clone() const {
    return std::make_unique<LinearQuad>(*this);
}

// --- scalarized view ---

ScalarizedView::ScalarizedView(std::unique_ptr<MomdpEnv> inner, Vector weights)
    : inner_(std::move(inner)), weights_(std::move(weights)) {
    if (weights_.size() != inner_->spec().objectives)
        throw ConfigError("scalarize: weight count does not match the objective count");
    if (!is_simplex_weight(weights_, 1e-6))
        throw ConfigError("scalarize: weights must be non-negative and sum to 1");
    spec_ = inner_->spec();
    spec_.objectives = 1;
    spec_.objective_names = {"scalarized"};
}

StepResult ScalarizedView::step(const Vector& action) {
    StepResult res = inner_->step(action);
    res.reward = Vector::Constant(1, weights_.dot(res.reward));
    return res;
}

std::unique_ptr<MomdpEnv> ScalarizedView::clone() const {
    return std::make_unique<ScalarizedView>(inner_->clone(), weights_);
}

std::optional<TabularModel> ScalarizedView::tabular_model() const {
    auto model = inner_->tabular_model();
    if (!model.has_value()) return std::nullopt;
    model->objectives = 1;
    for (auto& row : model->transitions)
        for (auto& tr : row) tr.reward = Vector::Constant(1, weights_.dot(tr.reward));
    return model;
}

// --- factory ---

namespace {

Vector parse_scalarize(const std::string& text) {
    std::vector<double> entries;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            entries.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("scalarize: expected w1:w2:…, got '" + text + "'");
        }
    }
    if (entries.empty()) throw ConfigError("scalarize: empty weight list");
    return Eigen::Map<Vector>(entries.data(), static_cast<Eigen::Index>(entries.size()));
}

}  // namespace

std::unique_ptr<MomdpEnv> make_env(const std::string& name, const EnvOptions& options) {
    for (const auto& [key, value] : options) {
        (void)value;
        if (key != "treasures" && key != "horizon" && key != "v_cap" && key != "reset_noise" &&
            key != "scalarize" && key != "start_x")
            throw ConfigError("env option '" + key + "' is not recognized");
    }
    std::unique_ptr<MomdpEnv> env;
    if (name == "treasure-grid") {
        auto treasures = options.contains("treasures")
                             ? parse_treasures(options.at("treasures"))
                             : TreasureGrid::default_treasures();
        env = std::make_unique<TreasureGrid>(std::move(treasures),
                                             parse_int(options, "horizon", 100));
    } else if (name == "point-mass-1d") {
        env = std::make_unique<PointMass1D>(parse_double(options, "v_cap", 1.0),
                                            parse_double(options, "reset_noise", 0.05),
                                            parse_int(options, "horizon", 200));
    } else if (name == "linear-quad") {
        env = std::make_unique<LinearQuad>(parse_double(options, "reset_noise", 0.0),
                                           parse_int(options, "horizon", 200));
    } else {
        throw ConfigError("unknown environment '" + name +
                          "' (expected treasure-grid, point-mass-1d or linear-quad)");
    }
    if (options.contains("scalarize"))
        env = std::make_unique<ScalarizedView>(std::move(env),
                                               parse_scalarize(options.at("scalarize")));
    return env;
}

// --- Pareto oracle ---

std::vector<Vector> pareto_oracle(const MomdpEnv& env, double gamma) {
    auto model_opt = env.tabular_model();
    if (!model_opt.has_value())
        throw CapacityError("pareto_oracle: environment is not finite-state finite-action");
    const TabularModel& m = *model_opt;
    if (m.n_states > 120 || m.n_actions > 4)
        throw CapacityError("pareto_oracle: model exceeds the 120-state / 4-action cap");

    const int horizon = env.spec().horizon_cap;
    const Vector zero = Vector::Zero(m.objectives);
    std::vector<std::vector<Vector>> value(static_cast<std::size_t>(m.n_states), {zero});

    for (int t = 0; t < horizon; ++t) {
        std::vector<std::vector<Vector>> next(static_cast<std::size_t>(m.n_states));
        for (int s = 0; s < m.n_states; ++s) {
            std::vector<Vector> pool;
            for (int a = 0; a < m.n_actions; ++a) {
                const auto& tr = m.transitions[static_cast<std::size_t>(s)][static_cast<std::size_t>(a)];
                if (tr.terminal) {
                    pool.push_back(tr.reward);
                    continue;
                }
                for (const auto& v : value[static_cast<std::size_t>(tr.next)])
                    pool.push_back(tr.reward + gamma * v);
            }
            pareto_prune(pool);
            next[static_cast<std::size_t>(s)] = std::move(pool);
        }
        value = std::move(next);
    }

    std::vector<Vector> front = value[static_cast<std::size_t>(m.start)];
    pareto_prune(front);
    std::sort(front.begin(), front.end(), lex_greater);
    return front;
}

}  // namespace movac
