#include "movac/weight_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace movac {

namespace {

constexpr double kInfinitePriority = std::numeric_limits<double>::infinity();

bool contains_weight(const std::vector<Vector>& ws, const Vector& w) {
    return std::any_of(ws.begin(), ws.end(), [&](const Vector& x) { return almost_equal(x, w); });
}

// Enumerates k-subsets of {0..n-1} in lexicographic order.
class Combinations {
  public:
    Combinations(int n, int k) : n_(n), k_(k), idx_(k) {
        for (int i = 0; i < k; ++i) idx_[i] = i;
        done_ = k > n;
    }
    [[nodiscard]] bool done() const { return done_; }
    [[nodiscard]] const std::vector<int>& current() const { return idx_; }
    void next() {
        int i = k_ - 1;
        while (i >= 0 && idx_[i] == n_ - k_ + i) --i;
        if (i < 0) {
            done_ = true;
            return;
        }
        ++idx_[i];
        for (int j = i + 1; j < k_; ++j) idx_[j] = idx_[j - 1] + 1;
    }

  private:
    int n_, k_;
    std::vector<int> idx_;
    bool done_;
};

}  // namespace

bool is_simplex_weight(const Vector& w, double tol) {
    if (w.size() == 0) return false;
    if (w.minCoeff() < -tol) return false;
    return std::abs(w.sum() - 1.0) <= tol;
}

Vector simplex_project(Vector w) {
    for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = std::max(0.0, w[i]);
    const double s = w.sum();
    if (s <= 0.0) throw NumericError("simplex_project: vector has no positive mass");
    return w / s;
}

std::vector<Vector> extreme_weights(int dims) {
    if (dims < 1) throw DimensionError("extreme_weights: need at least one dimension");
    std::vector<Vector> out;
    out.reserve(static_cast<std::size_t>(dims));
    for (int k = 0; k < dims; ++k) {
        Vector e = Vector::Zero(dims);
        e[k] = 1.0;
        out.push_back(std::move(e));
    }
    return out;
}

bool almost_equal(const Vector& a, const Vector& b, double tol) {
    if (a.size() != b.size()) return false;
    return (a - b).cwiseAbs().maxCoeff() <= tol;
}

bool lex_greater(const Vector& a, const Vector& b) {
    for (Eigen::Index i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return a.size() > b.size();
}

double scalarize(const Vector& w, const Vector& v) {
    if (w.size() != v.size())
        throw DimensionError("scalarize: weight and value lengths differ");
    return w.dot(v);
}

std::pair<double, std::size_t> max_scalarized(const std::vector<UndominatedSet::Member>& members,
                                              const Vector& w) {
    if (members.empty()) throw EmptySetError("max_scalarized: empty set");
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        const double s = scalarize(w, members[i].value);
        if (s > best) {
            best = s;
            arg = i;
        }
    }
    return {best, arg};
}

std::pair<double, std::size_t> max_scalarized(const UndominatedSet& s, const Vector& w) {
    return max_scalarized(s.members, w);
}

std::vector<Vector> marginal_weights(const UndominatedSet& s) {
    if (s.empty()) throw EmptySetError("marginal_weights: empty set");
    const int dims = s.dims();
    if (dims < 2 || dims > 5)
        throw DimensionError("marginal_weights: supported for 2..5 objectives");

    // Constraint pool on w: member-pair ties (v_a - v_b)·w = 0 and simplex
    // facets w_k = 0. A corner activates dims-1 of these plus 1·w = 1.
    struct Row {
        Vector normal;
        int pair_a = -1;  // members tied by this row, -1 for facets
        int pair_b = -1;
    };
    std::vector<Row> pool;
    const auto& members = s.members;
    for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
            Vector n = members[a].value - members[b].value;
            if (n.cwiseAbs().maxCoeff() < 1e-12) continue;  // duplicate members
            pool.push_back({std::move(n), static_cast<int>(a), static_cast<int>(b)});
        }
    }
    for (int k = 0; k < dims; ++k) {
        Vector n = Vector::Zero(dims);
        n[k] = 1.0;
        pool.push_back({std::move(n), -1, -1});
    }

    std::vector<Vector> corners = extreme_weights(dims);

    Matrix A(dims, dims);
    Vector b = Vector::Zero(dims);
    b[dims - 1] = 1.0;
    for (Combinations combo(static_cast<int>(pool.size()), dims - 1); !combo.done(); combo.next()) {
        const auto& idx = combo.current();
        for (int r = 0; r < dims - 1; ++r) A.row(r) = pool[idx[r]].normal.transpose();
        A.row(dims - 1).setOnes();

        Eigen::FullPivLU<Matrix> lu(A);
        if (!lu.isInvertible()) continue;
        Vector w = lu.solve(b);

        if (w.minCoeff() < -1e-9) continue;
        w = w.cwiseMax(0.0);
        w /= w.sum();

        // Keep only corners of the upper envelope: every tied pair must
        // achieve the surface maximum at w.
        const double vmax = max_scalarized(members, w).first;
        const double tol = 1e-9 * std::max(1.0, std::abs(vmax));
        bool on_surface = true;
        for (int r = 0; r < dims - 1 && on_surface; ++r) {
            const Row& row = pool[idx[r]];
            if (row.pair_a < 0) continue;
            on_surface = scalarize(w, members[row.pair_a].value) >= vmax - tol &&
                         scalarize(w, members[row.pair_b].value) >= vmax - tol;
        }
        if (on_surface && !contains_weight(corners, w)) corners.push_back(std::move(w));
    }

    std::sort(corners.begin(), corners.end(), lex_greater);
    return corners;
}

OptimisticBound::OptimisticBound(const std::vector<UndominatedSet::Explored>& explored,
                                 double eps) {
    if (explored.empty())
        throw ContractError("optimistic bound: explored weights must be seeded first");
    dims_ = static_cast<int>(explored.front().weight.size());

    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    for (const auto& e : explored) {
        if (e.weight.size() != dims_)
            throw DimensionError("optimistic bound: inconsistent weight lengths");
        umin = std::min(umin, e.payoff);
        umax = std::max(umax, e.payoff);
    }
    // Per-coordinate caps derived from the observed payoff range. The region
    // is unbounded below, which never helps a simplex-weight objective, so no
    // lower caps are added; they could cut off admissible value vectors.
    const double pad = 0.1 * (umax - umin + 1.0);
    const double hi = umax + eps + pad;

    std::vector<Vector> normals;
    std::vector<double> rhs;
    for (const auto& e : explored) {
        normals.push_back(e.weight);
        rhs.push_back(e.payoff + eps);
    }
    for (int k = 0; k < dims_; ++k) {
        Vector up = Vector::Zero(dims_);
        up[k] = 1.0;
        normals.push_back(up);
        rhs.push_back(hi);
    }

    const int m = static_cast<int>(normals.size());
    Matrix A(dims_, dims_);
    Vector b(dims_);
    for (Combinations combo(m, dims_); !combo.done(); combo.next()) {
        const auto& idx = combo.current();
        for (int r = 0; r < dims_; ++r) {
            A.row(r) = normals[idx[r]].transpose();
            b[r] = rhs[idx[r]];
        }
        Eigen::FullPivLU<Matrix> lu(A);
        if (!lu.isInvertible()) continue;
        Vector v = lu.solve(b);

        bool feasible = true;
        for (int r = 0; r < m && feasible; ++r) {
            feasible = normals[r].dot(v) <= rhs[r] + 1e-7 * (1.0 + std::abs(rhs[r]));
        }
        if (feasible && !contains_weight(vertices_, v)) vertices_.push_back(std::move(v));
    }
    if (vertices_.empty())
        throw InconsistencyError("optimistic bound: explored payoffs admit no value vector");
}

double OptimisticBound::at(const Vector& w) const {
    if (w.size() != dims_) throw DimensionError("optimistic bound: weight length mismatch");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices_) best = std::max(best, w.dot(v));
    return best;
}

double optimistic_upper_bound(const std::vector<UndominatedSet::Explored>& explored,
                              const Vector& w, double eps) {
    return OptimisticBound(explored, eps).at(w);
}

double relative_improvement(double v_ub, double v_s) {
    if (v_ub == 0.0)
        throw NumericError("relative_improvement: zero upper bound");
    return (v_ub - v_s) / v_ub;
}

namespace {

struct QueueEntry {
    Vector weight;
    double priority;
};

bool member_known(const std::vector<UndominatedSet::Member>& members, const Vector& v) {
    return std::any_of(members.begin(), members.end(),
                       [&](const auto& m) { return almost_equal(m.value, v); });
}

}  // namespace

AolsResult aols(const EvaluateFn& evaluate, int dims, double eps, int max_iters) {
    if (dims < 1) throw DimensionError("aols: need at least one objective");
    if (eps <= 0.0) throw ContractError("aols: eps must be positive");

    AolsResult res;
    std::vector<QueueEntry> queue;
    for (auto& e : extreme_weights(dims)) queue.push_back({std::move(e), kInfinitePriority});

    auto& members = res.us.members;
    auto& explored = res.us.explored;
    std::vector<Vector> corners;  // current marginal weights

    auto surface_at = [&](const Vector& w) { return max_scalarized(members, w).first; };

    // Payoffs may lag behind the growing set; keeping them at the current
    // surface value preserves optimism of the bound.
    auto refresh = [&]() {
        if (members.empty()) return;
        for (auto& e : explored) e.payoff = std::max(e.payoff, surface_at(e.weight));
        if (explored.empty()) return;
        OptimisticBound bound(explored, eps);
        for (auto& q : queue) {
            if (std::isinf(q.priority)) continue;
            q.priority = bound.at(q.weight) - surface_at(q.weight);
        }
        std::erase_if(queue, [&](const QueueEntry& q) {
            if (std::isinf(q.priority)) return false;
            if (q.priority <= eps) return true;
            return std::any_of(explored.begin(), explored.end(),
                               [&](const auto& e) { return almost_equal(e.weight, q.weight); });
        });
    };

    while (true) {
        refresh();
        if (queue.empty()) break;
        if (res.iterations >= max_iters) {
            res.timed_out = true;
            break;
        }
        auto top = std::max_element(queue.begin(), queue.end(),
                                    [](const QueueEntry& a, const QueueEntry& b) {
                                        return a.priority < b.priority;
                                    });
        Vector w = top->weight;
        queue.erase(top);
        ++res.iterations;

        auto [v, payoff] = evaluate(w);
        if (static_cast<int>(v.size()) != dims)
            throw DimensionError("aols: evaluator returned wrong value length");
        explored.push_back({w, payoff});

        if (!member_known(members, v)) {
            members.push_back({v, "v" + std::to_string(members.size())});
            corners = dims >= 2 ? marginal_weights(res.us) : extreme_weights(1);
            for (const auto& mw : corners) {
                const bool seen =
                    std::any_of(explored.begin(), explored.end(),
                                [&](const auto& e) { return almost_equal(e.weight, mw); }) ||
                    std::any_of(queue.begin(), queue.end(),
                                [&](const auto& q) { return almost_equal(q.weight, mw); });
                if (!seen) queue.push_back({mw, 0.0});
            }
            refresh();
        }

        const bool seeding = std::any_of(queue.begin(), queue.end(),
                                         [](const QueueEntry& q) { return std::isinf(q.priority); });
        if (!seeding) {
            double dmax = 0.0;
            for (const auto& q : queue) dmax = std::max(dmax, q.priority);
            res.delta_trace.push_back(dmax);
        }
    }

    res.delta_max = 0.0;
    for (const auto& q : queue)
        if (!std::isinf(q.priority)) res.delta_max = std::max(res.delta_max, q.priority);
    res.marginal_weights = members.empty()
                               ? extreme_weights(dims)
                               : (dims >= 2 ? marginal_weights(res.us) : extreme_weights(1));
    return res;
}

EvaluateFn lookup_evaluator(std::vector<Vector> candidates) {
    if (candidates.empty()) throw EmptySetError("lookup_evaluator: no candidates");
    return [cands = std::move(candidates)](const Vector& w) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            const double s = scalarize(w, cands[i]);
            if (s > best) {
                best = s;
                arg = i;
            }
        }
        return std::make_pair(cands[arg], best);
    };
}

std::vector<Vector> simplex_grid(int dims, int grid_points) {
    if (grid_points < 2) throw ContractError("simplex_grid: need at least 2 grid points");
    if (dims != 2 && dims != 3) throw DimensionError("simplex_grid: supported for 2 or 3 dims");
    const int n = grid_points - 1;
    std::vector<Vector> grid;
    if (dims == 2) {
        for (int a = 0; a <= n; ++a) {
            Vector w(2);
            w << static_cast<double>(a) / n, static_cast<double>(n - a) / n;
            grid.push_back(std::move(w));
        }
    } else {
        for (int a = 0; a <= n; ++a) {
            for (int b = 0; b <= n - a; ++b) {
                Vector w(3);
                w << static_cast<double>(a) / n, static_cast<double>(b) / n,
                    static_cast<double>(n - a - b) / n;
                grid.push_back(std::move(w));
            }
        }
    }
    return grid;
}

UndominatedSet brute_force_us(const std::vector<Vector>& candidates, int grid_points) {
    if (candidates.empty()) throw EmptySetError("brute_force_us: no candidates");
    const int dims = static_cast<int>(candidates.front().size());
    for (const auto& c : candidates)
        if (static_cast<int>(c.size()) != dims)
            throw DimensionError("brute_force_us: inconsistent candidate lengths");

    std::vector<bool> winner(candidates.size(), false);
    for (const auto& w : simplex_grid(dims, grid_points)) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double s = w.dot(candidates[i]);
            if (s > best) {
                best = s;
                arg = i;
            }
        }
        winner[arg] = true;
    }

    UndominatedSet us;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (winner[i]) us.members.push_back({candidates[i], "cand" + std::to_string(i)});
    }
    return us;
}

std::string undominated_set_to_json(const UndominatedSet& s) {
    nlohmann::json j;
    j["members"] = nlohmann::json::array();
    for (const auto& m : s.members) {
        std::vector<double> v(m.value.data(), m.value.data() + m.value.size());
        j["members"].push_back(v);
    }
    j["explored"] = nlohmann::json::array();
    for (const auto& e : s.explored) {
        std::vector<double> w(e.weight.data(), e.weight.data() + e.weight.size());
        j["explored"].push_back({{"w", w}, {"u", e.payoff}});
    }
    return j.dump(2);
}

UndominatedSet undominated_set_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    UndominatedSet us;
    const nlohmann::json& members = j.is_array() ? j : j.at("members");
    if (!members.is_array()) throw ConfigError("undominated set JSON: members must be an array");
    std::size_t idx = 0;
    for (const auto& row : members) {
        std::vector<double> vals = row.get<std::vector<double>>();
        Vector v = Eigen::Map<Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
        us.members.push_back({std::move(v), "m" + std::to_string(idx++)});
    }
    if (j.is_object() && j.contains("explored")) {
        for (const auto& e : j["explored"]) {
            std::vector<double> ws = e.at("w").get<std::vector<double>>();
            Vector w = Eigen::Map<Vector>(ws.data(), static_cast<Eigen::Index>(ws.size()));
            us.explored.push_back({std::move(w), e.at("u").get<double>()});
        }
    }
    return us;
}

}  // namespace movac
