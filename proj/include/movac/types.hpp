#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "movac/errors.hpp"

namespace movac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Weights live on the probability simplex: entries >= 0, sum == 1 (tol 1e-9).
inline constexpr double kSimplexTol = 1e-9;
// Weight and value vectors closer than this (L-inf) are treated as equal.
inline constexpr double kDedupTol = 1e-9;

bool is_simplex_weight(const Vector& w, double tol = kSimplexTol);

// Clamps negatives to zero and rescales to unit sum.
Vector simplex_project(Vector w);

// e_1 .. e_I, in index order.
std::vector<Vector> extreme_weights(int dims);

bool almost_equal(const Vector& a, const Vector& b, double tol = kDedupTol);

// Lexicographic descending order; used to report weight sets deterministically.
bool lex_greater(const Vector& a, const Vector& b);

// Value vectors optimal under linear scalarization for at least one weight,
// together with the weights explored while building the set.
struct UndominatedSet {
    struct Member {
        Vector value;
        std::string tag;  // opaque policy tag
    };
    struct Explored {
        Vector weight;
        double payoff = 0.0;  // scalarized value of the member maximal at weight
    };

    std::vector<Member> members;
    std::vector<Explored> explored;

    [[nodiscard]] bool empty() const { return members.empty(); }
    [[nodiscard]] int dims() const {
        return members.empty() ? 0 : static_cast<int>(members.front().value.size());
    }
};

struct AolsResult {
    UndominatedSet us;
    std::vector<Vector> marginal_weights;
    double delta_max = 0.0;  // largest remaining optimistic improvement
    int iterations = 0;
    bool timed_out = false;
    // Max queued improvement after each post-seeding iteration.
    std::vector<double> delta_trace;
};

}  // namespace movac
