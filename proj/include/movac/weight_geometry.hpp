#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "movac/types.hpp"

// Geometry of the scalarized upper surface V*_S(w) over the weight simplex:
// undominated sets, marginal weights (corners of the piecewise-linear convex
// envelope), optimistic upper bounds, and the optimistic-linear-support loop.
namespace movac {

// Inner product w·v with a dimension check.
double scalarize(const Vector& w, const Vector& v);

// V*_S(w) and the index of an argmax member; ties break to the lowest index.
std::pair<double, std::size_t> max_scalarized(const UndominatedSet& s, const Vector& w);
std::pair<double, std::size_t> max_scalarized(const std::vector<UndominatedSet::Member>& members,
                                              const Vector& w);

// All simplex corner points of the upper envelope (weights where the argmax
// member changes) plus the extreme points e_1..e_I, deduplicated and sorted
// lexicographically descending. Supports 2..5 objectives.
std::vector<Vector> marginal_weights(const UndominatedSet& s);

// Feasible-vertex view of {v : w'·v <= u + eps for all explored (w', u)}
// intersected with a payoff-derived bounding box. Reused across queries so a
// batch of weights shares one vertex enumeration.
class OptimisticBound {
  public:
    OptimisticBound(const std::vector<UndominatedSet::Explored>& explored, double eps);

    // max w·v over the feasible region.
    [[nodiscard]] double at(const Vector& w) const;

    [[nodiscard]] const std::vector<Vector>& vertices() const { return vertices_; }

  private:
    std::vector<Vector> vertices_;
    int dims_ = 0;
};

double optimistic_upper_bound(const std::vector<UndominatedSet::Explored>& explored,
                              const Vector& w, double eps);

// (v_ub - v_s) / v_ub.
double relative_improvement(double v_ub, double v_s);

// Best response oracle: maps a weight to a value vector and its payoff at
// that weight.
using EvaluateFn = std::function<std::pair<Vector, double>(const Vector&)>;

// Approximate optimistic linear support. Seeds a priority queue with the
// extreme weights at infinite priority, then repeatedly evaluates the queued
// weight with the largest optimistic improvement, inserting new value vectors
// and re-deriving marginal weights, until no queued weight can improve the
// surface by more than eps (or max_iters evaluations have run).
AolsResult aols(const EvaluateFn& evaluate, int dims, double eps, int max_iters = 1000);

// Makes an EvaluateFn that best-responds from a fixed candidate list.
EvaluateFn lookup_evaluator(std::vector<Vector> candidates);

// Uniform grid over the simplex, 2 or 3 dims.
std::vector<Vector> simplex_grid(int dims, int grid_points);

// Grid-scan oracle: argmax candidate at every grid weight, union of winners.
UndominatedSet brute_force_us(const std::vector<Vector>& candidates, int grid_points);

std::string undominated_set_to_json(const UndominatedSet& s);
UndominatedSet undominated_set_from_json(const std::string& text);

}  // namespace movac
