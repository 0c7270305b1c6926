#pragma once

#include <functional>
#include <vector>

#include "movac/types.hpp"

// Reverse-mode differentiation over dense matrices. A Tape owns the graph;
// ops append nodes in topological order, backward() sweeps it once in
// reverse. Sized for MLP losses, not general graphs.
namespace movac::ad {

class Tape;

class Var {
  public:
    Var() = default;
    Var(Tape* tape, int index) : tape_(tape), index_(index) {}

    [[nodiscard]] const Matrix& value() const;
    [[nodiscard]] const Matrix& grad() const;
    [[nodiscard]] Eigen::Index rows() const { return value().rows(); }
    [[nodiscard]] Eigen::Index cols() const { return value().cols(); }
    [[nodiscard]] Tape* tape() const { return tape_; }
    [[nodiscard]] int index() const { return index_; }

  private:
    Tape* tape_ = nullptr;
    int index_ = -1;
};

class Tape {
  public:
    Var make(Matrix value);
    void set_backprop(int index, std::function<void(Tape&)> backprop);

    Matrix& value_at(int i) { return nodes_[static_cast<std::size_t>(i)].value; }
    Matrix& grad_at(int i) { return nodes_[static_cast<std::size_t>(i)].grad; }

    // Backpropagates from a 1x1 loss node.
    void backward(const Var& loss);

    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Matrix value;
        Matrix grad;
        std::function<void(Tape&)> backprop;
    };
    std::vector<Node> nodes_;
};

Var constant(Tape& t, Matrix value);

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double c);
Var neg(Var a);
Var add_const(Var a, double c);

// Broadcast helpers: r is 1 x cols, c is rows x 1, s is 1 x 1.
Var add_rowvec(Var a, Var r);
Var mul_rowvec(Var a, Var r);
Var sub_colvec(Var a, Var c);
Var add_scalar(Var a, Var s);

Var relu(Var a);
Var exp_op(Var a);
Var log_op(Var a);
Var min_op(Var a, Var b);  // ties follow a
Var clamp(Var a, double lo, double hi);

Var sum(Var a);       // 1 x 1
Var mean(Var a);      // 1 x 1
Var row_sum(Var a);   // rows x 1
Var row_logsumexp(Var a);  // rows x 1, numerically stable
Var gather_cols(Var a, std::vector<int> idx);  // rows x 1: a(r, idx[r])

}  // namespace movac::ad
