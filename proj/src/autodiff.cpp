#include "movac/autodiff.hpp"

#include <cmath>
#include <utility>

namespace movac::ad {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError(std::string(op) + ": operand shapes differ");
}

void check_same_tape(const Var& a, const Var& b, const char* op) {
    if (a.tape() != b.tape())
        throw ContractError(std::string(op) + ": operands on different tapes");
}

}  // namespace

const Matrix& Var::value() const {
    if (tape_ == nullptr) throw ContractError("Var: unbound handle");
    return tape_->value_at(index_);
}

const Matrix& Var::grad() const {
    if (tape_ == nullptr) throw ContractError("Var: unbound handle");
    return tape_->grad_at(index_);
}

Var Tape::make(Matrix value) {
    Node n;
    n.grad = Matrix::Zero(value.rows(), value.cols());
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return {this, static_cast<int>(nodes_.size()) - 1};
}

void Tape::set_backprop(int index, std::function<void(Tape&)> backprop) {
    nodes_[static_cast<std::size_t>(index)].backprop = std::move(backprop);
}

void Tape::backward(const Var& loss) {
    if (loss.tape() != this) throw ContractError("backward: loss from another tape");
    if (loss.rows() != 1 || loss.cols() != 1)
        throw ContractError("backward: loss must be a 1x1 scalar");
    for (auto& n : nodes_) n.grad.setZero();
    nodes_[static_cast<std::size_t>(loss.index())].grad(0, 0) = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].backprop) nodes_[i].backprop(*this);
    }
}

Var constant(Tape& t, Matrix value) { return t.make(std::move(value)); }

Var matmul(Var a, Var b) {
    check_same_tape(a, b, "matmul");
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    Tape& t = *a.tape();
    Var out = t.make(a.value() * b.value());
    const int ia = a.index(), ib = b.index(), io = out.index();
    t.set_backprop(io, [ia, ib, io](Tape& tp) {
        const Matrix& g = tp.grad_at(io);
        tp.grad_at(ia).noalias() += g * tp.value_at(ib).transpose();
        tp.grad_at(ib).noalias() += tp.value_at(ia).transpose() * g;
    });
    return out;
}

Var add(Var a, Var b) {
    check_same_tape(a, b, "add");
    check_same_shape(a, b, "add");
    Tape& t = *a.tape();
    Var out = t.make(a.value() + b.value());
    const int ia = a.index(), ib = b.index(), io = out.index();
    t.set_backprop(io, [ia, ib, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io);
        tp.grad_at(ib) += tp.grad_at(io);
    });
    return out;
}

Var sub(Var a, Var b) {
    check_same_tape(a, b, "sub");
    check_same_shape(a, b, "sub");
    Tape& t = *a.tape();
    Var out = t.make(a.value() - b.value());
    const int ia = a.index(), ib = b.index(), io = out.index();
    t.set_backprop(io, [ia, ib, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io);
        tp.grad_at(ib) -= tp.grad_at(io);
    });
    return out;
}

Var mul(Var a, Var b) {
    check_same_tape(a, b, "mul");
    check_same_shape(a, b, "mul");
    Tape& t = *a.tape();
    Var out = t.make(a.value().cwiseProduct(b.value()));
    const int ia = a.index(), ib = b.index(), io = out.index();
    t.set_backprop(io, [ia, ib, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io).cwiseProduct(tp.value_at(ib));
        tp.grad_at(ib) += tp.grad_at(io).cwiseProduct(tp.value_at(ia));
    });
    return out;
}

Var scale(Var a, double c) {
    Tape& t = *a.tape();
    Var out = t.make(a.value() * c);
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io, c](Tape& tp) { tp.grad_at(ia) += tp.grad_at(io) * c; });
    return out;
}

Var neg(Var a) { return scale(a, -1.0); }

Var add_const(Var a, double c) {
    Tape& t = *a.tape();
    Var out = t.make(a.value().array() + c);
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io](Tape& tp) { tp.grad_at(ia) += tp.grad_at(io); });
    return out;
}

Var add_rowvec(Var a, Var r) {
    check_same_tape(a, r, "add_rowvec");
    if (r.rows() != 1 || r.cols() != a.cols())
        throw DimensionError("add_rowvec: expected a 1 x cols row vector");
    Tape& t = *a.tape();
    Var out = t.make(a.value().rowwise() + r.value().row(0));
    const int ia = a.index(), ir = r.index(), io = out.index();
    t.set_backprop(io, [ia, ir, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io);
        tp.grad_at(ir).row(0) += tp.grad_at(io).colwise().sum();
    });
    return out;
}

Var mul_rowvec(Var a, Var r) {
    check_same_tape(a, r, "mul_rowvec");
    if (r.rows() != 1 || r.cols() != a.cols())
        throw DimensionError("mul_rowvec: expected a 1 x cols row vector");
    Tape& t = *a.tape();
    Var out = t.make(a.value().array().rowwise() * r.value().row(0).array());
    const int ia = a.index(), ir = r.index(), io = out.index();
    t.set_backprop(io, [ia, ir, io](Tape& tp) {
        tp.grad_at(ia).array() += tp.grad_at(io).array().rowwise() * tp.value_at(ir).row(0).array();
        tp.grad_at(ir).row(0) +=
            tp.grad_at(io).cwiseProduct(tp.value_at(ia)).colwise().sum();
    });
    return out;
}

Var sub_colvec(Var a, Var c) {
    check_same_tape(a, c, "sub_colvec");
    if (c.cols() != 1 || c.rows() != a.rows())
        throw DimensionError("sub_colvec: expected a rows x 1 column vector");
    Tape& t = *a.tape();
    Var out = t.make(a.value().colwise() - c.value().col(0));
    const int ia = a.index(), ic = c.index(), io = out.index();
    t.set_backprop(io, [ia, ic, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io);
        tp.grad_at(ic).col(0) -= tp.grad_at(io).rowwise().sum();
    });
    return out;
}

Var add_scalar(Var a, Var s) {
    check_same_tape(a, s, "add_scalar");
    if (s.rows() != 1 || s.cols() != 1) throw DimensionError("add_scalar: expected a 1x1 scalar");
    Tape& t = *a.tape();
    Var out = t.make(a.value().array() + s.value()(0, 0));
    const int ia = a.index(), is = s.index(), io = out.index();
    t.set_backprop(io, [ia, is, io](Tape& tp) {
        tp.grad_at(ia) += tp.grad_at(io);
        tp.grad_at(is)(0, 0) += tp.grad_at(io).sum();
    });
    return out;
}

Var relu(Var a) {
    Tape& t = *a.tape();
    Var out = t.make(a.value().cwiseMax(0.0));
    const int ia = a.index(), io = out.index();
    // Subgradient at 0 is taken as 0.
    t.set_backprop(io, [ia, io](Tape& tp) {
        tp.grad_at(ia).array() +=
            tp.grad_at(io).array() * (tp.value_at(ia).array() > 0.0).cast<double>();
    });
    return out;
}

Var exp_op(Var a) {
    Tape& t = *a.tape();
    Var out = t.make(a.value().array().exp());
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io](Tape& tp) {
        tp.grad_at(ia).array() += tp.grad_at(io).array() * tp.value_at(io).array();
    });
    return out;
}

Var log_op(Var a) {
    Tape& t = *a.tape();
    Var out = t.make(a.value().array().log());
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io](Tape& tp) {
        tp.grad_at(ia).array() += tp.grad_at(io).array() / tp.value_at(ia).array();
    });
    return out;
}

Var min_op(Var a, Var b) {
    check_same_tape(a, b, "min_op");
    check_same_shape(a, b, "min_op");
    Tape& t = *a.tape();
    Var out = t.make(a.value().cwiseMin(b.value()));
    const int ia = a.index(), ib = b.index(), io = out.index();
    t.set_backprop(io, [ia, ib, io](Tape& tp) {
        const auto take_a = (tp.value_at(ia).array() <= tp.value_at(ib).array()).cast<double>();
        tp.grad_at(ia).array() += tp.grad_at(io).array() * take_a;
        tp.grad_at(ib).array() += tp.grad_at(io).array() * (1.0 - take_a);
    });
    return out;
}

Var clamp(Var a, double lo, double hi) {
    if (lo > hi) throw ContractError("clamp: lo > hi");
    Tape& t = *a.tape();
    Var out = t.make(a.value().cwiseMax(lo).cwiseMin(hi));
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io, lo, hi](Tape& tp) {
        const auto inside = (tp.value_at(ia).array() > lo && tp.value_at(ia).array() < hi)
                                .cast<double>();
        tp.grad_at(ia).array() += tp.grad_at(io).array() * inside;
    });
    return out;
}

Var sum(Var a) {
    Tape& t = *a.tape();
    Matrix s(1, 1);
    s(0, 0) = a.value().sum();
    Var out = t.make(std::move(s));
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io](Tape& tp) {
        tp.grad_at(ia).array() += tp.grad_at(io)(0, 0);
    });
    return out;
}

Var mean(Var a) {
    const double n = static_cast<double>(a.rows() * a.cols());
    return scale(sum(a), 1.0 / n);
}

Var row_sum(Var a) {
    Tape& t = *a.tape();
    Var out = t.make(a.value().rowwise().sum());
    const int ia = a.index(), io = out.index();
    t.set_backprop(io, [ia, io](Tape& tp) {
        tp.grad_at(ia).colwise() += tp.grad_at(io).col(0);
    });
    return out;
}

Var row_logsumexp(Var a) {
    Tape& t = *a.tape();
    const Matrix& x = a.value();
    Matrix out(x.rows(), 1);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double m = x.row(r).maxCoeff();
        out(r, 0) = m + std::log((x.row(r).array() - m).exp().sum());
    }
    Var o = t.make(std::move(out));
    const int ia = a.index(), io = o.index();
    t.set_backprop(io, [ia, io](Tape& tp) {
        const Matrix& x2 = tp.value_at(ia);
        const Matrix& lse = tp.value_at(io);
        // d lse_r / d x_rc = softmax over the row
        tp.grad_at(ia).array() +=
            (x2.array().colwise() - lse.col(0).array()).exp().colwise() *
            tp.grad_at(io).col(0).array();
    });
    return o;
}

Var gather_cols(Var a, std::vector<int> idx) {
    if (static_cast<Eigen::Index>(idx.size()) != a.rows())
        throw DimensionError("gather_cols: one index per row required");
    for (int c : idx)
        if (c < 0 || c >= a.cols()) throw DimensionError("gather_cols: index out of range");
    Tape& t = *a.tape();
    Matrix out(a.rows(), 1);
    for (Eigen::Index r = 0; r < a.rows(); ++r) out(r, 0) = a.value()(r, idx[static_cast<std::size_t>(r)]);
    Var o = t.make(std::move(out));
    const int ia = a.index(), io = o.index();
    t.set_backprop(io, [ia, io, idx = std::move(idx)](Tape& tp) {
        for (Eigen::Index r = 0; r < tp.value_at(io).rows(); ++r)
            tp.grad_at(ia)(r, idx[static_cast<std::size_t>(r)]) += tp.grad_at(io)(r, 0);
    });
    return o;
}

}  // namespace movac::ad
