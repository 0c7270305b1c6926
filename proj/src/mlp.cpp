#include "movac/mlp.hpp"

#include <cmath>
#include <random>

namespace movac {

int MlpParams::input_dim() const {
    if (layers.empty()) throw ContractError("MlpParams: no layers");
    return static_cast<int>(layers.front().weight.rows());
}

int MlpParams::output_dim() const {
    if (layers.empty()) throw ContractError("MlpParams: no layers");
    return static_cast<int>(layers.back().weight.cols());
}

MlpParams make_mlp(const std::vector<int>& widths, std::uint64_t seed) {
    if (widths.size() < 2) throw ContractError("make_mlp: need input and output widths");
    std::mt19937_64 rng(seed);
    MlpParams p;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        const int fan_in = widths[l];
        const int fan_out = widths[l + 1];
        if (fan_in < 1 || fan_out < 1) throw ContractError("make_mlp: widths must be positive");
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        MlpLayer layer;
        layer.weight = Matrix(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) layer.weight(i, j) = dist(rng);
        layer.bias = Matrix::Zero(1, fan_out);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

Matrix mlp_forward(const MlpParams& p, const Matrix& x) {
    if (p.layers.empty()) throw ContractError("mlp_forward: no layers");
    if (x.cols() != p.layers.front().weight.rows())
        throw DimensionError("mlp_forward: input width mismatch");
    Matrix h = x;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        h = (h * p.layers[l].weight).rowwise() + p.layers[l].bias.row(0);
        if (l + 1 < p.layers.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

Vector mlp_forward(const MlpParams& p, const Vector& x) {
    Matrix row = x.transpose();
    return mlp_forward(p, row).row(0).transpose();
}

TensorList mlp_tensors(const MlpParams& p) {
    TensorList out;
    for (const auto& l : p.layers) {
        out.push_back(l.weight);
        out.push_back(l.bias);
    }
    return out;
}

void set_mlp_tensors(MlpParams& p, const TensorList& tensors) {
    if (tensors.size() != 2 * p.layers.size())
        throw DimensionError("set_mlp_tensors: tensor count mismatch");
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        p.layers[l].weight = tensors[2 * l];
        p.layers[l].bias = tensors[2 * l + 1];
    }
}

std::vector<ad::Var> MlpVars::all() const {
    std::vector<ad::Var> out;
    for (const auto& [w, b] : layers) {
        out.push_back(w);
        out.push_back(b);
    }
    return out;
}

MlpVars lift(ad::Tape& t, const MlpParams& p) {
    MlpVars vars;
    for (const auto& l : p.layers)
        vars.layers.emplace_back(ad::constant(t, l.weight), ad::constant(t, l.bias));
    return vars;
}

ad::Var mlp_forward(ad::Tape& t, const MlpVars& vars, ad::Var x) {
    if (vars.layers.empty()) throw ContractError("mlp_forward: no layers");
    ad::Var h = x;
    for (std::size_t l = 0; l < vars.layers.size(); ++l) {
        h = ad::add_rowvec(ad::matmul(h, vars.layers[l].first), vars.layers[l].second);
        if (l + 1 < vars.layers.size()) h = ad::relu(h);
    }
    (void)t;
    return h;
}

TensorList grads_of(ad::Tape& t, ad::Var loss, const std::vector<ad::Var>& params) {
    t.backward(loss);
    TensorList out;
    out.reserve(params.size());
    for (const auto& p : params) out.push_back(p.grad());
    return out;
}

TensorList grad(ad::Tape& t, ad::Var loss, const MlpVars& vars) {
    return grads_of(t, loss, vars.all());
}

AdamState make_adam(const TensorList& params, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    for (const auto& p : params) {
        s.m.push_back(Matrix::Zero(p.rows(), p.cols()));
        s.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
    return s;
}

void adam_step(AdamState& state, TensorList& params, const TensorList& grads) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw DimensionError("adam_step: tensor count mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].rows() != params[i].rows() || grads[i].cols() != params[i].cols())
            throw DimensionError("adam_step: gradient shape mismatch");
        if (!grads[i].allFinite()) throw NumericError("adam_step: non-finite gradient");
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] =
            state.beta2 * state.v[i].array() + (1.0 - state.beta2) * grads[i].array().square();
        const Matrix m_hat = state.m[i] / c1;
        const Matrix v_hat = state.v[i] / c2;
        params[i].array() -=
            state.learning_rate * m_hat.array() / (v_hat.array().sqrt() + state.eps);
    }
}

double global_norm(const TensorList& tensors) {
    double sq = 0.0;
    for (const auto& t : tensors) sq += t.squaredNorm();
    return std::sqrt(sq);
}

void clip_global_norm(TensorList& tensors, double max_norm) {
    const double n = global_norm(tensors);
    if (n <= max_norm || n == 0.0) return;
    const double s = max_norm / n;
    for (auto& t : tensors) t *= s;
}

double finite_diff_check(const MlpParams& p,
                         const std::function<ad::Var(ad::Tape&, const MlpVars&)>& loss_builder,
                         double h) {
    if (h <= 0.0) throw ContractError("finite_diff_check: h must be positive");

    auto eval = [&](const MlpParams& probe) {
        ad::Tape t;
        MlpVars vars = lift(t, probe);
        ad::Var loss = loss_builder(t, vars);
        if (loss.rows() != 1 || loss.cols() != 1)
            throw ContractError("finite_diff_check: loss must be scalar");
        return loss.value()(0, 0);
    };

    ad::Tape t;
    MlpVars vars = lift(t, p);
    ad::Var loss = loss_builder(t, vars);
    TensorList analytic = grad(t, loss, vars);

    double worst = 0.0;
    TensorList tensors = mlp_tensors(p);
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        for (Eigen::Index r = 0; r < tensors[i].rows(); ++r) {
            for (Eigen::Index c = 0; c < tensors[i].cols(); ++c) {
                MlpParams probe = p;
                TensorList tt = tensors;
                tt[i](r, c) += h;
                set_mlp_tensors(probe, tt);
                const double up = eval(probe);
                tt[i](r, c) -= 2.0 * h;
                set_mlp_tensors(probe, tt);
                const double down = eval(probe);
                const double fd = (up - down) / (2.0 * h);
                const double g = analytic[i](r, c);
                const double rel = std::abs(fd - g) / std::max({1e-6, std::abs(fd), std::abs(g)});
                worst = std::max(worst, rel);
            }
        }
    }
    return worst;
}

}  // namespace movac
