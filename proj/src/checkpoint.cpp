#include "movac/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace movac {

namespace {

template <typename T>
void write_raw(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw CheckpointError("checkpoint truncated");
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    const auto n = read_raw<std::uint32_t>(in);
    if (n > (1u << 20)) throw CheckpointError("checkpoint string too large");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw CheckpointError("checkpoint truncated");
    return s;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_raw<double>(out, m(r, c));
}

Matrix read_matrix(std::istream& in) {
    const auto rows = read_raw<std::uint32_t>(in);
    const auto cols = read_raw<std::uint32_t>(in);
    if (rows > 1u << 16 || cols > 1u << 16) throw CheckpointError("checkpoint matrix too large");
    Matrix m(rows, cols);
    for (std::uint32_t r = 0; r < rows; ++r)
        for (std::uint32_t c = 0; c < cols; ++c) m(r, c) = read_raw<double>(in);
    return m;
}

void write_vector(std::ostream& out, const Vector& v) { write_matrix(out, Matrix(v)); }

Vector read_vector(std::istream& in) {
    Matrix m = read_matrix(in);
    if (m.cols() != 1) throw CheckpointError("checkpoint vector has multiple columns");
    return m.col(0);
}

void write_adam(std::ostream& out, const AdamState& s) {
    write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(s.step));
    write_raw<double>(out, s.learning_rate);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(s.m.size()));
    for (std::size_t i = 0; i < s.m.size(); ++i) {
        write_matrix(out, s.m[i]);
        write_matrix(out, s.v[i]);
    }
}

AdamState read_adam(std::istream& in) {
    AdamState s;
    s.step = static_cast<long>(read_raw<std::uint64_t>(in));
    s.learning_rate = read_raw<double>(in);
    const auto n = read_raw<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n; ++i) {
        s.m.push_back(read_matrix(in));
        s.v.push_back(read_matrix(in));
    }
    return s;
}

}  // namespace

void write_mlp(std::ostream& out, const MlpParams& p) {
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(p.layers.size()));
    for (const auto& layer : p.layers) {
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.rows()));
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(layer.weight.cols()));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
                write_raw<double>(out, layer.weight(r, c));
        for (Eigen::Index c = 0; c < layer.bias.cols(); ++c)
            write_raw<double>(out, layer.bias(0, c));
    }
}

MlpParams read_mlp(std::istream& in) {
    MlpParams p;
    const auto layers = read_raw<std::uint32_t>(in);
    if (layers > 64) throw CheckpointError("checkpoint has too many layers");
    for (std::uint32_t l = 0; l < layers; ++l) {
        const auto rows = read_raw<std::uint32_t>(in);
        const auto cols = read_raw<std::uint32_t>(in);
        if (rows > 1u << 16 || cols > 1u << 16)
            throw CheckpointError("checkpoint layer too large");
        MlpLayer layer;
        layer.weight = Matrix(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r)
            for (std::uint32_t c = 0; c < cols; ++c) layer.weight(r, c) = read_raw<double>(in);
        layer.bias = Matrix(1, cols);
        for (std::uint32_t c = 0; c < cols; ++c) layer.bias(0, c) = read_raw<double>(in);
        p.layers.push_back(std::move(layer));
    }
    return p;
}

void save_checkpoint(const std::string& path, const TrainingCheckpoint& ckpt) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);

    out.write("MVAC", 4);
    write_raw<std::uint32_t>(out, kCheckpointVersion);

    write_string(out, ckpt.env_name);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.env_options.size()));
    for (const auto& [key, value] : ckpt.env_options) {
        write_string(out, key);
        write_string(out, value);
    }
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.critics.objectives()));
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.policy.state_dim()));
    write_raw<std::uint8_t>(out, ckpt.policy.family == ActionFamily::kGaussian ? 0 : 1);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.policy.action_dim));
    write_raw<std::uint64_t>(out, ckpt.master_seed);
    write_raw<std::uint64_t>(out, ckpt.batches_done);

    // policy head descriptor then trunk tensors
    write_raw<std::uint32_t>(out, ckpt.policy.family == ActionFamily::kGaussian ? 0u : 1u);
    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.policy.action_dim));
    if (ckpt.policy.family == ActionFamily::kGaussian)
        for (int d = 0; d < ckpt.policy.action_dim; ++d)
            write_raw<double>(out, ckpt.policy.log_std(0, d));
    write_mlp(out, ckpt.policy.trunk);

    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.critics.critics.size()));
    for (const auto& c : ckpt.critics.critics) write_mlp(out, c);
    for (const auto& c : ckpt.critics.targets) write_mlp(out, c);

    // correlation matrix sits right after the critic tensors
    write_matrix(out, ckpt.w);

    for (const auto& n : ckpt.critics.normalizers) {
        write_raw<double>(out, n.mean);
        write_raw<double>(out, n.m2);
        write_raw<std::uint64_t>(out, n.count);
    }

    write_adam(out, ckpt.actor_opt);
    for (const auto& o : ckpt.critics.optimizers) write_adam(out, o);

    write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.fronts.size()));
    for (const auto& front : ckpt.fronts) {
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(front.members.size()));
        for (const auto& m : front.members) {
            write_vector(out, m.value);
            write_string(out, m.tag);
        }
        write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(front.explored.size()));
        for (const auto& e : front.explored) {
            write_vector(out, e.weight);
            write_raw<double>(out, e.payoff);
        }
    }
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

TrainingCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);

    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "MVAC", 4) != 0)
        throw CheckpointError("bad magic in checkpoint: " + path);
    const auto version = read_raw<std::uint32_t>(in);
    if (version != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

    TrainingCheckpoint ckpt;
    ckpt.env_name = read_string(in);
    const auto option_count = read_raw<std::uint32_t>(in);
    if (option_count > 1024) throw CheckpointError("checkpoint has too many env options");
    for (std::uint32_t i = 0; i < option_count; ++i) {
        std::string key = read_string(in);
        ckpt.env_options[key] = read_string(in);
    }
    const auto objectives = read_raw<std::uint32_t>(in);
    const auto state_dim = read_raw<std::uint32_t>(in);
    const auto family_meta = read_raw<std::uint8_t>(in);
    const auto action_dim_meta = read_raw<std::uint32_t>(in);
    ckpt.master_seed = read_raw<std::uint64_t>(in);
    ckpt.batches_done = read_raw<std::uint64_t>(in);

    const auto family_tag = read_raw<std::uint32_t>(in);
    const auto action_dim = read_raw<std::uint32_t>(in);
    if (family_tag != family_meta || action_dim != action_dim_meta)
        throw CheckpointError("inconsistent policy head descriptor");
    ckpt.policy.family = family_tag == 0 ? ActionFamily::kGaussian : ActionFamily::kCategorical;
    ckpt.policy.action_dim = static_cast<int>(action_dim);
    if (ckpt.policy.family == ActionFamily::kGaussian) {
        ckpt.policy.log_std = Matrix(1, action_dim);
        for (std::uint32_t d = 0; d < action_dim; ++d)
            ckpt.policy.log_std(0, d) = read_raw<double>(in);
    }
    ckpt.policy.trunk = read_mlp(in);
    if (ckpt.policy.state_dim() != static_cast<int>(state_dim))
        throw CheckpointError("policy input width disagrees with checkpoint meta");

    const auto critic_count = read_raw<std::uint32_t>(in);
    if (critic_count != objectives) throw CheckpointError("critic count disagrees with meta");
    for (std::uint32_t i = 0; i < critic_count; ++i)
        ckpt.critics.critics.push_back(read_mlp(in));
    for (std::uint32_t i = 0; i < critic_count; ++i)
        ckpt.critics.targets.push_back(read_mlp(in));

    ckpt.w = read_matrix(in);
    if (ckpt.w.rows() != static_cast<Eigen::Index>(objectives) || ckpt.w.rows() != ckpt.w.cols())
        throw CheckpointError("correlation matrix has wrong shape");

    for (std::uint32_t i = 0; i < critic_count; ++i) {
        RunningNormalizer n;
        n.mean = read_raw<double>(in);
        n.m2 = read_raw<double>(in);
        n.count = read_raw<std::uint64_t>(in);
        ckpt.critics.normalizers.push_back(n);
    }

    ckpt.actor_opt = read_adam(in);
    for (std::uint32_t i = 0; i < critic_count; ++i)
        ckpt.critics.optimizers.push_back(read_adam(in));

    const auto front_count = read_raw<std::uint32_t>(in);
    if (front_count > 1024) throw CheckpointError("checkpoint has too many fronts");
    for (std::uint32_t f = 0; f < front_count; ++f) {
        UndominatedSet front;
        const auto members = read_raw<std::uint32_t>(in);
        for (std::uint32_t i = 0; i < members; ++i) {
            Vector v = read_vector(in);
            std::string tag = read_string(in);
            front.members.push_back({std::move(v), std::move(tag)});
        }
        const auto explored = read_raw<std::uint32_t>(in);
        for (std::uint32_t i = 0; i < explored; ++i) {
            Vector w = read_vector(in);
            const double payoff = read_raw<double>(in);
            front.explored.push_back({std::move(w), payoff});
        }
        ckpt.fronts.push_back(std::move(front));
    }
    return ckpt;
}

}  // namespace movac
