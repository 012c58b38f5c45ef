#include "wanpm/pushforward.hpp"

#include <cmath>

#include "wanpm/error.hpp"

namespace wanpm {
namespace {

Vector sqrt_time(const Vector& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i)
        if (t(i) < 0.0 || std::isnan(t(i))) throw ContractError("pushforward time must be non-negative");
    return t.cwiseMax(0.0).cwiseSqrt();
}

Matrix transient_input(const Vector& t, const Matrix& x0, const Matrix& r) {
    if (t.size() != x0.rows() || r.rows() != x0.rows())
        throw ContractError("pushforward batch sizes of t, x0 and r differ");
    Matrix input(x0.rows(), 1 + x0.cols() + r.cols());
    input.col(0) = t;
    input.middleCols(1, x0.cols()) = x0;
    input.rightCols(r.cols()) = r;
    return input;
}

void check_transient(const TransientPushforward& F, const Matrix& x0, const Matrix& r) {
    if (x0.cols() != F.n) throw ContractError("x0 width does not match the target dimension");
    if (r.cols() != F.d) throw ContractError("latent draws do not match the base dimension");
}

ModelCheckpoint load_kind(const std::filesystem::path& path, const std::string& kind) {
    auto ckpt = load_checkpoint(path);
    const auto it = ckpt.header.find("kind");
    if (it == ckpt.header.end() || it->second != kind)
        throw ConfigError("checkpoint " + path.string() + " is not a " + kind + " pushforward");
    return ckpt;
}

int header_int(const ModelCheckpoint& ckpt, const std::string& key) {
    const auto it = ckpt.header.find(key);
    if (it == ckpt.header.end()) throw ConfigError("checkpoint header lacks '" + key + "'");
    return std::stoi(it->second);
}

void save_model(const std::filesystem::path& path, const MlpSpec& spec, const Vector& params, const char* kind, int n,
                int d, const std::map<std::string, std::string>& extra) {
    ModelCheckpoint ckpt{spec, params, extra};
    ckpt.header["kind"] = kind;
    ckpt.header["n"] = std::to_string(n);
    ckpt.header["d"] = std::to_string(d);
    save_checkpoint(path, ckpt);
}

}  // namespace

TransientPushforward TransientPushforward::create(int n, int d, const std::vector<int>& hidden, RandomStream& stream) {
    if (n < 1 || d < 1) throw ContractError("pushforward needs n >= 1 and d >= 1");
    TransientPushforward F;
    F.n = n;
    F.d = d;
    F.spec = {1 + n + d, hidden, n};
    F.params = glorot_init(F.spec, stream);
    return F;
}

SteadyPushforward SteadyPushforward::create(int n, int d, const std::vector<int>& hidden, RandomStream& stream) {
    if (n < 1 || d < 1) throw ContractError("pushforward needs n >= 1 and d >= 1");
    SteadyPushforward G;
    G.n = n;
    G.d = d;
    G.spec = {d, hidden, n};
    G.params = glorot_init(G.spec, stream);
    return G;
}

Matrix sample_transient(const TransientPushforward& F, const Vector& t, const Matrix& x0, const Matrix& r) {
    check_transient(F, x0, r);
    const Vector s = sqrt_time(t);
    const Matrix h = forward(F.spec, F.params, transient_input(t, x0, r));
    return x0 + (h.array().colwise() * s.array()).matrix();
}

Matrix sample_steady(const SteadyPushforward& G, const Matrix& r) {
    if (r.cols() != G.d) throw ContractError("latent draws do not match the base dimension");
    return forward(G.spec, G.params, r);
}

ad::Var transient_combine(ad::Tape& tape, const Vector& t, const Matrix& x0, ad::Var h) {
    if (h.rows() != x0.rows() || h.cols() != x0.cols()) throw ContractError("network output shape differs from x0");
    const Vector s = sqrt_time(t);
    return ad::add(tape.constant(x0), ad::mul_col(h, tape.constant(s)));
}

ad::Var sample_transient(ad::Tape& tape, const MlpSpec& spec, ad::Var params, const Vector& t, const Matrix& x0,
                         const Matrix& r) {
    if (spec.output_dim != x0.cols() || spec.input_dim != 1 + x0.cols() + r.cols())
        throw ContractError("transient network widths do not match (t, x0, r)");
    const ad::Var h = forward(spec, params, tape.constant(transient_input(t, x0, r)));
    return transient_combine(tape, t, x0, h);
}

ad::Var sample_steady(ad::Tape& tape, const MlpSpec& spec, ad::Var params, const Matrix& r) {
    if (spec.input_dim != r.cols()) throw ContractError("latent draws do not match the base dimension");
    return forward(spec, params, tape.constant(r));
}

void save_pushforward(const std::filesystem::path& path, const TransientPushforward& F,
                      const std::map<std::string, std::string>& extra) {
    save_model(path, F.spec, F.params, "transient", F.n, F.d, extra);
}

void save_pushforward(const std::filesystem::path& path, const SteadyPushforward& G,
                      const std::map<std::string, std::string>& extra) {
    save_model(path, G.spec, G.params, "steady", G.n, G.d, extra);
}

std::string checkpoint_kind(const std::filesystem::path& path) {
    const auto ckpt = load_checkpoint(path);
    const auto it = ckpt.header.find("kind");
    if (it == ckpt.header.end()) throw ConfigError("checkpoint " + path.string() + " records no pushforward kind");
    return it->second;
}

TransientPushforward load_transient(const std::filesystem::path& path) {
    auto ckpt = load_kind(path, "transient");
    TransientPushforward F;
    F.n = header_int(ckpt, "n");
    F.d = header_int(ckpt, "d");
    F.spec = ckpt.spec;
    F.params = std::move(ckpt.params);
    if (F.spec.input_dim != 1 + F.n + F.d || F.spec.output_dim != F.n)
        throw ConfigError("checkpoint network widths disagree with its (n, d) header");
    return F;
}

SteadyPushforward load_steady(const std::filesystem::path& path) {
    auto ckpt = load_kind(path, "steady");
    SteadyPushforward G;
    G.n = header_int(ckpt, "n");
    G.d = header_int(ckpt, "d");
    G.spec = ckpt.spec;
    G.params = std::move(ckpt.params);
    if (G.spec.input_dim != G.d || G.spec.output_dim != G.n)
        throw ConfigError("checkpoint network widths disagree with its (n, d) header");
    return G;
}

}  // namespace wanpm
