#pragma once

#include <filesystem>
#include <string>

#include "wanpm/mlp.hpp"

namespace wanpm {

/// x(t) = x0 + sqrt(t) * net(t, x0, r); the initial condition holds exactly at t = 0.
struct TransientPushforward {
    int n = 1;  ///< target dimension
    int d = 1;  ///< latent dimension
    MlpSpec spec;
    Vector params;

    static TransientPushforward create(int n, int d, const std::vector<int>& hidden, RandomStream& stream);
};

/// x = net(r).
struct SteadyPushforward {
    int n = 1;
    int d = 1;
    MlpSpec spec;
    Vector params;

    static SteadyPushforward create(int n, int d, const std::vector<int>& hidden, RandomStream& stream);
};

/// Throws ContractError for negative times or inconsistent shapes.
Matrix sample_transient(const TransientPushforward& F, const Vector& t, const Matrix& x0, const Matrix& r);
Matrix sample_steady(const SteadyPushforward& G, const Matrix& r);

/// Taped versions; `params` is the generator's flat parameter column.
ad::Var sample_transient(ad::Tape& tape, const MlpSpec& spec, ad::Var params, const Vector& t, const Matrix& x0,
                         const Matrix& r);
ad::Var sample_steady(ad::Tape& tape, const MlpSpec& spec, ad::Var params, const Matrix& r);

/// x0 + sqrt(max(t, 0)) * h row-wise.
ad::Var transient_combine(ad::Tape& tape, const Vector& t, const Matrix& x0, ad::Var h);

void save_pushforward(const std::filesystem::path& path, const TransientPushforward& F,
                      const std::map<std::string, std::string>& extra = {});
void save_pushforward(const std::filesystem::path& path, const SteadyPushforward& G,
                      const std::map<std::string, std::string>& extra = {});

/// Reads the kind recorded in a generator checkpoint: "transient" or "steady".
std::string checkpoint_kind(const std::filesystem::path& path);
TransientPushforward load_transient(const std::filesystem::path& path);
SteadyPushforward load_steady(const std::filesystem::path& path);

}  // namespace wanpm
