#pragma once

#include <string>
#include <vector>

#include "wanpm/drift.hpp"
#include "wanpm/particle_sim.hpp"

namespace wanpm {

enum class ProblemKind { transient, steady };

/// Equal-weight mixture of isotropic Gaussians N(mean_i, std^2 I).
struct InitialLaw {
    std::vector<Vector> means;
    double std = 1.0;

    [[nodiscard]] int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
    /// Picks a component with a fair draw (only when there are several), then a Gaussian.
    Vector sample(RandomStream& stream) const;
};

struct DriftParams {
    double theta = 1.0;  ///< fOU rate
    double mu = 2.0;     ///< fOU centre
    double k = 1.0;      ///< harmonic stiffness
    double r0 = 2.0;     ///< ring radius
    double omega = 2.0;  ///< ring angular velocity
    /// custom_1d: b(x) = sum_i c_i x^i.
    std::vector<double> coefficients;
};

/// One catalog entry. For steady problems T is unused and t_sde sets the
/// particle horizon; for transient problems the particle horizon is T.
struct ExperimentSpec {
    std::string id;
    ProblemKind kind = ProblemKind::transient;
    int n = 1;
    double alpha = 1.5;
    double T = 1.0;
    double t_sde = 0.0;
    int K = 100;
    int d = 5;
    int epochs = 100;
    int M = 1000;
    int M0 = 500;
    int MT = 500;
    std::vector<int> hidden{128, 128, 128};
    bool normalize_w = false;
    int n_particles = 10000;
    double dt = 0.01;
    DriftParams drift;
    /// Transient initial law P0; empty for steady problems.
    InitialLaw initial;
    /// Law the particle benchmark starts from (equals `initial` for transient problems).
    InitialLaw particle_initial;
    std::vector<double> snapshot_times;
};

/// The seven catalog ids followed by custom_1d.
const std::vector<std::string>& experiment_ids();
bool is_known_experiment(const std::string& id);

/// Published hyperparameters. Throws ConfigError for unknown ids.
ExperimentSpec paper_spec(const std::string& id);
/// Reduced desk-scale hyperparameters.
ExperimentSpec desk_spec(const std::string& id);

DriftField make_drift(const ExperimentSpec& spec);
/// Scalar potential with drift = -grad V; for ring_2d only the radial part.
double potential(const ExperimentSpec& spec, const Vector& x);

/// Catalog defaults; unknown ids throw ConfigError.
Vector drift_eval(const std::string& id, const Vector& x);
double potential_eval(const std::string& id, const Vector& x);

/// One draw from the transient initial law. Steady ids throw ContractError.
Vector initial_sample(const std::string& id, RandomStream& stream);
InitialSampler initial_sampler(const ExperimentSpec& spec);
InitialSampler particle_initial_sampler(const ExperimentSpec& spec);

std::string to_string(ProblemKind kind);

}  // namespace wanpm
