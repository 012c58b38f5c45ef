#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "wanpm/drift.hpp"
#include "wanpm/random.hpp"

namespace wanpm {

struct SimConfig {
    double alpha = 1.5;
    double dt = 0.01;
    int n_particles = 10000;
    double t_end = 1.0;
    std::vector<double> snapshot_times;
    std::uint64_t seed = 0;
    /// Increments beyond this magnitude are redrawn once, then clamped.
    double jump_limit = 1e6;
    /// Drift displacements dt * |b(x)| longer than this are rescaled to it.
    double max_drift_step = 1.0;
};

void validate(const SimConfig& config);

struct ParticleEnsemble {
    Matrix states;  ///< N x n positions
    double time = 0.0;

    [[nodiscard]] int size() const { return static_cast<int>(states.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(states.cols()); }
};

struct Snapshot {
    double requested_time = 0.0;
    double time = 0.0;  ///< time actually reached, a multiple of dt
    ParticleEnsemble ensemble;
};

struct JumpCounters {
    std::int64_t resampled = 0;
    std::int64_t clamped = 0;
    std::int64_t drift_capped = 0;
};

struct SimMetadata {
    std::uint64_t seed = 0;
    double dt = 0.0;
    double alpha = 0.0;
    int n_particles = 0;
    int dim = 0;
    std::int64_t steps = 0;
    JumpCounters jumps;
};

struct SimResult {
    std::vector<Snapshot> snapshots;
    SimMetadata metadata;
};

/// Draws one initial state of the right dimension.
using InitialSampler = std::function<Vector(RandomStream&)>;

/// Source of scalar Levy increments; replaceable in tests.
using IncrementSource = std::function<double(double alpha, double dt, RandomStream&)>;

/// Per-particle noise streams, one independent substream per particle.
std::vector<RandomStream> particle_streams(std::uint64_t seed, int n_particles);

/// One Euler-Maruyama step X <- X + b(X) dt + dL for every particle, each
/// coordinate of dL an independent Levy increment drawn from that particle's
/// own stream. The drift displacement is capped at `max_drift_step` in
/// Euclidean norm (truncated Euler); explicit Euler is unstable for
/// superlinear drifts once a large jump lands far from the wells.
/// Throws SimulationError if the drift is non-finite.
ParticleEnsemble euler_maruyama_step(const ParticleEnsemble& ensemble, const DriftField& drift, double alpha,
                                     double dt, std::vector<RandomStream>& streams, JumpCounters& counters,
                                     double jump_limit = 1e6, const IncrementSource& increments = {},
                                     double max_drift_step = 1.0);

/// Integrates to config.t_end and returns the snapshots requested in
/// config.snapshot_times (each rounded to the nearest step).
SimResult simulate(const SimConfig& config, const DriftField& drift, const InitialSampler& initial_sampler,
                   const IncrementSource& increments = {});

struct WindowStats {
    Vector median;
    Vector iqr;
};

struct StationarityResult {
    ParticleEnsemble terminal;
    bool stationary = false;
    WindowStats earlier;
    WindowStats later;
    SimMetadata metadata;
};

/// Integrates to config.t_end and compares pooled robust statistics of the
/// two final disjoint windows [t_end - 2w, t_end - w) and [t_end - w, t_end].
/// Stationary when |d median| < tol * IQR and |d IQR| / IQR < tol per
/// coordinate. Non-convergence is reported, never thrown.
StationarityResult run_to_stationarity(const SimConfig& config, const DriftField& drift,
                                       const InitialSampler& initial_sampler, double window, double tol = 0.05);

/// Snapshot CSV: `time,particle_id,x1,...,xn`, one row per particle per snapshot.
void write_snapshots_csv(const std::filesystem::path& path, const std::vector<Snapshot>& snapshots);
std::vector<Snapshot> read_snapshots_csv(const std::filesystem::path& path);

/// key=value sidecar with seed, dt, alpha and jump counters.
void write_metadata(const std::filesystem::path& path, const SimMetadata& metadata,
                    const std::vector<std::pair<std::string, std::string>>& extra = {});

}  // namespace wanpm
