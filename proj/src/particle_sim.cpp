#include "wanpm/particle_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wanpm/error.hpp"
#include "wanpm/io.hpp"
#include "wanpm/stats.hpp"

namespace wanpm {
namespace {

constexpr int kWindowSamples = 10;

double draw_increment(double alpha, double dt, RandomStream& stream, JumpCounters& counters, double limit,
                      const IncrementSource& increments) {
    auto draw = [&] { return increments ? increments(alpha, dt, stream) : sample_levy_increment(alpha, dt, stream); };
    double x = draw();
    if (std::abs(x) > limit) {
        ++counters.resampled;
        x = draw();
        if (std::abs(x) > limit) {
            ++counters.clamped;
            x = std::copysign(limit, x);
        }
    }
    return x;
}

std::int64_t step_index(double time, double dt) { return std::llround(time / dt); }

ParticleEnsemble initial_ensemble(const SimConfig& config, const InitialSampler& sampler, int dim_hint) {
    ParticleEnsemble ensemble;
    for (int i = 0; i < config.n_particles; ++i) {
        auto stream = RandomStream::substream(config.seed, stream_domain::kParticleInit, static_cast<std::uint64_t>(i));
        const Vector x = sampler(stream);
        if (i == 0) ensemble.states.resize(config.n_particles, x.size());
        if (x.size() != ensemble.states.cols() || (dim_hint > 0 && x.size() != dim_hint))
            throw ContractError("initial sampler returned a vector of the wrong dimension");
        ensemble.states.row(i) = x.transpose();
    }
    return ensemble;
}

WindowStats pooled_stats(const std::vector<Matrix>& pooled) {
    const Eigen::Index dim = pooled.front().cols();
    WindowStats out{Vector(dim), Vector(dim)};
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::vector<double> values;
        for (const auto& m : pooled)
            for (Eigen::Index i = 0; i < m.rows(); ++i) values.push_back(m(i, j));
        const auto summary = robust_summary(values);
        out.median(j) = summary.median;
        out.iqr(j) = summary.iqr;
    }
    return out;
}

}  // namespace

void validate(const SimConfig& config) {
    if (!(config.dt > 0.0)) throw DomainError("time step must be positive");
    if (config.n_particles < 1) throw ContractError("need at least one particle");
    if (!(config.t_end >= 0.0)) throw ContractError("t_end must be non-negative");
    if (!(config.alpha > 0.0 && config.alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    if (!(config.max_drift_step > 0.0)) throw DomainError("max_drift_step must be positive");
    for (double t : config.snapshot_times)
        if (t < 0.0 || t > config.t_end + 0.5 * config.dt)
            throw ContractError("snapshot time outside [0, t_end]: " + io::format_double(t));
}

std::vector<RandomStream> particle_streams(std::uint64_t seed, int n_particles) {
    std::vector<RandomStream> streams;
    streams.reserve(n_particles);
    for (int i = 0; i < n_particles; ++i)
        streams.push_back(RandomStream::substream(seed, stream_domain::kParticle, static_cast<std::uint64_t>(i)));
    return streams;
}

ParticleEnsemble euler_maruyama_step(const ParticleEnsemble& ensemble, const DriftField& drift, double alpha,
                                     double dt, std::vector<RandomStream>& streams, JumpCounters& counters,
                                     double jump_limit, const IncrementSource& increments, double max_drift_step) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!(max_drift_step > 0.0)) throw DomainError("max_drift_step must be positive");
    if (drift.dim() != ensemble.dim()) throw ContractError("drift dimension does not match ensemble dimension");
    if (static_cast<int>(streams.size()) != ensemble.size())
        throw ContractError("need exactly one noise stream per particle");
    const int dim = ensemble.dim();
    ParticleEnsemble next{ensemble.states, ensemble.time + dt};
    std::vector<double> x(dim), b(dim);
    for (int i = 0; i < ensemble.size(); ++i) {
        for (int j = 0; j < dim; ++j) x[j] = ensemble.states(i, j);
        drift.eval(x, b);
        for (int j = 0; j < dim; ++j) {
            if (!std::isfinite(b[j])) {
                std::ostringstream msg;
                msg << "non-finite drift at particle " << i << ", state (";
                for (int k = 0; k < dim; ++k) msg << (k ? ", " : "") << x[k];
                msg << ")";
                throw SimulationError(msg.str());
            }
        }
        double norm = 0.0;
        for (int j = 0; j < dim; ++j) norm += b[j] * b[j];
        double step = dt;
        if (std::sqrt(norm) * dt > max_drift_step) {
            step = max_drift_step / std::sqrt(norm);
            ++counters.drift_capped;
        }
        for (int j = 0; j < dim; ++j)
            next.states(i, j) = x[j] + b[j] * step + draw_increment(alpha, dt, streams[i], counters, jump_limit, increments);
    }
    return next;
}

SimResult simulate(const SimConfig& config, const DriftField& drift, const InitialSampler& initial_sampler,
                   const IncrementSource& increments) {
    validate(config);
    SimResult result;
    ParticleEnsemble ensemble = initial_ensemble(config, initial_sampler, drift.dim());
    auto streams = particle_streams(config.seed, config.n_particles);

    std::vector<std::pair<std::int64_t, double>> wanted;
    for (double t : config.snapshot_times) wanted.emplace_back(step_index(t, config.dt), t);
    std::stable_sort(wanted.begin(), wanted.end(), [](auto& a, auto& b) { return a.first < b.first; });

    const std::int64_t total_steps = step_index(config.t_end, config.dt);
    std::size_t next = 0;
    auto record = [&](std::int64_t step) {
        while (next < wanted.size() && wanted[next].first == step) {
            ParticleEnsemble snap{ensemble.states, static_cast<double>(step) * config.dt};
            result.snapshots.push_back({wanted[next].second, snap.time, std::move(snap)});
            ++next;
        }
    };
    record(0);
    for (std::int64_t step = 1; step <= total_steps; ++step) {
        ensemble = euler_maruyama_step(ensemble, drift, config.alpha, config.dt, streams, result.metadata.jumps,
                                       config.jump_limit, increments, config.max_drift_step);
        ensemble.time = static_cast<double>(step) * config.dt;
        record(step);
    }
    result.metadata.seed = config.seed;
    result.metadata.dt = config.dt;
    result.metadata.alpha = config.alpha;
    result.metadata.n_particles = config.n_particles;
    result.metadata.dim = drift.dim();
    result.metadata.steps = total_steps;
    return result;
}

StationarityResult run_to_stationarity(const SimConfig& config, const DriftField& drift,
                                       const InitialSampler& initial_sampler, double window, double tol) {
    validate(config);
    if (!(window > 0.0) || !(2.0 * window <= config.t_end))
        throw ContractError("stationarity window must be positive with two windows fitting in t_end");
    const std::int64_t total_steps = step_index(config.t_end, config.dt);
    const std::int64_t window_steps = std::max<std::int64_t>(1, step_index(window, config.dt));

    // Pool kWindowSamples evenly spaced states from each window.
    auto sample_steps = [&](std::int64_t first, std::int64_t last) {
        std::vector<std::int64_t> steps;
        for (int s = 0; s < kWindowSamples; ++s)
            steps.push_back(first + (last - first) * (s + 1) / kWindowSamples);
        return steps;
    };
    const auto earlier_steps = sample_steps(total_steps - 2 * window_steps, total_steps - window_steps - 1);
    const auto later_steps = sample_steps(total_steps - window_steps, total_steps);

    StationarityResult result;
    ParticleEnsemble ensemble = initial_ensemble(config, initial_sampler, drift.dim());
    auto streams = particle_streams(config.seed, config.n_particles);
    std::vector<Matrix> earlier, later;
    for (std::int64_t step = 1; step <= total_steps; ++step) {
        ensemble = euler_maruyama_step(ensemble, drift, config.alpha, config.dt, streams, result.metadata.jumps,
                                       config.jump_limit, {}, config.max_drift_step);
        ensemble.time = static_cast<double>(step) * config.dt;
        if (std::find(earlier_steps.begin(), earlier_steps.end(), step) != earlier_steps.end())
            earlier.push_back(ensemble.states);
        if (std::find(later_steps.begin(), later_steps.end(), step) != later_steps.end())
            later.push_back(ensemble.states);
    }
    result.earlier = pooled_stats(earlier);
    result.later = pooled_stats(later);
    result.stationary = true;
    for (Eigen::Index j = 0; j < result.later.median.size(); ++j) {
        const double iqr = result.later.iqr(j);
        const double d_median = std::abs(result.later.median(j) - result.earlier.median(j));
        const double d_iqr = std::abs(result.later.iqr(j) - result.earlier.iqr(j));
        if (!(d_median < tol * iqr) || !(d_iqr < tol * iqr)) result.stationary = false;
    }
    result.terminal = std::move(ensemble);
    result.metadata.seed = config.seed;
    result.metadata.dt = config.dt;
    result.metadata.alpha = config.alpha;
    result.metadata.n_particles = config.n_particles;
    result.metadata.dim = drift.dim();
    result.metadata.steps = total_steps;
    return result;
}

void write_snapshots_csv(const std::filesystem::path& path, const std::vector<Snapshot>& snapshots) {
    std::string out = "time,particle_id";
    const int dim = snapshots.empty() ? 1 : snapshots.front().ensemble.dim();
    for (int j = 1; j <= dim; ++j) out += ",x" + std::to_string(j);
    out += '\n';
    for (const auto& snap : snapshots) {
        const std::string t = io::format_double(snap.time);
        for (int i = 0; i < snap.ensemble.size(); ++i) {
            out += t;
            out += ',';
            out += std::to_string(i);
            for (int j = 0; j < dim; ++j) {
                out += ',';
                out += io::format_double(snap.ensemble.states(i, j));
            }
            out += '\n';
        }
    }
    io::write_text(path, out);
}

std::vector<Snapshot> read_snapshots_csv(const std::filesystem::path& path) {
    const auto table = io::read_csv(path);
    const auto time_col = table.column("time");
    (void)table.column("particle_id");
    int dim = 0;
    while (true) {
        const std::string name = "x" + std::to_string(dim + 1);
        if (std::find(table.header.begin(), table.header.end(), name) == table.header.end()) break;
        ++dim;
    }
    if (dim == 0) throw ConfigError("snapshot CSV has no coordinate columns (expected x1..xn)");
    std::vector<std::size_t> cols;
    for (int j = 1; j <= dim; ++j) cols.push_back(table.column("x" + std::to_string(j)));

    std::vector<Snapshot> out;
    std::vector<std::vector<double>> rows;
    double current = 0.0;
    auto flush = [&] {
        if (rows.empty()) return;
        Snapshot snap;
        snap.time = snap.requested_time = current;
        snap.ensemble.time = current;
        snap.ensemble.states.resize(static_cast<Eigen::Index>(rows.size()), dim);
        for (std::size_t i = 0; i < rows.size(); ++i)
            for (int j = 0; j < dim; ++j) snap.ensemble.states(static_cast<Eigen::Index>(i), j) = rows[i][j];
        out.push_back(std::move(snap));
        rows.clear();
    };
    for (const auto& row : table.rows) {
        const double t = io::parse_double(row[time_col]);
        if (!rows.empty() && t != current) flush();
        current = t;
        std::vector<double> x(dim);
        for (int j = 0; j < dim; ++j) x[j] = io::parse_double(row[cols[j]]);
        rows.push_back(std::move(x));
    }
    flush();
    return out;
}

void write_metadata(const std::filesystem::path& path, const SimMetadata& metadata,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    std::string out;
    out += "seed=" + std::to_string(metadata.seed) + "\n";
    out += "dt=" + io::format_double(metadata.dt) + "\n";
    out += "alpha=" + io::format_double(metadata.alpha) + "\n";
    out += "n_particles=" + std::to_string(metadata.n_particles) + "\n";
    out += "dim=" + std::to_string(metadata.dim) + "\n";
    out += "steps=" + std::to_string(metadata.steps) + "\n";
    out += "jumps_resampled=" + std::to_string(metadata.jumps.resampled) + "\n";
    out += "jumps_clamped=" + std::to_string(metadata.jumps.clamped) + "\n";
    out += "drift_capped=" + std::to_string(metadata.jumps.drift_capped) + "\n";
    for (const auto& [k, v] : extra) out += k + "=" + v + "\n";
    io::write_text(path, out);
}

}  // namespace wanpm
