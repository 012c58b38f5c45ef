#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wanpm/potentials.hpp"
#include "wanpm/stats.hpp"
#include "wanpm/weak_loss.hpp"

namespace wanpm {

struct Thresholds {
    double median = 0.1;   ///< max |learned - particle| median
    double rel_iqr = 0.2;  ///< max |d IQR| / particle IQR
    double cf = 0.05;      ///< max CF gap (steady problems)
};

/// Fully resolved run configuration.
struct RunConfig {
    ExperimentSpec spec;
    std::string preset = "desk";
    std::uint64_t seed = 0;
    double epsilon = 0.0;  ///< resolved to 1e-3 T when left unset
    double lr_generator = 1e-3;
    double lr_adversary = 1e-2;
    double min_lr_ratio = 0.01;
    int adversary_steps = 1;
    double clip_norm = 1.0;
    BankInit bank_init;
    bool train_w = true;
    bool train_kappa = true;
    bool train_phase = true;
    double jump_limit = 1e6;
    double max_drift_step = 1.0;
    double stationarity_window = 0.0;  ///< resolved to t_sde / 10 when left unset
    double stationarity_tol = 0.05;
    int eval_samples = 5000;
    std::vector<double> cf_grid;
    Thresholds thresholds;
};

/// Preset, then optional config file, then CLI seed and dotted key=value
/// overrides. Unknown keys throw ConfigError. `experiment` may be empty when
/// the config file names one.
RunConfig resolve_config(const std::string& experiment, const std::string& preset,
                         const std::optional<std::filesystem::path>& config_file,
                         const std::optional<std::uint64_t>& seed, const std::vector<std::string>& overrides);

/// JSON text of the resolved configuration; feeding it back as a config
/// file reproduces the same RunConfig.
std::string config_to_json(const RunConfig& config);

struct TrainedModel {
    ProblemKind kind = ProblemKind::transient;
    TransientPushforward transient;
    SteadyPushforward steady;
    PlaneWaveBank bank;
    std::vector<HistoryRow> history;
};

/// Builds the generator and bank from the seed and trains them.
TrainedModel train_experiment(const RunConfig& config, const std::function<void(int, double)>& progress = {});

/// Samples of the learned law at time t (ignored for steady problems). Draw
/// `stream_index` selects an independent evaluation substream.
Matrix sample_learned(const RunConfig& config, const TrainedModel& model, double t, int count,
                      std::uint64_t stream_index);

struct BenchmarkRun {
    std::vector<Snapshot> snapshots;
    SimMetadata metadata;
    std::optional<bool> stationary;  ///< steady problems only
};

/// Particle benchmark at the given snapshot times (transient) or at t_sde with
/// a stationarity check (steady; `times` is ignored).
BenchmarkRun simulate_experiment(const RunConfig& config, const std::vector<double>& times);

/// Command entry points; each returns a process exit code.
int cmd_train(const RunConfig& config, const std::filesystem::path& out);
int cmd_simulate(const RunConfig& config, const std::filesystem::path& out);
int cmd_evaluate(const RunConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                 const std::filesystem::path& particles, const std::optional<std::filesystem::path>& learned_csv,
                 const std::filesystem::path& out);
int cmd_report(const std::filesystem::path& dir);

/// Report CSV layouts.
void write_report_csv(const std::filesystem::path& path, const std::vector<RobustReport>& reports);
void write_deltas_csv(const std::filesystem::path& path, const std::vector<RobustReport>& reports);
void write_cf_csv(const std::filesystem::path& path, const RobustReport& report, double alpha, double theta,
                  double mu);

}  // namespace wanpm
