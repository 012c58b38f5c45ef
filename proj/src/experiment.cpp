#include "wanpm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "wanpm/error.hpp"
#include "wanpm/io.hpp"

namespace wanpm {
namespace {

using json = nlohmann::ordered_json;

Thresholds default_thresholds(const std::string& id) {
    if (id == "ou_steady") return {0.1, 0.1, 0.05};
    if (id == "harmonic_1d" || id == "custom_1d") return {0.1, 0.2, 0.05};
    if (id == "ring_2d") return {0.2, 0.25, 0.05};
    if (id == "double_peak_2d_steady") return {0.15, 0.25, 0.1};
    return {0.15, 0.25, 0.05};
}

json law_means(const InitialLaw& law) {
    json means = json::array();
    for (const auto& m : law.means) means.push_back(std::vector<double>(m.data(), m.data() + m.size()));
    return means;
}

InitialLaw law_from(const json& means, double std) {
    InitialLaw law;
    law.std = std;
    for (const auto& m : means) {
        const auto v = m.get<std::vector<double>>();
        law.means.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return law;
}

json preset_json(const std::string& id, const std::string& preset) {
    RunConfig config;
    if (preset == "paper") {
        config.spec = paper_spec(id);
    } else if (preset == "desk") {
        config.spec = desk_spec(id);
    } else {
        throw ConfigError("unknown preset '" + preset + "' (expected desk or paper)");
    }
    config.preset = preset;
    config.thresholds = default_thresholds(id);
    if (config.spec.kind == ProblemKind::steady) config.cf_grid = default_cf_grid();
    auto doc = json::parse(config_to_json(config));
    doc["epsilon"] = nullptr;
    doc["particles"]["stationarity_window"] = nullptr;
    return doc;
}

/// Rejects keys of `patch` that the preset does not define.
void check_keys(const json& patch, const json& base, const std::string& prefix) {
    if (!patch.is_object()) return;
    for (const auto& [key, value] : patch.items()) {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        if (!base.is_object() || !base.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
        if (value.is_object()) check_keys(value, base.at(key), path);
    }
}

void merge(json& base, const json& patch) {
    for (const auto& [key, value] : patch.items()) {
        if (value.is_object() && base[key].is_object()) {
            merge(base[key], value);
        } else {
            base[key] = value;
        }
    }
}

void apply_override(json& doc, const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + text + "' is not of the form key=value");
    const std::string key = text.substr(0, eq);
    const std::string raw = text.substr(eq + 1);
    json* node = &doc;
    for (const auto& part : io::split(key, '.')) {
        if (!node->is_object() || !node->contains(part)) throw ConfigError("unknown configuration key '" + key + "'");
        node = &(*node)[part];
    }
    if (node->is_object()) throw ConfigError("configuration key '" + key + "' is a section, not a value");
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    *node = value;
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
    try {
        return section ? doc.at(section).at(key).get<T>() : doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("configuration value '") + (section ? std::string(section) + "." : "") + key +
                          "' is missing or has the wrong type");
    }
}

RunConfig from_json(const json& doc) {
    RunConfig c;
    const std::string id = get<std::string>(doc, nullptr, "experiment");
    const std::string preset = get<std::string>(doc, nullptr, "preset");
    c.spec = preset == "paper" ? paper_spec(id) : desk_spec(id);
    c.preset = preset;
    ExperimentSpec& s = c.spec;
    c.seed = get<std::uint64_t>(doc, nullptr, "seed");
    s.alpha = get<double>(doc, nullptr, "alpha");
    s.n = get<int>(doc, nullptr, "dim");
    if (s.kind == ProblemKind::transient) s.T = get<double>(doc, nullptr, "T");
    if (s.kind == ProblemKind::steady) s.t_sde = get<double>(doc, nullptr, "t_sde");
    s.hidden = get<std::vector<int>>(doc, "network", "hidden_widths");
    s.d = get<int>(doc, "network", "latent_dim");
    s.K = get<int>(doc, "bank", "K");
    s.normalize_w = get<bool>(doc, "bank", "normalize_w");
    c.bank_init.normalize_w = s.normalize_w;
    c.bank_init.w_std = get<double>(doc, "bank", "w_std");
    c.bank_init.kappa_std = get<double>(doc, "bank", "kappa_std");
    c.train_w = get<bool>(doc, "bank", "train_w");
    c.train_kappa = get<bool>(doc, "bank", "train_kappa");
    c.train_phase = get<bool>(doc, "bank", "train_phase");
    s.M = get<int>(doc, "batch", "M");
    s.M0 = get<int>(doc, "batch", "M0");
    s.MT = get<int>(doc, "batch", "MT");
    s.epochs = get<int>(doc, "train", "epochs");
    c.lr_generator = get<double>(doc, "train", "lr_generator");
    c.lr_adversary = get<double>(doc, "train", "lr_adversary");
    c.min_lr_ratio = get<double>(doc, "train", "min_lr_ratio");
    c.adversary_steps = get<int>(doc, "train", "adversary_steps");
    c.clip_norm = get<double>(doc, "train", "clip_norm");
    s.drift.theta = get<double>(doc, "drift", "theta");
    s.drift.mu = get<double>(doc, "drift", "mu");
    s.drift.k = get<double>(doc, "drift", "k");
    s.drift.r0 = get<double>(doc, "drift", "r0");
    s.drift.omega = get<double>(doc, "drift", "omega");
    s.drift.coefficients = get<std::vector<double>>(doc, "drift", "coefficients");
    try {
        if (s.kind == ProblemKind::transient)
            s.initial = law_from(doc.at("initial").at("means"), doc.at("initial").at("std").get<double>());
        s.particle_initial =
            law_from(doc.at("particles").at("initial_means"), doc.at("particles").at("initial_std").get<double>());
    } catch (const json::exception&) {
        throw ConfigError("initial law must be {means: [[...], ...], std: number}");
    }
    if (s.kind == ProblemKind::transient) s.particle_initial = s.initial;
    s.dt = get<double>(doc, "particles", "dt");
    s.n_particles = get<int>(doc, "particles", "n_particles");
    s.snapshot_times = get<std::vector<double>>(doc, "particles", "snapshot_times");
    c.jump_limit = get<double>(doc, "particles", "jump_limit");
    c.max_drift_step = get<double>(doc, "particles", "max_drift_step");
    c.stationarity_tol = get<double>(doc, "particles", "stationarity_tol");
    c.eval_samples = get<int>(doc, "evaluation", "samples");
    c.cf_grid = get<std::vector<double>>(doc, "evaluation", "cf_grid");
    c.thresholds.median = doc.at("evaluation").at("thresholds").value("median", 0.1);
    c.thresholds.rel_iqr = doc.at("evaluation").at("thresholds").value("rel_iqr", 0.2);
    c.thresholds.cf = doc.at("evaluation").at("thresholds").value("cf", 0.05);

    const double horizon = s.kind == ProblemKind::steady ? s.t_sde : s.T;
    c.epsilon = doc.at("epsilon").is_null() ? 1e-3 * horizon : get<double>(doc, nullptr, "epsilon");
    const auto& window = doc.at("particles").at("stationarity_window");
    c.stationarity_window = window.is_null() ? horizon / 10.0 : get<double>(doc, "particles", "stationarity_window");
    return c;
}

void validate(const RunConfig& c) {
    const ExperimentSpec& s = c.spec;
    const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (!(s.alpha > 0.0 && s.alpha <= 2.0)) fail("alpha must lie in (0, 2]");
    const bool fixed_dim = s.id != "harmonic_5d" && s.id != "custom_1d";
    if (fixed_dim && s.n != paper_spec(s.id).n) fail("dim is fixed at " + std::to_string(paper_spec(s.id).n) + " for " + s.id);
    if (s.id == "custom_1d" && s.n != 1) fail("custom_1d is one-dimensional");
    if (s.n < 1 || s.d < 1 || s.K < 1) fail("dim, latent_dim and K must be >= 1");
    if (s.M < 1 || s.M0 < 1 || s.MT < 1) fail("batch sizes must be >= 1");
    if (s.epochs < 0) fail("epochs must be >= 0");
    for (int w : s.hidden)
        if (w < 1) fail("hidden widths must be >= 1");
    if (s.kind == ProblemKind::transient) {
        if (!(s.T > 0.0)) fail("T must be positive");
        if (!(c.epsilon > 0.0 && c.epsilon < s.T)) fail("epsilon must lie in (0, T)");
        if (s.initial.dim() != s.n) fail("initial means must have dim entries");
        for (double t : s.snapshot_times)
            if (t < 0.0 || t > s.T + 1e-12) fail("snapshot times must lie in [0, T]");
    } else {
        if (!(s.t_sde > 0.0)) fail("t_sde must be positive");
        if (!(c.stationarity_window > 0.0 && 2.0 * c.stationarity_window <= s.t_sde))
            fail("stationarity_window must be positive with two windows inside t_sde");
    }
    if (s.particle_initial.dim() != s.n) fail("particle initial means must have dim entries");
    for (const auto& m : s.particle_initial.means)
        if (m.size() != s.n) fail("all initial means must have dim entries");
    if (!(s.dt > 0.0)) fail("particles.dt must be positive");
    if (s.n_particles < 1) fail("particles.n_particles must be >= 1");
    if (!(c.jump_limit > 0.0)) fail("particles.jump_limit must be positive");
    if (!(c.max_drift_step > 0.0)) fail("particles.max_drift_step must be positive");
    if (!(c.lr_generator > 0.0 && c.lr_adversary > 0.0)) fail("learning rates must be positive");
    if (c.adversary_steps < 1) fail("adversary_steps must be >= 1");
    if (!(c.clip_norm > 0.0)) fail("clip_norm must be positive");
    if (c.eval_samples < 2) fail("evaluation.samples must be >= 2");
    if (s.id == "custom_1d" && s.drift.coefficients.empty()) fail("custom_1d needs drift.coefficients");
}

std::map<std::string, std::string> run_header(const RunConfig& config) {
    return {{"experiment", config.spec.id}, {"preset", config.preset}, {"seed", std::to_string(config.seed)}};
}

TrainedModel load_model(const RunConfig& config, const std::filesystem::path& dir) {
    const auto gen_path = dir / "generator.json";
    const auto bank_path = dir / "bank.json";
    if (!std::filesystem::exists(gen_path)) throw ConfigError("checkpoint not found: " + gen_path.string());
    const auto ckpt = load_checkpoint(gen_path);
    const auto it = ckpt.header.find("experiment");
    if (it != ckpt.header.end() && it->second != config.spec.id)
        throw ConfigError("checkpoint was trained for '" + it->second + "', not '" + config.spec.id + "'");
    TrainedModel model;
    model.kind = config.spec.kind;
    if (model.kind == ProblemKind::transient) {
        model.transient = load_transient(gen_path);
        if (model.transient.n != config.spec.n) throw ConfigError("checkpoint dimension does not match experiment");
    } else {
        model.steady = load_steady(gen_path);
        if (model.steady.n != config.spec.n) throw ConfigError("checkpoint dimension does not match experiment");
    }
    if (std::filesystem::exists(bank_path)) model.bank = load_bank(bank_path);
    return model;
}

std::vector<Snapshot> snapshots_at(const std::vector<Snapshot>& all, const std::vector<double>& times, double dt) {
    std::vector<Snapshot> out;
    for (double t : times) {
        for (const auto& s : all)
            if (std::abs(s.time - t) <= 0.5 * dt) {
                out.push_back(s);
                break;
            }
    }
    return out;
}

std::string csv_row(std::initializer_list<std::string> cells) {
    std::string out;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) out += ',';
        out += c;
        first = false;
    }
    return out + '\n';
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

std::string config_to_json(const RunConfig& c) {
    const ExperimentSpec& s = c.spec;
    json doc;
    doc["experiment"] = s.id;
    doc["preset"] = c.preset;
    doc["kind"] = to_string(s.kind);
    doc["seed"] = c.seed;
    doc["alpha"] = s.alpha;
    doc["dim"] = s.n;
    doc["T"] = s.kind == ProblemKind::transient ? json(s.T) : json(nullptr);
    doc["t_sde"] = s.kind == ProblemKind::steady ? json(s.t_sde) : json(nullptr);
    doc["epsilon"] = c.epsilon;
    doc["network"] = {{"hidden_widths", s.hidden}, {"latent_dim", s.d}};
    doc["bank"] = {{"K", s.K},
                   {"normalize_w", s.normalize_w},
                   {"w_std", c.bank_init.w_std},
                   {"kappa_std", c.bank_init.kappa_std},
                   {"train_w", c.train_w},
                   {"train_kappa", c.train_kappa},
                   {"train_phase", c.train_phase}};
    doc["batch"] = {{"M", s.M}, {"M0", s.M0}, {"MT", s.MT}};
    doc["train"] = {{"epochs", s.epochs},
                    {"lr_generator", c.lr_generator},
                    {"lr_adversary", c.lr_adversary},
                    {"min_lr_ratio", c.min_lr_ratio},
                    {"adversary_steps", c.adversary_steps},
                    {"clip_norm", c.clip_norm}};
    doc["drift"] = {{"theta", s.drift.theta}, {"mu", s.drift.mu},       {"k", s.drift.k},
                    {"r0", s.drift.r0},       {"omega", s.drift.omega}, {"coefficients", s.drift.coefficients}};
    doc["initial"] = {{"means", law_means(s.initial)}, {"std", s.initial.std}};
    doc["particles"] = {{"dt", s.dt},
                        {"n_particles", s.n_particles},
                        {"snapshot_times", s.snapshot_times},
                        {"jump_limit", c.jump_limit},
                        {"max_drift_step", c.max_drift_step},
                        {"stationarity_window", c.stationarity_window},
                        {"stationarity_tol", c.stationarity_tol},
                        {"initial_means", law_means(s.particle_initial)},
                        {"initial_std", s.particle_initial.std}};
    doc["evaluation"] = {
        {"samples", c.eval_samples},
        {"cf_grid", c.cf_grid},
        {"thresholds", {{"median", c.thresholds.median}, {"rel_iqr", c.thresholds.rel_iqr}, {"cf", c.thresholds.cf}}}};
    return doc.dump(2) + "\n";
}

RunConfig resolve_config(const std::string& experiment, const std::string& preset,
                         const std::optional<std::filesystem::path>& config_file,
                         const std::optional<std::uint64_t>& seed, const std::vector<std::string>& overrides) {
    json file_doc = json::object();
    if (config_file) {
        try {
            file_doc = json::parse(io::read_text(*config_file));
        } catch (const json::exception& e) {
            throw ConfigError("cannot parse config file " + config_file->string() + ": " + e.what());
        }
        if (!file_doc.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    std::string id = experiment;
    if (id.empty() && file_doc.contains("experiment")) id = file_doc.at("experiment").get<std::string>();
    if (id.empty()) throw ConfigError("no experiment given (use --experiment or an 'experiment' key)");
    if (!is_known_experiment(id)) throw ConfigError("unknown experiment id '" + id + "'");
    std::string scale = preset;
    if (scale.empty() && file_doc.contains("preset")) scale = file_doc.at("preset").get<std::string>();
    if (scale.empty()) scale = "desk";

    json doc = preset_json(id, scale);
    file_doc.erase("experiment");
    file_doc.erase("preset");
    if (file_doc.contains("kind") && file_doc.at("kind") != doc.at("kind"))
        throw ConfigError("config kind does not match experiment '" + id + "'");
    check_keys(file_doc, doc, "");
    merge(doc, file_doc);
    for (const auto& o : overrides) apply_override(doc, o);
    if (doc.at("experiment") != id || doc.at("preset") != scale || doc.at("kind") != preset_json(id, scale).at("kind"))
        throw ConfigError("experiment, preset and kind cannot be overridden with key=value; use the flags");
    if (seed) doc["seed"] = *seed;
    RunConfig config = from_json(doc);
    validate(config);
    return config;
}

TrainedModel train_experiment(const RunConfig& config, const std::function<void(int, double)>& progress) {
    validate(config);
    const ExperimentSpec& s = config.spec;
    auto gen_stream = RandomStream::substream(config.seed, stream_domain::kGeneratorInit, 0);
    auto bank_stream = RandomStream::substream(config.seed, stream_domain::kBankInit, 0);
    const bool steady = s.kind == ProblemKind::steady;

    TrainedModel model;
    model.kind = s.kind;
    PlaneWaveBank bank = init_bank(s.K, s.n, steady, config.bank_init, bank_stream);
    bank.train_w = config.train_w;
    bank.train_kappa = config.train_kappa && !steady;
    bank.train_phase = config.train_phase;

    TrainConfig tc;
    tc.epochs = s.epochs;
    tc.lr_generator = config.lr_generator;
    tc.lr_adversary = config.lr_adversary;
    tc.min_lr_ratio = config.min_lr_ratio;
    tc.adversary_steps = config.adversary_steps;
    tc.clip_norm = config.clip_norm;
    tc.seed = config.seed;
    tc.progress = progress;

    const DriftField drift = make_drift(s);
    TrainResult result;
    if (steady) {
        model.steady = SteadyPushforward::create(s.n, s.d, s.hidden, gen_stream);
        SteadyProblem problem{drift, s.alpha, s.M, network_generator(model.steady)};
        result = train(problem, model.steady.params, std::move(bank), tc);
        model.steady.params = result.generator_params;
    } else {
        model.transient = TransientPushforward::create(s.n, s.d, s.hidden, gen_stream);
        TransientProblem problem{drift, s.alpha, initial_sampler(s), {s.M, s.M0, s.MT, config.epsilon, s.T},
                                 network_generator(model.transient)};
        result = train(problem, model.transient.params, std::move(bank), tc);
        model.transient.params = result.generator_params;
    }
    model.bank = std::move(result.bank);
    model.history = std::move(result.history);
    return model;
}

Matrix sample_learned(const RunConfig& config, const TrainedModel& model, double t, int count,
                      std::uint64_t stream_index) {
    if (count < 1) throw ContractError("need at least one learned sample");
    auto stream = RandomStream::substream(config.seed, stream_domain::kEvaluation, stream_index);
    if (model.kind == ProblemKind::steady) return sample_steady(model.steady, draw_normal(count, model.steady.d, stream));
    const InitialSampler init = initial_sampler(config.spec);
    Matrix x0(count, config.spec.n);
    for (int i = 0; i < count; ++i) x0.row(i) = init(stream).transpose();
    const Matrix r = draw_normal(count, model.transient.d, stream);
    return sample_transient(model.transient, Vector::Constant(count, t), x0, r);
}

BenchmarkRun simulate_experiment(const RunConfig& config, const std::vector<double>& times) {
    validate(config);
    const ExperimentSpec& s = config.spec;
    SimConfig sim;
    sim.alpha = s.alpha;
    sim.dt = s.dt;
    sim.n_particles = s.n_particles;
    sim.seed = config.seed;
    sim.jump_limit = config.jump_limit;
    sim.max_drift_step = config.max_drift_step;
    const DriftField drift = make_drift(s);
    BenchmarkRun run;
    if (s.kind == ProblemKind::steady) {
        sim.t_end = s.t_sde;
        auto result =
            run_to_stationarity(sim, drift, particle_initial_sampler(s), config.stationarity_window, config.stationarity_tol);
        run.metadata = result.metadata;
        run.stationary = result.stationary;
        run.snapshots.push_back({s.t_sde, result.terminal.time, std::move(result.terminal)});
    } else {
        sim.t_end = s.T;
        sim.snapshot_times = times;
        auto result = simulate(sim, drift, particle_initial_sampler(s));
        run.metadata = result.metadata;
        run.snapshots = std::move(result.snapshots);
    }
    return run;
}

int cmd_train(const RunConfig& config, const std::filesystem::path& out) {
    io::write_text(out / "resolved_config.json", config_to_json(config));
    const int every = std::max(1, config.spec.epochs / 10);
    const TrainedModel model = train_experiment(config, [&](int epoch, double loss) {
        if (epoch % every == 0 || epoch + 1 == config.spec.epochs)
            std::cerr << "epoch " << epoch << " loss " << loss << '\n';
    });
    if (model.kind == ProblemKind::steady) {
        save_pushforward(out / "generator.json", model.steady, run_header(config));
    } else {
        save_pushforward(out / "generator.json", model.transient, run_header(config));
    }
    save_bank(out / "bank.json", model.bank);
    write_history_csv(out / "history.csv", model.history);
    return 0;
}

int cmd_simulate(const RunConfig& config, const std::filesystem::path& out) {
    io::write_text(out / "resolved_config.json", config_to_json(config));
    const BenchmarkRun run = simulate_experiment(config, config.spec.snapshot_times);
    write_snapshots_csv(out / "snapshots.csv", run.snapshots);
    std::vector<std::pair<std::string, std::string>> extra{{"experiment", config.spec.id},
                                                           {"kind", to_string(config.spec.kind)}};
    std::string requested, used;
    for (const auto& snap : run.snapshots) {
        requested += (requested.empty() ? "" : " ") + fmt(snap.requested_time);
        used += (used.empty() ? "" : " ") + fmt(snap.time);
    }
    extra.emplace_back("requested_times", requested);
    extra.emplace_back("snapshot_times", used);
    if (run.stationary) {
        extra.emplace_back("stationary", *run.stationary ? "true" : "false");
        std::cerr << "stationarity: " << (*run.stationary ? "reached" : "NOT reached") << '\n';
    }
    write_metadata(out / "metadata.txt", run.metadata, extra);
    return 0;
}

int cmd_evaluate(const RunConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                 const std::filesystem::path& particles, const std::optional<std::filesystem::path>& learned_csv,
                 const std::filesystem::path& out) {
    const auto meta_path = particles / "metadata.txt";
    const auto snap_path = particles / "snapshots.csv";
    if (!std::filesystem::exists(snap_path)) throw ConfigError("particle snapshots not found: " + snap_path.string());
    if (std::filesystem::exists(meta_path)) {
        const auto meta = io::read_key_values(meta_path);
        const auto it = meta.find("experiment");
        if (it != meta.end() && it->second != config.spec.id)
            throw ConfigError("particle run is for '" + it->second + "', not '" + config.spec.id + "'");
    }
    const auto particle_snaps = read_snapshots_csv(snap_path);
    for (const auto& snap : particle_snaps)
        if (snap.ensemble.dim() != config.spec.n) throw ConfigError("particle dimension does not match experiment");

    std::vector<Snapshot> learned;
    std::string source;
    if (learned_csv) {
        learned = snapshots_at(read_snapshots_csv(*learned_csv), [&] {
            std::vector<double> times;
            for (const auto& s : particle_snaps) times.push_back(s.time);
            return times;
        }(), config.spec.dt);
        if (learned.size() != particle_snaps.size())
            throw ConfigError("learned CSV lacks some particle snapshot times");
        source = learned_csv->string();
    } else {
        if (!checkpoint) throw ConfigError("evaluate needs --checkpoint or --learned");
        const TrainedModel model = load_model(config, *checkpoint);
        for (std::size_t i = 0; i < particle_snaps.size(); ++i) {
            const double t = particle_snaps[i].time;
            Snapshot snap;
            snap.requested_time = snap.time = t;
            snap.ensemble = {sample_learned(config, model, t, config.eval_samples, i), t};
            learned.push_back(std::move(snap));
        }
        source = (*checkpoint / "generator.json").string();
    }

    CompareOptions options{config.spec.alpha, config.cf_grid};
    std::vector<RobustReport> reports;
    for (std::size_t i = 0; i < particle_snaps.size(); ++i)
        reports.push_back(compare(learned[i].ensemble.states, particle_snaps[i].ensemble.states, particle_snaps[i].time,
                                  options));
    write_snapshots_csv(out / "learned_snapshots.csv", learned);
    write_report_csv(out / "report.csv", reports);
    write_deltas_csv(out / "deltas.csv", reports);
    if (config.spec.id == "ou_steady" && !reports.empty())
        write_cf_csv(out / "cf.csv", reports.back(), config.spec.alpha, config.spec.drift.theta, config.spec.drift.mu);

    std::string meta = "experiment=" + config.spec.id + "\npreset=" + config.preset + "\nsource=" + source +
                       "\nthreshold_median=" + fmt(config.thresholds.median) +
                       "\nthreshold_rel_iqr=" + fmt(config.thresholds.rel_iqr) +
                       "\nthreshold_cf=" + fmt(config.thresholds.cf) + "\n";
    io::write_text(out / "evaluation.txt", meta);
    io::write_text(out / "resolved_config.json", config_to_json(config));
    return 0;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<RobustReport>& reports) {
    std::string out = "time,coord,source,median,iqr,mad,p10,p90,mean,std,n\n";
    for (const auto& r : reports) {
        for (std::size_t j = 0; j < r.coords.size(); ++j) {
            for (int which = 0; which < 2; ++which) {
                const RobustSummary& s = which == 0 ? r.coords[j].learned : r.coords[j].particle;
                out += csv_row({fmt(r.time), std::to_string(j + 1), which == 0 ? "learned" : "particle", fmt(s.median),
                                fmt(s.iqr), fmt(s.mad), fmt(s.p10), fmt(s.p90), fmt(s.mean), fmt(s.std),
                                std::to_string(s.n)});
            }
        }
    }
    io::write_text(path, out);
}

void write_deltas_csv(const std::filesystem::path& path, const std::vector<RobustReport>& reports) {
    std::string out = "time,coord,d_median,d_iqr,d_mad,d_p10,d_p90,rel_iqr,cf_distance\n";
    for (const auto& r : reports) {
        const std::string cf = r.cf_distance ? fmt(*r.cf_distance) : "";
        for (std::size_t j = 0; j < r.coords.size(); ++j) {
            const auto& c = r.coords[j];
            out += csv_row({fmt(r.time), std::to_string(j + 1), fmt(c.d_median), fmt(c.d_iqr), fmt(c.d_mad),
                            fmt(c.d_p10), fmt(c.d_p90), fmt(c.rel_iqr), cf});
        }
    }
    io::write_text(path, out);
}

void write_cf_csv(const std::filesystem::path& path, const RobustReport& report, double alpha, double theta,
                  double mu) {
    std::string out = "xi,re_learned,im_learned,re_particle,im_particle,re_theory,im_theory\n";
    for (std::size_t i = 0; i < report.cf_grid.size(); ++i) {
        const auto theory = stable_cf_theory(alpha, theta, mu, report.cf_grid[i]);
        out += csv_row({fmt(report.cf_grid[i]), fmt(report.ecf_learned[i].real()), fmt(report.ecf_learned[i].imag()),
                        fmt(report.ecf_particle[i].real()), fmt(report.ecf_particle[i].imag()), fmt(theory.real()),
                        fmt(theory.imag())});
    }
    io::write_text(path, out);
}

int cmd_report(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("report directory not found: " + dir.string());
    std::vector<std::filesystem::path> runs;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().filename() == "evaluation.txt") runs.push_back(entry.path().parent_path());
    std::sort(runs.begin(), runs.end());
    if (runs.empty()) throw ConfigError("no evaluate outputs (evaluation.txt) under " + dir.string());

    std::string csv = "experiment,run,time,coord,metric,value,threshold,pass\n";
    std::ostringstream text;
    int failures = 0;
    for (const auto& run : runs) {
        const auto meta = io::read_key_values(run / "evaluation.txt");
        const auto lookup = [&](const std::string& key) {
            const auto it = meta.find(key);
            if (it == meta.end()) throw ConfigError("evaluation.txt in " + run.string() + " lacks " + key);
            return it->second;
        };
        const std::string id = lookup("experiment");
        const double t_median = io::parse_double(lookup("threshold_median"));
        const double t_iqr = io::parse_double(lookup("threshold_rel_iqr"));
        const double t_cf = io::parse_double(lookup("threshold_cf"));
        const auto table = io::read_csv(run / "deltas.csv");
        const auto ct = table.column("time"), cc = table.column("coord"), cm = table.column("d_median"),
                   ci = table.column("rel_iqr"), cf = table.column("cf_distance");
        const std::string rel = std::filesystem::relative(run, dir).string();
        int run_pass = 0, run_total = 0;
        auto add = [&](const std::vector<std::string>& row, const std::string& metric, double value, double threshold) {
            const bool pass = value <= threshold;
            ++run_total;
            run_pass += pass ? 1 : 0;
            failures += pass ? 0 : 1;
            csv += csv_row({id, rel.empty() ? "." : rel, row[ct], row[cc], metric, fmt(value), fmt(threshold),
                            pass ? "true" : "false"});
        };
        for (const auto& row : table.rows) {
            add(row, "abs_d_median", std::abs(io::parse_double(row[cm])), t_median);
            add(row, "rel_iqr", io::parse_double(row[ci]), t_iqr);
            if (!row[cf].empty() && row[cc] == "1") add(row, "cf_distance", io::parse_double(row[cf]), t_cf);
        }
        text << id << " (" << (rel.empty() ? "." : rel) << "): " << run_pass << "/" << run_total << " checks pass\n";
    }
    io::write_text(dir / "summary.csv", csv);
    io::write_text(dir / "summary.txt", text.str());
    std::cout << text.str();
    return 0;
}

}  // namespace wanpm
