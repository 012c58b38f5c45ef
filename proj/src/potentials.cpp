#include "wanpm/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "wanpm/error.hpp"

namespace wanpm {
namespace {

Vector vec(std::initializer_list<double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v(i++) = x;
    return v;
}

DriftField scalar_drift(std::function<double(double)> b, std::function<double(double)> db) {
    return DriftField(
        1, [b](std::span<const double> x, std::span<double> out) { out[0] = b(x[0]); },
        [db](std::span<const double> x, std::span<double> jac) { jac[0] = db(x[0]); });
}

ExperimentSpec base_spec(const std::string& id) {
    ExperimentSpec s;
    s.id = id;
    if (id == "ou_steady") {
        s.kind = ProblemKind::steady;
        s.n = 1;
        s.t_sde = 50.0;
        s.K = 200;
        s.d = 5;
        s.epochs = 3000;
        s.M = 2000;
        s.particle_initial = {{vec({0.0})}, 1.0};
        s.snapshot_times = {50.0};
    } else if (id == "harmonic_1d") {
        s.T = 2.0;
        s.K = 2000;
        s.d = 5;
        s.epochs = 1000;
        s.M = 2000;
        s.M0 = s.MT = 1000;
        s.normalize_w = true;
        s.initial = {{vec({1.0})}, 0.3};
        s.snapshot_times = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0};
    } else if (id == "double_well") {
        s.T = 2.0;
        s.K = 3000;
        s.d = 8;
        s.epochs = 10000;
        s.M = 2000;
        s.M0 = s.MT = 1000;
        s.initial = {{vec({0.0})}, 0.3};
        s.snapshot_times = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    } else if (id == "triple_well") {
        s.T = 2.5;
        s.K = 2000;
        s.d = 8;
        s.epochs = 5000;
        s.M = 2000;
        s.M0 = s.MT = 1000;
        s.initial = {{vec({-0.5}), vec({0.5})}, 0.15};
        s.snapshot_times = {0.0, 0.1, 0.2, 0.5, 0.8, 1.0, 1.5, 2.0, 2.5};
    } else if (id == "double_peak_2d_steady") {
        s.kind = ProblemKind::steady;
        s.n = 2;
        s.t_sde = 20.0;
        s.K = 300;
        s.d = 8;
        s.epochs = 10000;
        s.M = 2000;
        s.particle_initial = {{vec({0.0, 0.0})}, 1.0};
        s.snapshot_times = {20.0};
    } else if (id == "ring_2d") {
        s.n = 2;
        s.T = 0.5;
        s.K = 300;
        s.d = 8;
        s.epochs = 5000;
        s.M = 3000;
        s.M0 = s.MT = 1000;
        s.hidden = {128, 128, 128, 128};
        s.initial = {{vec({0.0, 1.2})}, 0.4};
        s.snapshot_times = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    } else if (id == "harmonic_5d") {
        s.n = 5;
        s.T = 1.0;
        s.K = 2000;
        s.d = 5;
        s.epochs = 500;
        s.M = 2000;
        s.M0 = s.MT = 1000;
        s.hidden = {128, 128, 128, 128};
        s.initial = {{Vector::Constant(5, 3.0)}, 0.5};
        s.snapshot_times = {0.0, 0.25, 0.5, 0.75, 1.0};
    } else if (id == "custom_1d") {
        s.T = 1.0;
        s.K = 200;
        s.d = 5;
        s.epochs = 200;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.drift.coefficients = {0.0, -1.0};
        s.initial = {{vec({0.0})}, 0.5};
        s.snapshot_times = {0.0, 0.5, 1.0};
    } else {
        throw ConfigError("unknown experiment id '" + id + "'");
    }
    if (s.kind == ProblemKind::transient) s.particle_initial = s.initial;
    return s;
}

}  // namespace

Vector InitialLaw::sample(RandomStream& stream) const {
    if (means.empty()) throw ContractError("initial law has no components");
    std::size_t component = 0;
    if (means.size() > 1) {
        component = static_cast<std::size_t>(stream.uniform() * static_cast<double>(means.size()));
        component = std::min(component, means.size() - 1);
    }
    const Vector& mean = means[component];
    Vector x(mean.size());
    for (Eigen::Index j = 0; j < mean.size(); ++j) x(j) = mean(j) + std * stream.normal();
    return x;
}

const std::vector<std::string>& experiment_ids() {
    static const std::vector<std::string> ids{"ou_steady",   "harmonic_1d",           "double_well",
                                              "triple_well", "double_peak_2d_steady", "ring_2d",
                                              "harmonic_5d", "custom_1d"};
    return ids;
}

bool is_known_experiment(const std::string& id) {
    const auto& ids = experiment_ids();
    return std::find(ids.begin(), ids.end(), id) != ids.end();
}

ExperimentSpec paper_spec(const std::string& id) { return base_spec(id); }

ExperimentSpec desk_spec(const std::string& id) {
    ExperimentSpec s = base_spec(id);
    if (id == "ou_steady") {
        s.K = 100;
        s.M = 1000;
        s.epochs = 800;
    } else if (id == "harmonic_1d") {
        s.K = 500;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.epochs = 200;
    } else if (id == "double_well") {
        s.K = 800;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.epochs = 1500;
    } else if (id == "triple_well") {
        s.K = 400;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.epochs = 1500;
    } else if (id == "double_peak_2d_steady") {
        s.K = 100;
        s.M = 1000;
        s.epochs = 2000;
    } else if (id == "ring_2d") {
        s.K = 100;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.epochs = 1000;
    } else if (id == "harmonic_5d") {
        s.K = 400;
        s.M = 1000;
        s.M0 = s.MT = 500;
        s.epochs = 300;
    }
    return s;
}

DriftField make_drift(const ExperimentSpec& spec) {
    const DriftParams p = spec.drift;
    const std::string& id = spec.id;
    if (id == "ou_steady") {
        return scalar_drift([p](double x) { return -p.theta * (x - p.mu); }, [p](double) { return -p.theta; });
    }
    if (id == "harmonic_1d") {
        return scalar_drift([p](double x) { return -p.k * x; }, [p](double) { return -p.k; });
    }
    if (id == "double_well") {
        return scalar_drift([](double x) { return -4.0 * x * (x * x - 1.0); },
                            [](double x) { return -12.0 * x * x + 4.0; });
    }
    if (id == "triple_well") {
        return scalar_drift([](double x) { return -2.0 * x * (x * x - 1.0) * (3.0 * x * x - 1.0); },
                            [](double x) { return -30.0 * std::pow(x, 4) + 24.0 * x * x - 2.0; });
    }
    if (id == "custom_1d") {
        const auto c = p.coefficients;
        if (c.empty()) throw ConfigError("custom_1d needs drift.coefficients");
        return scalar_drift(
            [c](double x) {
                double acc = 0.0;
                for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
                return acc;
            },
            [c](double x) {
                double acc = 0.0;
                for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
                return acc;
            });
    }
    if (id == "double_peak_2d_steady") {
        return DriftField(
            2,
            [](std::span<const double> x, std::span<double> out) {
                const double a = (x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1);
                const double b = (x[0] + 1) * (x[0] + 1) + (x[1] + 1) * (x[1] + 1);
                out[0] = -(2 * (x[0] - 1) * b + 2 * (x[0] + 1) * a);
                out[1] = -(2 * (x[1] - 1) * b + 2 * (x[1] + 1) * a);
            },
            [](std::span<const double> x, std::span<double> jac) {
                const double a = (x[0] - 1) * (x[0] - 1) + (x[1] - 1) * (x[1] - 1);
                const double b = (x[0] + 1) * (x[0] + 1) + (x[1] + 1) * (x[1] + 1);
                const double cross = 4 * ((x[0] - 1) * (x[1] + 1) + (x[0] + 1) * (x[1] - 1));
                jac[0] = -(2 * a + 2 * b + 8 * (x[0] * x[0] - 1));
                jac[1] = -cross;
                jac[2] = -cross;
                jac[3] = -(2 * a + 2 * b + 8 * (x[1] * x[1] - 1));
            });
    }
    if (id == "ring_2d") {
        return DriftField(
            2,
            [p](std::span<const double> x, std::span<double> out) {
                const double radial = -2.0 * (x[0] * x[0] + x[1] * x[1] - p.r0 * p.r0);
                out[0] = radial * x[0] - p.omega * x[1];
                out[1] = radial * x[1] + p.omega * x[0];
            },
            [p](std::span<const double> x, std::span<double> jac) {
                const double radial = -2.0 * (x[0] * x[0] + x[1] * x[1] - p.r0 * p.r0);
                jac[0] = radial - 4.0 * x[0] * x[0];
                jac[1] = -4.0 * x[0] * x[1] - p.omega;
                jac[2] = -4.0 * x[0] * x[1] + p.omega;
                jac[3] = radial - 4.0 * x[1] * x[1];
            });
    }
    if (id == "harmonic_5d") {
        const int n = spec.n;
        return DriftField(
            n,
            [p, n](std::span<const double> x, std::span<double> out) {
                for (int j = 0; j < n; ++j) out[j] = -p.k * x[j];
            },
            [p, n](std::span<const double>, std::span<double> jac) {
                std::fill(jac.begin(), jac.end(), 0.0);
                for (int j = 0; j < n; ++j) jac[j * n + j] = -p.k;
            });
    }
    throw ConfigError("unknown experiment id '" + id + "'");
}

double potential(const ExperimentSpec& spec, const Vector& x) {
    const DriftParams& p = spec.drift;
    const std::string& id = spec.id;
    if (x.size() != spec.n) throw ContractError("state dimension does not match the experiment");
    if (id == "ou_steady") return 0.5 * p.theta * (x(0) - p.mu) * (x(0) - p.mu);
    if (id == "harmonic_1d" || id == "harmonic_5d") return 0.5 * p.k * x.squaredNorm();
    if (id == "double_well") return (x(0) * x(0) - 1.0) * (x(0) * x(0) - 1.0);
    if (id == "triple_well") return x(0) * x(0) * (x(0) * x(0) - 1.0) * (x(0) * x(0) - 1.0);
    if (id == "double_peak_2d_steady") {
        const double a = (x(0) - 1) * (x(0) - 1) + (x(1) - 1) * (x(1) - 1);
        const double b = (x(0) + 1) * (x(0) + 1) + (x(1) + 1) * (x(1) + 1);
        return a * b;
    }
    if (id == "ring_2d") {
        const double u = x.squaredNorm() - p.r0 * p.r0;
        return 0.5 * u * u;
    }
    if (id == "custom_1d") {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.coefficients.size(); ++i)
            acc -= p.coefficients[i] * std::pow(x(0), static_cast<double>(i + 1)) / static_cast<double>(i + 1);
        return acc;
    }
    throw ConfigError("unknown experiment id '" + id + "'");
}

Vector drift_eval(const std::string& id, const Vector& x) {
    const ExperimentSpec spec = paper_spec(id);
    if (x.size() != spec.n) throw ContractError("state dimension does not match the experiment");
    return make_drift(spec)(x);
}

double potential_eval(const std::string& id, const Vector& x) { return potential(paper_spec(id), x); }

Vector initial_sample(const std::string& id, RandomStream& stream) {
    const ExperimentSpec spec = paper_spec(id);
    if (spec.kind == ProblemKind::steady) throw ContractError("steady experiment '" + id + "' has no initial law");
    return spec.initial.sample(stream);
}

InitialSampler initial_sampler(const ExperimentSpec& spec) {
    if (spec.kind == ProblemKind::steady) throw ContractError("steady experiment '" + spec.id + "' has no initial law");
    const InitialLaw law = spec.initial;
    return [law](RandomStream& stream) { return law.sample(stream); };
}

InitialSampler particle_initial_sampler(const ExperimentSpec& spec) {
    const InitialLaw law = spec.particle_initial;
    return [law](RandomStream& stream) { return law.sample(stream); };
}

std::string to_string(ProblemKind kind) { return kind == ProblemKind::steady ? "steady" : "transient"; }

}  // namespace wanpm
