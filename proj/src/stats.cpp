#include "wanpm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "wanpm/error.hpp"

namespace wanpm {
namespace {

constexpr double kQuadratureTolerance = 1e-6;

std::vector<double> column_values(const Eigen::MatrixXd& m, Eigen::Index j) {
    std::vector<double> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, j);
    return out;
}

// CDF of the unit-scale, zero-location law at z.
double standard_stable_cdf(double alpha, double z) {
    if (z == 0.0) return 0.5;
    // F(z) = 1/2 + (1/pi) int_0^inf sin(u z) exp(-u^alpha) / u du.
    // exp(-u^alpha) < 1e-20 beyond u_max.
    const double u_max = std::pow(46.0, 1.0 / alpha);
    auto integrand = [alpha, z](double u) {
        if (u == 0.0) return z;
        return std::sin(u * z) * std::exp(-std::pow(u, alpha)) / u;
    };
    // Split at the oscillation scale so each panel resolves a bounded number of periods.
    const double period = 2.0 * std::numbers::pi / std::abs(z);
    const int panels = std::clamp(static_cast<int>(std::ceil(u_max / period)), 1, 4096);
    double total = 0.0;
    double abs_total = 0.0;
    double error = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double a = u_max * k / panels;
        const double b = u_max * (k + 1) / panels;
        double panel_error = 0.0;
        double l1 = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, 1e-12,
                                                                               &panel_error, &l1);
        abs_total += l1;
        error += panel_error;
    }
    if (!(error <= kQuadratureTolerance * std::max(std::abs(total), 1e-3))) {
        std::ostringstream msg;
        msg << "stable CDF quadrature did not converge: alpha=" << alpha << " z=" << z << " estimate=" << total
            << " error=" << error << " L1=" << abs_total;
        throw NumericError(msg.str());
    }
    return std::clamp(0.5 + total / std::numbers::pi, 0.0, 1.0);
}

}  // namespace

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ContractError("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("percentile level must lie in [0, 1]");
    const double index = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(index));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = index - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double percentile(std::span<const double> samples, double p) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, p);
}

RobustSummary robust_summary(std::span<const double> samples, double alpha) {
    if (samples.empty()) throw ContractError("robust summary of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    RobustSummary s;
    s.n = sorted.size();
    s.median = percentile_sorted(sorted, 0.5);
    s.p10 = percentile_sorted(sorted, 0.10);
    s.p25 = percentile_sorted(sorted, 0.25);
    s.p75 = percentile_sorted(sorted, 0.75);
    s.p90 = percentile_sorted(sorted, 0.90);
    s.iqr = s.p75 - s.p25;

    std::vector<double> deviations(sorted.size());
    std::transform(sorted.begin(), sorted.end(), deviations.begin(), [&](double x) { return std::abs(x - s.median); });
    std::sort(deviations.begin(), deviations.end());
    s.mad = percentile_sorted(deviations, 0.5);

    // Accumulate in input order so the result does not depend on sorting.
    double sum = 0.0;
    for (double x : samples) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    double sq = 0.0;
    for (double x : samples) sq += (x - s.mean) * (x - s.mean);
    s.std = s.n > 1 ? std::sqrt(sq / static_cast<double>(s.n - 1)) : 0.0;
    s.std_reliable = alpha >= 2.0;
    return s;
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, std::span<const double> xi_grid) {
    std::vector<std::complex<double>> out;
    out.reserve(xi_grid.size());
    const double inv_n = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());
    for (double xi : xi_grid) {
        if (!std::isfinite(xi)) throw ContractError("CF grid must be finite");
        double re = 0.0;
        double im = 0.0;
        for (double x : samples) {
            re += std::cos(xi * x);
            im += std::sin(xi * x);
        }
        out.emplace_back(re * inv_n, im * inv_n);
    }
    return out;
}

std::complex<double> stable_cf_theory(double alpha, double theta, double mu, double xi) {
    if (!(theta > 0.0)) throw DomainError("theta must be positive");
    const double modulus = std::exp(-std::pow(std::abs(xi), alpha) / (alpha * theta));
    return std::polar(modulus, mu * xi);
}

double fou_stationary_scale(double alpha, double theta) {
    if (!(theta > 0.0)) throw DomainError("theta must be positive");
    return std::pow(alpha * theta, -1.0 / alpha);
}

double stable_cdf(double alpha, double scale, double location, double x) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    return standard_stable_cdf(alpha, (x - location) / scale);
}

double stable_quantile_oracle(double alpha, double scale, double location, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    if (!(scale > 0.0)) throw DomainError("scale must be positive");
    if (p == 0.5) return location;
    if (p < 0.5) return 2.0 * location - stable_quantile_oracle(alpha, scale, location, 1.0 - p);

    auto f = [&](double z) { return standard_stable_cdf(alpha, z) - p; };
    double hi = 1.0;
    while (f(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("stable quantile bracket exceeded 1e12");
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, 0.5 - p, f(hi),
                                                          boost::math::tools::eps_tolerance<double>(45), max_iter);
    return location + scale * 0.5 * (a + b);
}

Histogram histogram(std::span<const double> samples, double lo, double hi, int bins) {
    if (!(lo < hi)) throw ContractError("histogram needs lo < hi");
    if (bins < 1) throw ContractError("histogram needs at least one bin");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.n = samples.size();
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double x : samples) {
        if (x < lo) {
            ++h.below;
        } else if (x > hi) {
            ++h.above;
        } else {
            auto idx = static_cast<std::size_t>((x - lo) / width);
            if (idx >= counts.size()) idx = counts.size() - 1;
            ++counts[idx];
        }
    }
    h.heights.resize(counts.size());
    const double norm = h.n == 0 ? 0.0 : 1.0 / (static_cast<double>(h.n) * width);
    for (std::size_t i = 0; i < counts.size(); ++i) h.heights[i] = static_cast<double>(counts[i]) * norm;
    return h;
}

std::vector<Mode> find_modes(const Histogram& hist, int smoothing_bins, double min_prominence) {
    const auto n = static_cast<int>(hist.heights.size());
    std::vector<double> smooth(hist.heights.size());
    const int half = std::max(smoothing_bins, 1) / 2;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        int count = 0;
        for (int k = std::max(0, i - half); k <= std::min(n - 1, i + half); ++k) {
            acc += hist.heights[k];
            ++count;
        }
        smooth[i] = acc / count;
    }
    const double tallest = *std::max_element(smooth.begin(), smooth.end());
    std::vector<Mode> modes;
    if (!(tallest > 0.0)) return modes;
    int i = 0;
    while (i < n) {
        // Collapse plateaus to their midpoint.
        int j = i;
        while (j + 1 < n && smooth[j + 1] == smooth[i]) ++j;
        const bool left_lower = i == 0 || smooth[i - 1] < smooth[i];
        const bool right_lower = j == n - 1 || smooth[j + 1] < smooth[i];
        if (left_lower && right_lower && smooth[i] > 0.0) {
            const double h = smooth[i];
            double left_min = h;
            for (int k = i - 1; k >= 0 && smooth[k] <= h; --k) left_min = std::min(left_min, smooth[k]);
            double right_min = h;
            for (int k = j + 1; k < n && smooth[k] <= h; ++k) right_min = std::min(right_min, smooth[k]);
            const double prominence = h - std::max(left_min, right_min);
            if (prominence >= min_prominence * tallest) {
                const double center = 0.5 * (hist.bin_center(static_cast<std::size_t>(i)) +
                                             hist.bin_center(static_cast<std::size_t>(j)));
                modes.push_back({center, h, prominence});
            }
        }
        i = j + 1;
    }
    return modes;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw ContractError("KS distance of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - f), std::abs(f - static_cast<double>(i) / n)});
    }
    return d;
}

std::vector<double> default_cf_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 8; ++k) grid.push_back(0.25 * k);
    return grid;
}

RobustReport compare(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& particle, double snapshot_time,
                     const CompareOptions& options) {
    if (learned.rows() == 0 || particle.rows() == 0) throw ContractError("compare needs non-empty sample sets");
    if (learned.cols() != particle.cols()) throw ContractError("compare: dimension mismatch");
    RobustReport report;
    report.time = snapshot_time;
    report.cf_grid = options.cf_grid;
    for (Eigen::Index j = 0; j < learned.cols(); ++j) {
        CoordinateComparison c;
        const auto lv = column_values(learned, j);
        const auto pv = column_values(particle, j);
        c.learned = robust_summary(lv, options.alpha);
        c.particle = robust_summary(pv, options.alpha);
        c.d_median = c.learned.median - c.particle.median;
        c.d_iqr = c.learned.iqr - c.particle.iqr;
        c.d_mad = c.learned.mad - c.particle.mad;
        c.d_p10 = c.learned.p10 - c.particle.p10;
        c.d_p90 = c.learned.p90 - c.particle.p90;
        c.rel_iqr = c.particle.iqr > 0.0 ? std::abs(c.d_iqr) / c.particle.iqr : (c.d_iqr == 0.0 ? 0.0 : INFINITY);
        report.coords.push_back(c);

        if (!options.cf_grid.empty()) {
            const auto el = empirical_cf(lv, options.cf_grid);
            const auto ep = empirical_cf(pv, options.cf_grid);
            double dist = report.cf_distance.value_or(0.0);
            for (std::size_t k = 0; k < el.size(); ++k) dist = std::max(dist, std::abs(el[k] - ep[k]));
            report.cf_distance = dist;
            if (j == 0) {
                report.ecf_learned = el;
                report.ecf_particle = ep;
            }
        }
    }
    return report;
}

}  // namespace wanpm
