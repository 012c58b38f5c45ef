#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace wanpm {

/// Robust per-coordinate summary. Percentiles use linear interpolation at the
/// fractional order-statistic index p*(n-1). MAD is the raw median absolute
/// deviation; multiply by 1.4826 for a normal-consistent scale.
struct RobustSummary {
    double median = 0.0;
    double iqr = 0.0;
    double mad = 0.0;
    double p10 = 0.0;
    double p25 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t n = 0;
    /// False when the law has infinite variance (alpha < 2); std is then informational.
    bool std_reliable = true;
};

/// Percentile of already sorted data, p in [0, 1].
double percentile_sorted(std::span<const double> sorted, double p);
double percentile(std::span<const double> samples, double p);

/// Throws ContractError on empty input.
RobustSummary robust_summary(std::span<const double> samples, double alpha = 2.0);

/// (1/N) sum_j exp(i xi X_j) at each grid frequency.
std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, std::span<const double> xi_grid);

/// exp(i mu xi - |xi|^alpha / (alpha theta)): stationary law of dX = -theta (X - mu) dt + dL
/// with unit-time increment CF exp(-|xi|^alpha).
std::complex<double> stable_cf_theory(double alpha, double theta, double mu, double xi);

/// Scale (alpha theta)^(-1/alpha) of that stationary law.
double fou_stationary_scale(double alpha, double theta);

/// CDF of the symmetric stable law exp(i loc xi - scale^alpha |xi|^alpha),
/// by adaptive Gauss-Kronrod quadrature of the Fourier inversion integral.
double stable_cdf(double alpha, double scale, double location, double x);

/// Quantile obtained by root-finding on stable_cdf. Throws NumericError when
/// the quadrature misses its 1e-6 relative tolerance.
double stable_quantile_oracle(double alpha, double scale, double location, double p);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> heights;  ///< count / (N * bin width)
    std::size_t n = 0;
    std::size_t below = 0;
    std::size_t above = 0;

    [[nodiscard]] double bin_width() const { return (hi - lo) / static_cast<double>(heights.size()); }
    [[nodiscard]] double bin_center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width(); }
    [[nodiscard]] double out_of_range_fraction() const {
        return n == 0 ? 0.0 : static_cast<double>(below + above) / static_cast<double>(n);
    }
};

Histogram histogram(std::span<const double> samples, double lo, double hi, int bins);

struct Mode {
    double location = 0.0;
    double height = 0.0;
    double prominence = 0.0;
};

/// Local maxima of a histogram after a centred moving average over
/// `smoothing_bins` bins, keeping those whose topographic prominence is at
/// least `min_prominence` times the tallest smoothed bin.
std::vector<Mode> find_modes(const Histogram& hist, int smoothing_bins = 5, double min_prominence = 0.05);

/// sup_x |F_n(x) - F(x)|.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Default CF grid {0.25, 0.5, ..., 2.0}.
std::vector<double> default_cf_grid();

struct CoordinateComparison {
    RobustSummary learned;
    RobustSummary particle;
    double d_median = 0.0;  ///< learned - particle
    double d_iqr = 0.0;
    double d_mad = 0.0;
    double d_p10 = 0.0;
    double d_p90 = 0.0;
    /// |d_iqr| / particle IQR; zero when both IQRs vanish.
    double rel_iqr = 0.0;
};

struct RobustReport {
    double time = 0.0;
    std::vector<CoordinateComparison> coords;
    /// Present only when a CF grid was requested (steady-state comparisons).
    std::optional<double> cf_distance;
    std::vector<double> cf_grid;
    std::vector<std::complex<double>> ecf_learned;
    std::vector<std::complex<double>> ecf_particle;
};

struct CompareOptions {
    double alpha = 2.0;
    /// Empty disables the CF comparison.
    std::vector<double> cf_grid;
};

/// Both sample sets (rows = samples, cols = coordinates) pass through the
/// same estimators. The CF distance is the max over coordinates and grid
/// points of the marginal CF gap; the stored ECF values are for coordinate 0.
RobustReport compare(const Eigen::MatrixXd& learned, const Eigen::MatrixXd& particle, double snapshot_time,
                     const CompareOptions& options = {});

}  // namespace wanpm
