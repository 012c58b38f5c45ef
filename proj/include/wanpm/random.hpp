#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace wanpm {

/// Philox4x32-10 counter-based stream.
///
/// The 64-bit seed is the cipher key. The 128-bit counter is split into a
/// 64-bit stream id (high words) and a 64-bit draw index (low words), so two
/// streams with different ids never share a counter block. Output is a pure
/// function of (seed, stream id, draw index); nothing depends on thread count
/// or platform word order.
class RandomStream {
public:
    using result_type = std::uint64_t;

    explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    /// Stream id layout used throughout the library: an 8-bit domain tag in the
    /// top bits and a 56-bit index below it.
    static RandomStream substream(std::uint64_t seed, std::uint8_t domain, std::uint64_t index);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on the open interval (0, 1).
    double uniform_open();
    /// Uniform on (lo, hi).
    double uniform(double lo, double hi);
    double normal();
    /// Unit-rate exponential, clamped below at 1e-300.
    double exponential();

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const { return stream_id_; }
    [[nodiscard]] std::uint64_t draws() const { return counter_ * 2 - buffered_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Stream domains. Keeping them in one place prevents accidental overlap.
namespace stream_domain {
inline constexpr std::uint8_t kParticle = 1;
inline constexpr std::uint8_t kParticleInit = 2;
inline constexpr std::uint8_t kGeneratorInit = 3;
inline constexpr std::uint8_t kBankInit = 4;
inline constexpr std::uint8_t kEpoch = 5;
inline constexpr std::uint8_t kAdversaryEpoch = 6;
inline constexpr std::uint8_t kEvaluation = 7;
inline constexpr std::uint8_t kTest = 200;
}  // namespace stream_domain

/// Symmetric alpha-stable law with characteristic function
/// exp(i*location*xi - scale^alpha * |xi|^alpha).
struct StableParams {
    double alpha = 1.5;
    double scale = 1.0;
    double location = 0.0;
};

void validate(const StableParams& params);

/// One draw with characteristic function exp(-|xi|^alpha) via
/// Chambers-Mallows-Stuck (beta = 0). Throws DomainError unless alpha in (0, 2].
double sample_standard_stable(double alpha, RandomStream& stream);

/// One draw from the law described by `params`.
double sample_stable(const StableParams& params, RandomStream& stream);

/// Levy increment over a step dt: standard stable scaled by dt^(1/alpha).
double sample_levy_increment(double alpha, double dt, RandomStream& stream);

}  // namespace wanpm
