#include "wanpm/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wanpm/error.hpp"

namespace wanpm {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

RandomStream RandomStream::substream(std::uint64_t seed, std::uint8_t domain, std::uint64_t index) {
    constexpr std::uint64_t kIndexMask = (std::uint64_t{1} << 56) - 1;
    if (index > kIndexMask) throw ContractError("substream index exceeds 56 bits");
    return RandomStream(seed, (static_cast<std::uint64_t>(domain) << 56) | index);
}

void RandomStream::refill() {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                              static_cast<std::uint32_t>(seed_ >> 32)};
    const auto out = philox4x32_10(ctr, key);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_ = 2;
    ++counter_;
}

RandomStream::result_type RandomStream::operator()() {
    if (buffered_ == 0) refill();
    return buffer_[2 - buffered_--];
}

double RandomStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open() {
    // (k + 0.5) / 2^53 never hits either endpoint.
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform_open(); }

double RandomStream::normal() { return normal_(*this); }

double RandomStream::exponential() { return std::max(-std::log(uniform_open()), 1e-300); }

void validate(const StableParams& params) {
    if (!(params.alpha > 0.0 && params.alpha <= 2.0))
        throw DomainError("stability index alpha must lie in (0, 2], got " + std::to_string(params.alpha));
    if (!(params.scale > 0.0)) throw DomainError("stable scale must be positive, got " + std::to_string(params.scale));
    if (!std::isfinite(params.location)) throw DomainError("stable location must be finite");
}

double sample_standard_stable(double alpha, RandomStream& stream) {
    if (!(alpha > 0.0 && alpha <= 2.0))
        throw DomainError("stability index alpha must lie in (0, 2], got " + std::to_string(alpha));
    constexpr double half_pi = std::numbers::pi / 2.0;
    const double u = stream.uniform(-half_pi, half_pi);
    const double w = stream.exponential();
    if (alpha == 1.0) return std::tan(u);
    const double cos_u = std::cos(u);
    const double lead = std::sin(alpha * u) / std::pow(cos_u, 1.0 / alpha);
    const double tail = std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
    return lead * tail;
}

double sample_stable(const StableParams& params, RandomStream& stream) {
    validate(params);
    return params.location + params.scale * sample_standard_stable(params.alpha, stream);
}

double sample_levy_increment(double alpha, double dt, RandomStream& stream) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive, got " + std::to_string(dt));
    return sample_standard_stable(alpha, stream) * std::pow(dt, 1.0 / alpha);
}

}  // namespace wanpm
