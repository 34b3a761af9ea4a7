#include "renewal/distributions.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace renewal {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64(std::uint64_t& x) {
  x += kGolden;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

double parse_positive_real(const std::string& text, const char* rule) {
  double value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !(value > 0) || !std::isfinite(value))
    throw std::invalid_argument(std::string("distribution grammar: ") + rule +
                                " requires a positive real, got '" + text + "'");
  return value;
}

std::string format_real(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

}  // namespace

std::string ProcessSpec::label() const {
  switch (family) {
    case Family::kExponential:
      return "exp";
    case Family::kUniformOnZeroTwo:
      return "uniform";
    case Family::kGammaShape:
      return "gamma:s=" + format_real(gamma_shape);
    case Family::kLognormal:
      return "lognormal:sigma=" + format_real(lognormal_sigma);
  }
  return "?";
}

ProcessSpec parse_family(const std::string& text, bool allow_extreme_sigma) {
  ProcessSpec spec;
  if (text == "exp") {
    spec.family = Family::kExponential;
  } else if (text == "uniform") {
    spec.family = Family::kUniformOnZeroTwo;
  } else if (text.rfind("gamma:s=", 0) == 0) {
    spec.family = Family::kGammaShape;
    spec.gamma_shape = parse_positive_real(text.substr(8), "gamma:s=<v>");
  } else if (text.rfind("lognormal:sigma=", 0) == 0) {
    spec.family = Family::kLognormal;
    spec.lognormal_sigma =
        parse_positive_real(text.substr(16), "lognormal:sigma=<v>");
    if (!allow_extreme_sigma && spec.lognormal_sigma > kDefaultLognormalSigmaCap)
      throw std::invalid_argument(
          "distribution grammar: lognormal sigma is capped at " +
          format_real(kDefaultLognormalSigmaCap) +
          " by default (moments grow as exp(sigma^2 p(p-1)/2)); override to lift");
  } else {
    throw std::invalid_argument(
        "distribution grammar: expected exp | uniform | gamma:s=<v> | "
        "lognormal:sigma=<v>, got '" +
        text + "'");
  }
  return spec;
}

SeedSpec substream(const SeedSpec& seed, std::uint64_t index) {
  std::uint64_t x = seed.stream_id ^ (index + 1) * kGolden;
  return SeedSpec{seed.master_seed, splitmix64(x)};
}

StreamRng::StreamRng(const SeedSpec& seed) {
  std::uint64_t x = seed.master_seed + (seed.stream_id ^ 0xD1B54A32D192ED03ULL) * kGolden;
  state_[0] = splitmix64(x);
  state_[1] = splitmix64(x);
  state_[2] = splitmix64(x);
  state_[3] = splitmix64(x);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

std::uint64_t StreamRng::next_u64() {
  const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double StreamRng::uniform01() {
  // 53-bit mantissa offset by half an ulp keeps both endpoints excluded.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double StreamRng::exponential() { return -std::log(uniform01()); }

double StreamRng::normal01() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double StreamRng::gamma(double shape) {
  if (!(shape > 0)) throw std::invalid_argument("gamma shape must be positive");
  if (shape < 1.0) {
    // Boost down to the shape+1 case; retry on underflow of u^(1/shape).
    for (;;) {
      const double boost = gamma(shape + 1.0);
      const double draw = boost * std::pow(uniform01(), 1.0 / shape);
      if (draw > 0) return draw;
    }
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  for (;;) {
    const double x = normal01();
    double v = 1.0 + c * x;
    if (v <= 0) continue;
    v = v * v * v;
    const double u = uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 ||
        std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      const double draw = d * v;
      if (draw > 0) return draw;
    }
  }
}

double StreamRng::increment(const ProcessSpec& spec) {
  switch (spec.family) {
    case Family::kExponential:
      return exponential();
    case Family::kUniformOnZeroTwo:
      return 2.0 * uniform01();
    case Family::kGammaShape:
      return gamma(spec.gamma_shape) / spec.gamma_shape;
    case Family::kLognormal: {
      const double sigma = spec.lognormal_sigma;
      return std::exp(-0.5 * sigma * sigma + sigma * normal01());
    }
  }
  throw std::logic_error("unreachable family");
}

MomentProfile analytic_profile(const ProcessSpec& spec) {
  const int c = spec.max_order;
  if (c < 2 || c % 2 != 0)
    throw std::invalid_argument("max_order must be even and >= 2");

  std::vector<Rational> moments(static_cast<size_t>(c) + 1);
  bool exact = true;
  switch (spec.family) {
    case Family::kExponential:
      for (int p = 0; p <= c; ++p)
        moments[static_cast<size_t>(p)] = Rational(factorial(static_cast<unsigned>(p)));
      break;
    case Family::kUniformOnZeroTwo:
      for (int p = 0; p <= c; ++p)
        moments[static_cast<size_t>(p)] =
            Rational(rational_pow(Rational(2), static_cast<unsigned>(p))) /
            Rational(p + 1);
      break;
    case Family::kGammaShape: {
      if (!(spec.gamma_shape > 0))
        throw std::invalid_argument("gamma shape must be positive");
      // The double shape is itself an exact rational, so the product
      // formula prod_{j<p}(s+j)/s^p is exact for the shape actually sampled.
      const Rational s(spec.gamma_shape);
      Rational numerator = 1;
      for (int p = 0; p <= c; ++p) {
        moments[static_cast<size_t>(p)] =
            numerator / rational_pow(s, static_cast<unsigned>(p));
        numerator *= s + p;
      }
      break;
    }
    case Family::kLognormal: {
      if (!(spec.lognormal_sigma > 0))
        throw std::invalid_argument("lognormal sigma must be positive");
      exact = false;
      const long double s2 = static_cast<long double>(spec.lognormal_sigma) *
                             static_cast<long double>(spec.lognormal_sigma);
      for (int p = 0; p <= c; ++p) {
        const long double m = std::exp(s2 * p * (p - 1) / 2.0L);
        if (!std::isfinite(static_cast<double>(m)))
          throw std::invalid_argument(
              "lognormal moment of order " + std::to_string(p) +
              " overflows; reduce sigma or max_order");
        moments[static_cast<size_t>(p)] = Rational(m);
      }
      break;
    }
  }
  return MomentProfile(std::move(moments), exact, spec.label());
}

std::vector<double> sample_increments(const ProcessSpec& spec, long count,
                                      const SeedSpec& seed) {
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  StreamRng rng(seed);
  std::vector<double> draws(static_cast<size_t>(count));
  for (double& d : draws) d = rng.increment(spec);
  return draws;
}

std::vector<double> arrival_prefix_sums(const ProcessSpec& spec, long k_max,
                                        const SeedSpec& seed) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (!(spec.rate > 0)) throw std::invalid_argument("rate lambda must be positive");
  StreamRng rng(seed);
  std::vector<double> arrivals(static_cast<size_t>(k_max));
  double sum = 0;
  for (double& x : arrivals) {
    sum += rng.increment(spec);
    x = sum / spec.rate;
  }
  return arrivals;
}

}  // namespace renewal
