#include "ledgerml/pfa/detmath.hpp"

#include <array>
#include <cmath>

#include "ledgerml/pfa/error.hpp"

// All arithmetic below must be evaluated exactly as written. The build passes
// -ffp-contract=off so no multiply-add pair is fused.

namespace ledgerml::pfa {

namespace {

constexpr double kLn2Hi = 0x1.62e42fee00000p-1;
constexpr double kLn2Lo = 0x1.a39ef35793c76p-33;
constexpr double kInvLn2 = 0x1.71547652b82fep+0;
constexpr double kSqrtHalf = 0x1.6a09e667f3bcdp-1;
constexpr double kOneMinusUlp = 0x1.fffffffffffffp-1;
constexpr double kSplitter = 134217729.0;  // 2^27 + 1

// 1/n! for n = 13 down to 2.
constexpr std::array<double, 12> kExpCoeffs = {
    1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0, 1.0 / 40320.0,
    1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,      1.0 / 24.0,      1.0 / 6.0,      1.0 / 2.0,
};

// 2/(2j+1) for j = 12 down to 1.
constexpr std::array<double, 12> kLnCoeffs = {
    2.0 / 25.0, 2.0 / 23.0, 2.0 / 21.0, 2.0 / 19.0, 2.0 / 17.0, 2.0 / 15.0,
    2.0 / 13.0, 2.0 / 11.0, 2.0 / 9.0,  2.0 / 7.0,  2.0 / 5.0,  2.0 / 3.0,
};

// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;
};

DoubleDouble two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

DoubleDouble fast_two_sum(double a, double b) {
  const double s = a + b;
  return {s, b - (s - a)};
}

DoubleDouble split(double a) {
  const double c = kSplitter * a;
  const double hi = c - (c - a);
  return {hi, a - hi};
}

DoubleDouble two_prod(double a, double b) {
  const double p = a * b;
  const auto [ah, al] = split(a);
  const auto [bh, bl] = split(b);
  return {p, ((ah * bh - p) + ah * bl + al * bh) + al * bl};
}

DoubleDouble dd_add(DoubleDouble a, DoubleDouble b) {
  const auto s = two_sum(a.hi, b.hi);
  return fast_two_sum(s.hi, s.lo + (a.lo + b.lo));
}

double dd_div(DoubleDouble a, DoubleDouble b) {
  // keep the splitter product in range
  if (std::fabs(b.hi) > 0x1p995) {
    a = {std::ldexp(a.hi, -64), std::ldexp(a.lo, -64)};
    b = {std::ldexp(b.hi, -64), std::ldexp(b.lo, -64)};
  }
  const double q1 = a.hi / b.hi;
  const auto p = two_prod(q1, b.hi);
  const double r = ((a.hi - p.hi) - p.lo + a.lo) - q1 * b.lo;
  const double q2 = r / b.hi;
  return q1 + q2;
}

struct ExpParts {
  DoubleDouble mantissa;
  int exponent = 0;
  bool underflow = false;
};

ExpParts exp_parts(double x) {
  require_finite(x);
  if (x > 710.0) throw PfaError(ErrorKind::NumericFault, "exp overflow");
  if (x < -746.0) return {{}, 0, true};
  const double k = std::floor(x * kInvLn2 + 0.5);
  const double hi = x - k * kLn2Hi;
  const double lo = k * kLn2Lo;
  const double r = hi - lo;
  const double r_err = (hi - r) - lo;
  double q = kExpCoeffs[0];
  for (std::size_t i = 1; i < kExpCoeffs.size(); ++i) q = q * r + kExpCoeffs[i];
  const auto t = two_sum(r, r_err + r * (r * q));
  const auto p = two_sum(1.0, t.hi);
  return {fast_two_sum(p.hi, p.lo + t.lo), static_cast<int>(k), false};
}

DoubleDouble exp_dd(double x) {
  const auto parts = exp_parts(x);
  if (parts.underflow) return {};
  return {require_finite(std::ldexp(parts.mantissa.hi, parts.exponent)),
          std::ldexp(parts.mantissa.lo, parts.exponent)};
}

}  // namespace

double require_finite(double x) {
  if (!std::isfinite(x)) throw PfaError(ErrorKind::NumericFault, "non-finite value");
  return x;
}

double det_exp(double x) {
  const auto parts = exp_parts(x);
  if (parts.underflow) return 0.0;
  return require_finite(std::ldexp(parts.mantissa.hi, parts.exponent));
}

double det_ln(double x) {
  require_finite(x);
  if (!(x > 0.0)) throw PfaError(ErrorKind::NumericFault, "ln of non-positive value");
  int e = 0;
  double m = std::frexp(x, &e);
  if (m < kSqrtHalf) {
    m = m * 2.0;
    e -= 1;
  }
  const double f = m - 1.0;
  const double s = f / (2.0 + f);
  const double z = s * s;
  double poly = kLnCoeffs[0];
  for (std::size_t i = 1; i < kLnCoeffs.size(); ++i) poly = poly * z + kLnCoeffs[i];
  const double r = z * poly;
  const double hfsq = 0.5 * f * f;
  const double fe = static_cast<double>(e);
  return fe * kLn2Hi - ((hfsq - (s * (hfsq + r) + fe * kLn2Lo)) - f);
}

double link_logit(double x) {
  require_finite(x);
  const auto den = dd_add({1.0, 0.0}, exp_dd(-x));
  double r = dd_div({1.0, 0.0}, den);
  if (r >= 1.0) r = kOneMinusUlp;
  return r;
}

std::vector<double> link_softmax(std::span<const double> v) {
  if (v.empty()) throw PfaError(ErrorKind::DimensionMismatch, "softmax of empty vector");
  for (double x : v) require_finite(x);
  double max = v[0];
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > max) max = v[i];

  std::vector<DoubleDouble> terms;
  terms.reserve(v.size());
  for (double x : v) {
    // x - max is carried exactly; the rounding residual scales the exponential
    const auto d = two_sum(x, -max);
    const auto t = exp_dd(require_finite(d.hi));
    terms.push_back(fast_two_sum(t.hi, t.lo + t.hi * d.lo));
  }
  DoubleDouble total;
  for (const auto& t : terms) total = dd_add(total, t);

  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& t : terms) out.push_back(require_finite(dd_div(t, total)));
  return out;
}

double link_relu(double x) { return require_finite(x) > 0.0 ? x : 0.0; }

std::int64_t argmax(std::span<const double> v) {
  if (v.empty()) throw PfaError(ErrorKind::DimensionMismatch, "argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::isnan(v[i])) throw PfaError(ErrorKind::NumericFault, "argmax over NaN");
    if (v[i] > v[best]) best = i;
  }
  return static_cast<std::int64_t>(best);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw PfaError(ErrorKind::DimensionMismatch,
                   "dot of length " + std::to_string(a.size()) + " with length " + std::to_string(b.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = require_finite(acc + require_finite(a[i] * b[i]));
  return acc;
}

}  // namespace ledgerml::pfa
