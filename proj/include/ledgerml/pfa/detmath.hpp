#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ledgerml::pfa {

// Self-contained binary64 kernels. Each one is a fixed sequence of IEEE-754
// operations (no FMA, no library transcendental calls), so results are
// bit-identical on every conforming platform. Non-finite inputs or results
// throw PfaError(NumericFault).

/// exp(x) via x = k*ln2 + r, |r| <= ln2/2, degree-13 Taylor polynomial in r,
/// then scaled by 2^k.
double det_exp(double x);

/// ln(x) for x > 0 via x = m * 2^e, m in [sqrt(1/2), sqrt(2)), and a 13-term
/// atanh series in s = (m-1)/(m+1).
double det_ln(double x);

/// 1/(1+exp(-x)) clamped into the open interval (0, 1).
double link_logit(double x);

/// Max-subtracted softmax with left-to-right normalisation.
std::vector<double> link_softmax(std::span<const double> v);

/// max(x, 0); negative zero maps to +0.
double link_relu(double x);

/// Index of the first maximum. Throws on empty input or NaN.
std::int64_t argmax(std::span<const double> v);

/// Left-to-right dot product starting from +0.0.
double dot(std::span<const double> a, std::span<const double> b);

/// Throws NumericFault unless x is finite; returns x.
double require_finite(double x);

}  // namespace ledgerml::pfa
