#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace enseq {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Saturation value standing in for +inf in measures; paired with a flag,
/// never a silent NaN.
inline constexpr double kSaturated = 1e300;

/// log(sum(exp(v))); returns -inf on an empty or all -inf input.
inline double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_mean_exp(std::span<const double> v) {
  if (v.empty()) return kNegInf;
  const double lse = logsumexp(v);
  return lse == kNegInf ? kNegInf : lse - std::log(static_cast<double>(v.size()));
}

/// Shannon entropy of a probability vector paired with its logs; 0*log 0 = 0.
inline double entropy_nats(std::span<const double> probs, std::span<const double> logs) {
  double h = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) h -= probs[k] * logs[k];
  }
  return h < 0.0 ? 0.0 : h;
}

inline std::vector<double> exp_all(std::span<const double> logs) {
  std::vector<double> p(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) p[i] = std::exp(logs[i]);
  return p;
}

}  // namespace enseq
