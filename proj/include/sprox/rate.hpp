#pragma once

#include "sprox/solvers.hpp"

#include <algorithm>
#include <optional>
#include <vector>

namespace sprox {

/// Least-squares fit of log eps(t) against log t, where eps(t) is the best
/// max(cert_norm, eq_res) seen up to row t. predicted_B is the median of
/// t eps(t)^2, the constant in eps = sqrt(B / t).
struct RateFit {
  std::optional<double> slope;  // empty when every residual is zero
  double intercept = 0.0;
  double r_squared = 0.0;
  double predicted_B = 0.0;
  double envelope_spread = 0.0;  // max over fitted rows of t eps^2 divided by its median
  Index rows_used = 0;
  Index burn_in = 100;
};

inline std::vector<double> best_so_far_eps(const std::vector<TraceRow>& trace) {
  std::vector<double> eps(trace.size());
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < trace.size(); ++i) {
    best = std::min(best, std::max(trace[i].cert_norm, trace[i].eq_res));
    eps[i] = best;
  }
  return eps;
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
  return m;
}

inline RateFit fit_rate(const std::vector<TraceRow>& trace, Index burn_in = 100) {
  detail::require(trace.size() >= 200, ErrorKind::invalid_argument, "rate fit needs at least 200 trace rows");
  RateFit fit;
  fit.burn_in = burn_in;
  const std::vector<double> eps = best_so_far_eps(trace);

  std::vector<double> lx, ly, tb;
  for (size_t i = 0; i < trace.size(); ++i) {
    const double t = static_cast<double>(trace[i].t);
    if (trace[i].t < burn_in || t <= 0) continue;
    tb.push_back(t * eps[i] * eps[i]);
    if (eps[i] > 0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(eps[i]));
    }
  }
  fit.rows_used = static_cast<Index>(tb.size());
  fit.predicted_B = median_of(tb);
  if (!tb.empty() && fit.predicted_B > 0)
    fit.envelope_spread = *std::max_element(tb.begin(), tb.end()) / fit.predicted_B;
  if (lx.size() < 2) return fit;  // already optimal: slope not defined

  const double k = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - *fit.slope * mx;
  fit.r_squared = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace sprox
