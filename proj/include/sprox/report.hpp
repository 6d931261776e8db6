#pragma once

#include "sprox/constants.hpp"
#include "sprox/error_bounds.hpp"
#include "sprox/io.hpp"
#include "sprox/rate.hpp"
#include "sprox/segments.hpp"
#include "sprox/sprox_run.hpp"

namespace sprox {

/// Non-finite doubles become null so the output stays valid JSON.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const ConstantsReport& r) {
  json j;
  j["mode"] = to_string(r.mode);
  j["L_f"] = num(r.L_f);
  j["rho"] = num(r.rho);
  j["p"] = num(r.p);
  j["c"] = num(r.c);
  j["alpha"] = num(r.alpha);
  j["beta"] = num(r.beta);
  j["sigma_max_A"] = num(r.sigma_max_A);
  j["L"] = num(r.L);
  j["gamma_K"] = num(r.gamma_K);
  j["sigma1"] = num(r.sigma1);
  j["sigma2"] = num(r.sigma2);
  j["sigma3"] = num(r.sigma3);
  j["sigma4"] = num(r.sigma4);
  j["theta_bar"] = num(r.theta_bar);
  j["theta_exact"] = r.theta_exact;
  j["theta_kind"] = r.theta_exact ? "exact" : "lower-bound estimate";
  j["theta_bases"] = r.theta_bases;
  j["sigma5_bar"] = num(r.sigma5_bar);
  j["c_max"] = num(r.c_max);
  j["alpha_max"] = num(r.alpha_max);
  j["beta_max"] = num(r.beta_max);
  j["B1"] = num(r.B1);
  j["B2"] = num(r.B2);
  j["guaranteed"] = r.guaranteed;
  j["warnings"] = r.warnings;
  return j;
}

inline json to_json(const MonitorSummary& m) {
  json details = json::object();
  for (size_t i = 0; i < m.stats.size(); ++i) {
    const MonitorStat& s = m.stats[i];
    if (s.checked == 0) continue;
    details[to_string(static_cast<Monitor>(i))] = {{"checked", s.checked},
                                                   {"violations", s.violations},
                                                   {"worst_margin", num(s.worst_margin)},
                                                   {"first_violation_t", s.first_violation_t}};
  }
  json j;
  j["phi_monotone_violations"] = m[Monitor::potential_monotone].violations;
  j["lower_bound_violations"] = m[Monitor::potential_lower_bound].violations;
  j["descent_violations"] = m[Monitor::potential_descent].violations;
  j["lower_bound_checked"] = m[Monitor::potential_lower_bound].checked > 0;
  j["total_violations"] = m.total_violations();
  j["details"] = details;
  return j;
}

inline json to_json(const RateFit& f) {
  json j;
  j["slope"] = f.slope ? num(*f.slope) : json("n/a");
  j["intercept"] = num(f.intercept);
  j["r_squared"] = num(f.r_squared);
  j["predicted_B"] = num(f.predicted_B);
  j["envelope_spread"] = num(f.envelope_spread);
  j["rows_used"] = f.rows_used;
  j["burn_in"] = f.burn_in;
  return j;
}

inline json to_json(const StationarityReport& r) {
  return {{"eq_residual", num(r.eq_residual)},
          {"cert_norm", num(r.cert_norm)},
          {"epsilon", num(r.epsilon)},
          {"method", to_string(r.method)}};
}

inline json to_json(const DualErrorBoundReport& r) {
  json j{{"samples", r.samples}, {"max_ratio", num(r.max_ratio)}, {"bound", num(r.bound)},
         {"pass", r.pass},       {"skipped", r.skipped},          {"seed", r.seed},
         {"violations", r.violations}};
  if (r.worst)
    j["worst"] = {{"lhs", num(r.worst->lhs)}, {"rhs_factor", num(r.worst->rhs_factor)},
                  {"ratio", num(r.worst->ratio)}};
  j["log"] = r.log;
  return j;
}

inline json to_json(const HoffmanReport& r) {
  json j{{"samples", r.points}, {"max_ratio", num(r.max_ratio)}, {"bound", 1.0}, {"theta", num(r.theta)},
         {"pass", r.pass},      {"skipped", 0},                  {"seed", r.seed},
         {"violations", r.violations}};
  if (r.worst)
    j["worst"] = {{"point", detail::vector_to_json(r.worst->point)},
                  {"dist_sq", num(r.worst->dist_sq)},
                  {"residual_sq", num(r.worst->residual_sq)}};
  return j;
}

inline json to_json(const SegmentTrace& t) {
  json j;
  j["r_tilde"] = detail::vector_to_json(t.r_tilde);
  j["r_norm"] = num(t.r_norm);
  j["sigma5"] = num(t.sigma5);
  j["theta"] = num(t.theta);
  j["theta_exact"] = t.theta_exact;
  j["grid_size"] = t.grid.size();
  j["etas"] = t.etas;
  j["breakpoints"] = t.breakpoints;
  j["distinct_active_sets"] = t.distinct_active_sets;
  j["grid_pairs_checked"] = t.grid_pairs_checked;
  j["grid_pair_violations"] = t.grid_pair_violations;
  j["telescoped"] = num(t.telescoped);
  j["path_length"] = num(t.path_length);
  j["distance_to_solution"] = num((t.x_tilde - t.x_star).norm());
  j["endpoint_gap"] = num(t.endpoint_gap);
  j["telescoping_ok"] = t.telescoping_ok;
  j["triangle_ok"] = t.triangle_ok;
  j["finite_ok"] = t.finite_ok;
  json pieces = json::array();
  for (const SegmentPiece& p : t.pieces)
    pieces.push_back({{"eta_lo", p.eta_lo},
                      {"eta_hi", p.eta_hi},
                      {"share", p.share},
                      {"dx", num(p.dx)},
                      {"dr", num(p.dr)},
                      {"dist_M", num(p.dist_M)},
                      {"lipschitz_ok", p.lipschitz_ok},
                      {"multiplier_ok", p.multiplier_ok}});
  j["pieces"] = pieces;
  j["samples"] = t.grid.size();
  j["max_ratio"] = nullptr;
  double worst = 0.0;
  for (const SegmentPiece& p : t.pieces)
    if (p.dr > 0) worst = std::max(worst, (p.dist_M + p.dx) / p.dr);
  j["max_ratio"] = num(worst);
  j["bound"] = num(t.sigma5);
  j["pass"] = t.pass;
  j["skipped"] = 0;
  return j;
}

inline json to_json(const TraceRow& r) {
  json j{{"t", r.t}, {"f", num(r.f)}, {"eq_res", num(r.eq_res)}, {"cert_norm", num(r.cert_norm)},
         {"dx", num(r.dx)}, {"dz", num(r.dz)}};
  j["phi"] = r.phi ? num(*r.phi) : json(nullptr);
  j["phi_ok"] = r.phi_ok ? json(*r.phi_ok) : json(nullptr);
  return j;
}

}  // namespace sprox
