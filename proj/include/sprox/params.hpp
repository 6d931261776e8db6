#pragma once

#include "sprox/core.hpp"

#include <string>

namespace sprox {

enum class SolverMode { theoretical, practical };
enum class MonitorLevel { none, cheap, full };

/// Factor on (x+ - x) in the step certificate. `inverse_c` matches the
/// projected-gradient step as the iteration performs it; `two_over_c` follows
/// the prox-subproblem form with (1/c)||x - x^s||^2.
enum class CertificateScaling { inverse_c, two_over_c };

inline const char* to_string(SolverMode m) { return m == SolverMode::theoretical ? "theoretical" : "practical"; }

inline const char* to_string(MonitorLevel m) {
  switch (m) {
    case MonitorLevel::none: return "none";
    case MonitorLevel::cheap: return "cheap";
    case MonitorLevel::full: return "full";
  }
  return "unknown";
}

inline SolverMode parse_solver_mode(const std::string& s) {
  if (s == "theoretical") return SolverMode::theoretical;
  if (s == "practical") return SolverMode::practical;
  throw Error(ErrorKind::invalid_argument, "unknown mode '" + s + "'");
}

inline MonitorLevel parse_monitor_level(const std::string& s) {
  if (s == "none") return MonitorLevel::none;
  if (s == "cheap") return MonitorLevel::cheap;
  if (s == "full") return MonitorLevel::full;
  throw Error(ErrorKind::invalid_argument, "unknown monitor level '" + s + "'");
}

struct SolverParams {
  double rho = 1.0;
  double p = 3.0;
  double c = 0.1;
  double alpha = 0.1;
  double beta = 0.01;

  Index max_iters = 1000;
  double target_eps = 0.0;  // stop once the certificate epsilon reaches this; 0 never stops early
  Index trace_every = 1;
  MonitorLevel monitor_level = MonitorLevel::cheap;
  CertificateScaling certificate_scaling = CertificateScaling::inverse_c;

  double inner_tol = 1e-10;  // x(y,z) and xbar*(z) solves in monitor paths
  double proj_tol = 1e-10;

  double sigma_max_A = 0.0;  // cached by the planner; recomputed when zero
  SolverMode mode = SolverMode::practical;
};

}  // namespace sprox
