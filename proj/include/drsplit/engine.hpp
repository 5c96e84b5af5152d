#pragma once

// The splitting iteration x_{n+1} = T x_n with
//   T = Id - J_A + J_B (2 J_A - Id),
// trace recording, the stopping rule, and the diagnostic monitors built on a
// finished trace (asymptotic regularity, distance monotonicity to a target
// pair, anchored drift identities, and function-value monitors).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "drsplit/core.hpp"
#include "drsplit/displacement.hpp"
#include "drsplit/prox.hpp"

namespace drsplit {

// One application of the splitting operator.
inline Vector dr_step(const ProblemSpec& spec, const Vector& x) {
  if (x.dim() != spec.dim) throw DimensionMismatchError("iterate dimension mismatch");
  Vector p = spec.op_a.resolvent(x);
  Vector q = spec.op_b.resolvent(2.0 * p - x);
  return x - p + q;
}

namespace detail {

struct StepPieces {
  Vector p, q, tx, step_diff, d, e;
};

inline StepPieces compute_step(const ProblemSpec& spec, const Vector& x) {
  Vector p = spec.op_a.resolvent(x);
  Vector r = 2.0 * p - x;
  Vector q = spec.op_b.resolvent(r);
  Vector tx = x - p + q;
  return StepPieces{p, q, tx, x - tx, x - p, r - q};
}

inline IterateRecord make_record(const ProblemSpec& spec, std::size_t n, const Vector& x,
                                 const StepPieces& s) {
  IterateRecord rec{n, x, s.p, s.q, s.d, s.e, s.step_diff, {}, {}, {}, {}};
  if (spec.op_a.evaluable) rec.f_val = spec.op_a.evaluable(s.p);
  if (spec.op_b.evaluable) rec.g_val = spec.op_b.evaluable(s.q);
  return rec;
}

}  // namespace detail

// Runs the iteration from spec.start. Records are kept every
// cfg.record_every steps; the final two iterates are always recorded at
// consecutive indices so single-step differences are available at the tail.
// Stops early once both the step-difference increment and the second
// difference of the primal shadows fall below cfg.stop_tol. A non-finite
// iterate aborts with the offending index.
inline RunTrace run(const ProblemSpec& spec, const RunConfig& cfg) {
  validate_problem(spec);
  if (cfg.max_iters == 0) throw InvalidParamError("max_iters must be at least 1");
  if (cfg.record_every == 0) throw InvalidParamError("record_every must be at least 1");

  std::vector<IterateRecord> records;
  Vector x = spec.start;
  std::optional<Vector> x_prev;
  std::optional<Vector> sd_prev, p_prev, p_prev2;
  std::size_t n = 0;
  bool stopped_early = false;

  while (n < cfg.max_iters) {
    detail::StepPieces s = [&] {
      try {
        return detail::compute_step(spec, x);
      } catch (const NonFiniteError&) {
        throw NonFiniteError(spec.scenario_name + ": iterate became non-finite at iteration " +
                             std::to_string(n));
      }
    }();
    if (n % cfg.record_every == 0) records.push_back(detail::make_record(spec, n, x, s));

    bool stop = false;
    if (cfg.stop_tol > 0.0 && sd_prev && p_prev && p_prev2) {
      double first = norm(s.step_diff - *sd_prev);
      double second = norm((s.p - *p_prev) - (*p_prev - *p_prev2));
      stop = first <= cfg.stop_tol && second <= cfg.stop_tol;
    }

    p_prev2 = p_prev;
    p_prev = s.p;
    sd_prev = s.step_diff;
    x_prev = x;
    x = s.tx;
    ++n;
    if (stop) {
      stopped_early = true;
      break;
    }
  }

  // Ensure the last two iterates (n-1 and n) are present as records.
  auto append_record = [&](std::size_t idx, const Vector& xi) {
    if (!records.empty() && records.back().n >= idx) return;
    try {
      records.push_back(detail::make_record(spec, idx, xi, detail::compute_step(spec, xi)));
    } catch (const NonFiniteError&) {
      throw NonFiniteError(spec.scenario_name + ": iterate became non-finite at iteration " +
                           std::to_string(idx));
    }
  };
  if (x_prev) append_record(n - 1, *x_prev);
  append_record(n, x);

  DisplacementEstimate est =
      estimate_from_records(records, EstimateMethod::last_difference, kConvergenceTol);

  std::optional<Vector> limit_primal;
  std::optional<double> limit_value;
  if (norm(est.v_r) <= kConvergenceTol) {
    const IterateRecord& last = records.back();
    limit_primal = last.p;
    if (last.f_val && last.g_val) limit_value = *last.f_val + *last.g_val;
  }

  return RunTrace{std::move(records), est, limit_primal, limit_value, n, stopped_early};
}

// ---------------------------------------------------------------------------
// Asymptotic regularity
// ---------------------------------------------------------------------------

// The primal shadows settle exactly when v_r = 0, the dual shadows exactly
// when v_d = 0. The report measures the tail of the normalized shadow
// increments and cross-checks the dichotomy against the final estimate.
struct RegularityReport {
  double primal_tail = 0.0;  // max tail value of ||p_i - p_{i+1}|| / gap
  double dual_tail = 0.0;
  bool primal_regular = false;
  bool dual_regular = false;
  double v_r_norm = 0.0;
  double v_d_norm = 0.0;
  bool consistent_with_estimate = false;
};

inline RegularityReport asymptotic_regularity_report(const RunTrace& trace,
                                                     double tol = kConvergenceTol) {
  const auto& recs = trace.records;
  if (recs.size() < 2) throw InsufficientDataError("regularity report needs two records");
  std::size_t pairs = std::min<std::size_t>(5, recs.size() - 1);
  RegularityReport report;
  for (std::size_t k = recs.size() - pairs; k < recs.size(); ++k) {
    const IterateRecord& a = recs[k - 1];
    const IterateRecord& b = recs[k];
    double gap = static_cast<double>(b.n - a.n);
    report.primal_tail = std::max(report.primal_tail, norm(a.p - b.p) / gap);
    report.dual_tail = std::max(report.dual_tail, norm(a.d - b.d) / gap);
  }
  report.primal_regular = report.primal_tail <= tol;
  report.dual_regular = report.dual_tail <= tol;
  report.v_r_norm = norm(trace.final_estimate.v_r);
  report.v_d_norm = norm(trace.final_estimate.v_d);
  report.consistent_with_estimate =
      report.primal_regular == (report.v_r_norm <= tol) &&
      report.dual_regular == (report.v_d_norm <= tol);
  return report;
}

// ---------------------------------------------------------------------------
// Distance monotonicity to a target pair
// ---------------------------------------------------------------------------

// The drift-compensated pair (p_n + n v_r, d_n + n v_d) never moves away from
// a valid target pair (z, k); rho_n is its product-space distance to the
// target and must be nonincreasing up to the slack.
struct FejerReport {
  std::vector<double> distances;
  bool monotone = true;
  double max_increase = 0.0;
};

inline FejerReport fejer_monitor(const RunTrace& trace, const Vector& v_d, const Vector& v_r,
                                 const Vector& target_z, const Vector& target_k,
                                 double slack = 1e-9) {
  const auto& recs = trace.records;
  if (recs.empty()) throw InsufficientDataError("distance monitor needs records");
  FejerReport report;
  report.distances.reserve(recs.size());
  for (const IterateRecord& r : recs) {
    double nn = static_cast<double>(r.n);
    Vector primal = r.p + nn * v_r - target_z;
    Vector dual = r.d + nn * v_d - target_k;
    report.distances.push_back(std::sqrt(dot(primal, primal) + dot(dual, dual)));
  }
  for (std::size_t i = 1; i < report.distances.size(); ++i) {
    double inc = report.distances[i] - report.distances[i - 1];
    report.max_increase = std::max(report.max_increase, inc);
    if (inc > slack) report.monotone = false;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Anchored drift identities
// ---------------------------------------------------------------------------

// From a generalized fixed point f (meaning f - T f = v) the iteration drifts
// along exact rays:
//   T^n f             = f - n v
//   J_A T^n f         = J_A f - n v_r
//   J_{A^{-1}} T^n f  = J_{A^{-1}} f - n v_d
//   J_B R_A T^n f     = J_B R_A f - n v_r
//   J_{B^{-1}} R_A T^n f = J_{B^{-1}} R_A f + n v_d
// Violations are scaled by (n + 1) to absorb accumulated rounding.
struct AnchoredDriftReport {
  double max_scaled_violation = 0.0;
  bool pass = false;
  std::size_t n_checked = 0;
};

inline AnchoredDriftReport anchored_shadow_check(const ProblemSpec& spec, const Vector& anchor,
                                                 const Vector& v, const Vector& v_d,
                                                 const Vector& v_r, std::size_t n_max,
                                                 double tol = kIdentityTol,
                                                 double fixed_point_tol = 1e-8) {
  validate_problem(spec);
  detail::StepPieces at_f = detail::compute_step(spec, anchor);
  if (norm(at_f.step_diff - v) > fixed_point_tol)
    throw NotAFixedPointError("anchor does not satisfy f - T f = v");

  AnchoredDriftReport report;
  Vector x = anchor;
  for (std::size_t n = 0; n <= n_max; ++n) {
    detail::StepPieces s = detail::compute_step(spec, x);
    double nn = static_cast<double>(n);
    double worst = norm(x - (anchor - nn * v));
    worst = std::max(worst, norm(s.p - (at_f.p - nn * v_r)));
    worst = std::max(worst, norm(s.d - (at_f.d - nn * v_d)));
    worst = std::max(worst, norm(s.q - (at_f.q - nn * v_r)));
    worst = std::max(worst, norm(s.e - (at_f.e + nn * v_d)));
    report.max_scaled_violation = std::max(report.max_scaled_violation, worst / (nn + 1.0));
    x = s.tx;
  }
  report.n_checked = n_max;
  report.pass = report.max_scaled_violation <= tol;
  return report;
}

// ---------------------------------------------------------------------------
// Function-value monitors
// ---------------------------------------------------------------------------

// For problems built from functions (f attached to A, g attached to B) and a
// feasible test point y (y in dom f with y - v in dom g):
//   eps_n   = <y - q_n - v, p_n - q_n - v>
//   delta_n = <p_n - q_n - v, p_n - (x_n + n v)>
// both vanish in the limit, and
//   f(y) + g(y - v) >= f(p_n) + g(q_n) + eps_n + delta_n
// provides a per-iteration lower-bound certificate.
struct ValueReport {
  std::vector<double> values;  // f(p_n) + g(q_n)
  std::vector<double> eps;
  std::vector<double> delta;
  double final_value = 0.0;
  double eps_tail = 0.0;    // max |eps| over the tail fifth
  double delta_tail = 0.0;  // max |delta| over the tail fifth
  double bound_at_y = 0.0;  // f(y) + g(y - v)
  double max_bound_violation = 0.0;
};

inline ValueReport value_monitor(const ProblemSpec& spec, const RunTrace& trace,
                                 const std::optional<Vector>& test_point) {
  if (!spec.op_a.evaluable || !spec.op_b.evaluable)
    throw MissingFunctionError("value monitor needs functions attached to both operators");
  if (!test_point) throw MissingTestPointError("value monitor needs a feasible test point");
  if (trace.records.empty()) throw InsufficientDataError("value monitor needs records");

  const Vector& y = *test_point;
  const Vector& v = trace.final_estimate.v;
  ValueReport report;
  report.bound_at_y = spec.op_a.evaluable(y) + spec.op_b.evaluable(y - v);

  for (const IterateRecord& r : trace.records) {
    double fv = r.f_val ? *r.f_val : spec.op_a.evaluable(r.p);
    double gv = r.g_val ? *r.g_val : spec.op_b.evaluable(r.q);
    report.values.push_back(fv + gv);
    Vector residual = r.p - r.q - v;
    double eps = dot(y - r.q - v, residual);
    double delta = dot(residual, r.p - (r.x + static_cast<double>(r.n) * v));
    report.eps.push_back(eps);
    report.delta.push_back(delta);
    if (std::isfinite(report.values.back())) {
      double lower = report.values.back() + eps + delta;
      report.max_bound_violation = std::max(report.max_bound_violation, lower - report.bound_at_y);
    }
  }
  report.final_value = report.values.back();
  std::size_t window = (report.eps.size() + 4) / 5;
  for (std::size_t i = report.eps.size() - window; i < report.eps.size(); ++i) {
    report.eps_tail = std::max(report.eps_tail, std::abs(report.eps[i]));
    report.delta_tail = std::max(report.delta_tail, std::abs(report.delta[i]));
  }
  return report;
}

// Copy of the trace with the value-monitor columns filled in.
inline RunTrace with_value_monitors(RunTrace trace, const ValueReport& report) {
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    trace.records[i].eps = report.eps[i];
    trace.records[i].delta = report.delta[i];
  }
  return trace;
}

// Shifted governing sequence x_n + n v; bounded exactly when v is attained.
inline std::vector<Vector> shifted_governing(const RunTrace& trace, const Vector& v) {
  std::vector<Vector> out;
  out.reserve(trace.records.size());
  for (const IterateRecord& r : trace.records)
    out.push_back(r.x + static_cast<double>(r.n) * v);
  return out;
}

// ---------------------------------------------------------------------------
// Solving the normal problem
// ---------------------------------------------------------------------------

struct NormalSolution {
  Vector z_bar;
  std::optional<double> mu;  // f(z_bar) + g(z_bar - v) when evaluable
  double residual = 0.0;     // final step-difference norm of the shifted run
  std::size_t iterations = 0;
};

// Plain splitting run on the shifted pair; its shadows converge to a solution
// of the normal problem whenever one exists.
inline NormalSolution solve_normal(const NormalProblem& np, const RunConfig& cfg,
                                   double residual_tol = kConvergenceTol) {
  RunTrace trace = run(np.shifted, cfg);
  const IterateRecord& last = trace.records.back();
  double residual = norm(last.step_diff);
  if (residual > residual_tol)
    throw NoConvergenceError(np.shifted.scenario_name +
                             ": normal problem did not converge, step residual " +
                             std::to_string(residual));
  NormalSolution sol{last.p, {}, residual, trace.iterations};
  if (np.base.op_a.evaluable && np.base.op_b.evaluable)
    sol.mu = np.base.op_a.evaluable(sol.z_bar) + np.base.op_b.evaluable(sol.z_bar - np.v);
  return sol;
}

// ---------------------------------------------------------------------------
// Pointwise identity suite
// ---------------------------------------------------------------------------

// Seeded random checks of the exact resolvent identities on a problem:
//   J_A x + J_{A^{-1}} x = x                       (inverse-resolvent sum)
//   x - T x = J_A x - J_B R_A x
//           = J_{A^{-1}} x + J_{B^{-1}} R_A x      (double identity)
//   J_{-w+A}(y - w) = J_A y and
//   J_{A^{-1}} y = w + J_{(-w+A)^{-1}}(y - w)      (shift identities)
// plus firm nonexpansiveness of both resolvents, and, when a displacement
// vector is supplied, the normal-problem identity T'(y) = T(y + v).
struct IdentityCheckReport {
  double max_inverse_sum = 0.0;
  double max_double_identity = 0.0;
  double max_shift = 0.0;
  double max_firmness = 0.0;
  double max_normal = 0.0;  // only meaningful when a displacement vector is given
  std::size_t samples = 0;

  bool pass(double tol = kIdentityTol) const {
    return max_inverse_sum <= tol && max_double_identity <= tol && max_shift <= tol &&
           max_firmness <= tol && max_normal <= tol;
  }
};

inline IdentityCheckReport check_identities(const ProblemSpec& spec, std::size_t samples,
                                            std::uint64_t seed,
                                            const std::optional<Vector>& v_for_normal = {}) {
  validate_problem(spec);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  auto sample = [&] {
    std::vector<double> c(spec.dim);
    for (double& ci : c) ci = coord(rng);
    return Vector(std::move(c));
  };

  OperatorHandle inv_a = inverse_resolvent(spec.op_a);
  OperatorHandle inv_b = inverse_resolvent(spec.op_b);
  std::optional<NormalProblem> np;
  if (v_for_normal) np = build_normal_problem(spec, *v_for_normal);

  IdentityCheckReport report;
  report.samples = samples;
  std::vector<std::pair<Vector, Vector>> firm_pairs;
  firm_pairs.reserve(samples);

  for (std::size_t i = 0; i < samples; ++i) {
    Vector x = sample();
    Vector w = sample();
    firm_pairs.emplace_back(x, sample());

    Vector p = spec.op_a.resolvent(x);
    report.max_inverse_sum =
        std::max(report.max_inverse_sum, norm(p + inv_a.resolvent(x) - x));

    Vector r = 2.0 * p - x;
    Vector lhs = x - dr_step(spec, x);
    Vector mid = p - spec.op_b.resolvent(r);
    Vector rhs = inv_a.resolvent(x) + inv_b.resolvent(r);
    report.max_double_identity = std::max(
        report.max_double_identity, std::max(norm(lhs - mid), norm(lhs - rhs)));

    OperatorHandle shifted = resolvent_of_shift_plus(spec.op_a, w);
    report.max_shift =
        std::max(report.max_shift, norm(shifted.resolvent(x - w) - p));
    report.max_shift = std::max(
        report.max_shift,
        norm(inv_a.resolvent(x) - (w + inverse_resolvent(shifted).resolvent(x - w))));

    if (np) {
      report.max_normal = std::max(
          report.max_normal, norm(dr_step(np->shifted, x) - dr_step(spec, x + *v_for_normal)));
    }
  }

  report.max_firmness =
      std::max(check_firm_nonexpansiveness(spec.op_a, firm_pairs).max_violation,
               check_firm_nonexpansiveness(spec.op_b, firm_pairs).max_violation);
  report.max_firmness = std::max(report.max_firmness, 0.0);
  return report;
}

}  // namespace drsplit
