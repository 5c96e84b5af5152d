#pragma once

// Estimation of the minimal displacement vector v and of its orthogonal
// decomposition v = v_d + v_r from a run trace, plus construction of the
// shifted ("normal") problem whose solutions exist even when the original
// problem is inconsistent.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "drsplit/core.hpp"
#include "drsplit/prox.hpp"

namespace drsplit {

namespace detail {

// Mean of per-step differences of a record field across consecutive records,
// normalized by the index gap, over records [first, last].
template <typename Getter>
inline Vector mean_record_difference(const std::vector<IterateRecord>& recs,
                                     std::size_t first, std::size_t last, Getter get) {
  Vector acc = zeros(get(recs[first]).dim());
  std::size_t terms = 0;
  for (std::size_t i = first; i < last; ++i) {
    double gap = static_cast<double>(recs[i + 1].n - recs[i].n);
    acc = acc + (1.0 / gap) * (get(recs[i]) - get(recs[i + 1]));
    ++terms;
  }
  return (1.0 / static_cast<double>(terms)) * acc;
}

}  // namespace detail

// Estimate from raw records without the minimum-length requirement. The
// engine uses this directly so that even very short runs produce a (flagged)
// estimate; `estimate_v` below enforces the minimum-length precondition.
inline DisplacementEstimate estimate_from_records(const std::vector<IterateRecord>& recs,
                                                  EstimateMethod method,
                                                  double tol = kConvergenceTol) {
  if (recs.size() < 2) throw InsufficientDataError("need at least two records to estimate");
  const IterateRecord& last = recs.back();
  const IterateRecord& prev = recs[recs.size() - 2];
  double tail_gap = static_cast<double>(last.n - prev.n);

  DisplacementEstimate est{last.step_diff, last.step_diff, last.step_diff, method, 0.0, last.n,
                           false};
  switch (method) {
    case EstimateMethod::last_difference: {
      est.v = last.step_diff;
      est.v_r = (1.0 / tail_gap) * (prev.p - last.p);
      est.v_d = (1.0 / tail_gap) * (prev.d - last.d);
      break;
    }
    case EstimateMethod::tail_average: {
      std::size_t window = (recs.size() + 4) / 5;  // ceil(20%)
      if (window < 2) window = 2;
      std::size_t first = recs.size() - window;
      Vector v = zeros(last.x.dim());
      for (std::size_t i = first; i < recs.size(); ++i) v = v + recs[i].step_diff;
      est.v = (1.0 / static_cast<double>(window)) * v;
      est.v_r = detail::mean_record_difference(recs, first, recs.size() - 1,
                                               [](const IterateRecord& r) { return r.p; });
      est.v_d = detail::mean_record_difference(recs, first, recs.size() - 1,
                                               [](const IterateRecord& r) { return r.d; });
      break;
    }
    case EstimateMethod::cesaro: {
      const IterateRecord& first = recs.front();
      double span = static_cast<double>(last.n - first.n);
      if (span <= 0.0) throw InsufficientDataError("averaged estimate needs n >= 1");
      double inv_n = 1.0 / span;
      est.v = inv_n * (first.x - last.x);
      est.v_r = inv_n * (first.p - last.p);
      est.v_d = inv_n * (first.d - last.d);
      break;
    }
  }
  est.residual = norm(est.v - est.v_d - est.v_r);
  est.converged = recs.size() >= 10 && est.residual <= tol &&
                  std::abs(dot(est.v_d, est.v_r)) <= tol;
  return est;
}

inline DisplacementEstimate estimate_v(const RunTrace& trace,
                                       EstimateMethod method = EstimateMethod::last_difference,
                                       double tol = kConvergenceTol) {
  if (trace.records.size() < 10)
    throw InsufficientDataError("trace has fewer than 10 records");
  return estimate_from_records(trace.records, method, tol);
}

// The decomposition must satisfy v = v_d + v_r with <v_d, v_r> = 0, hence
// ||v||^2 = ||v_d||^2 + ||v_r||^2. Failures are reported, not thrown, since
// they simply mean the run has not converged yet.
struct OrthogonalityReport {
  double inner = 0.0;           // <v_d, v_r>
  double residual = 0.0;        // ||v - v_d - v_r||
  double pythagoras_gap = 0.0;  // | ||v||^2 - ||v_d||^2 - ||v_r||^2 |
  bool pass = false;
};

inline OrthogonalityReport check_orthogonal_decomposition(const DisplacementEstimate& est,
                                                          double tol = kConvergenceTol) {
  OrthogonalityReport report;
  report.inner = dot(est.v_d, est.v_r);
  report.residual = norm(est.v - est.v_d - est.v_r);
  double n2 = dot(est.v, est.v);
  report.pythagoras_gap = std::abs(n2 - dot(est.v_d, est.v_d) - dot(est.v_r, est.v_r));
  report.pass = std::abs(report.inner) <= tol && report.residual <= tol &&
                report.pythagoras_gap <= tol;
  return report;
}

// The normal problem replaces (A, B) by (-v + A, B(. - v)); it is consistent
// whenever v is attained, and its splitting operator T' satisfies
// T'(y) = T(y + v) pointwise.
struct NormalProblem {
  ProblemSpec base;
  Vector v;
  ProblemSpec shifted;
};

inline NormalProblem build_normal_problem(const ProblemSpec& spec, const Vector& v) {
  validate_problem(spec);
  if (v.dim() != spec.dim)
    throw DimensionMismatchError("displacement vector dimension does not match problem");
  ProblemSpec shifted{spec.dim,
                      resolvent_of_shift_plus(spec.op_a, v),
                      translate_operator_arg(spec.op_b, v),
                      spec.start - v,
                      spec.scenario_name + ".normal"};
  return NormalProblem{spec, v, shifted};
}

}  // namespace drsplit
