#pragma once

// Catalog of convex sets with closed-form projections, the l1-over-a-box
// proximal map, operator handles built from them, and the algebra that
// derives new resolvents from existing ones (inverse, reflection, shifts).

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "drsplit/core.hpp"

namespace drsplit {

// ---------------------------------------------------------------------------
// Set catalog
// ---------------------------------------------------------------------------

// { x : <x,u> <= eta } with u != 0.
struct HalfspaceSet {
  Vector u;
  double eta;

  HalfspaceSet(Vector u_in, double eta_in) : u(std::move(u_in)), eta(eta_in) {
    if (norm(u) == 0.0) throw InvalidParamError("half-space normal must be nonzero");
    if (!std::isfinite(eta)) throw NonFiniteError("half-space offset must be finite");
  }
};

// Product of intervals [lo_i, hi_i]; bounds may be -inf / +inf but not NaN.
struct BoxSet {
  std::vector<double> lo, hi;

  BoxSet(std::vector<double> lo_in, std::vector<double> hi_in)
      : lo(std::move(lo_in)), hi(std::move(hi_in)) {
    if (lo.empty()) throw EmptyError("box must have at least one coordinate");
    if (lo.size() != hi.size()) throw DimensionMismatchError("box bounds differ in length");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i]) || std::isnan(hi[i]))
        throw NonFiniteError("box bound is NaN");
      if (lo[i] > hi[i]) throw InvalidParamError("box has lo > hi");
    }
  }

  std::size_t dim() const { return lo.size(); }
};

// anchor + K where K keeps the designated axis coordinate nonnegative and
// pins every other coordinate to zero.
struct TranslatedConeSet {
  Vector anchor;
  std::size_t axis;

  TranslatedConeSet(Vector anchor_in, std::size_t axis_in)
      : anchor(std::move(anchor_in)), axis(axis_in) {
    if (axis >= anchor.dim()) throw InvalidParamError("cone axis outside dimension range");
  }
};

// basepoint + span(basis) with a pairwise orthonormal basis. An empty basis
// describes the singleton {basepoint}.
struct AffineSubspaceSet {
  Vector basepoint;
  std::vector<Vector> basis;

  AffineSubspaceSet(Vector basepoint_in, std::vector<Vector> basis_in)
      : basepoint(std::move(basepoint_in)), basis(std::move(basis_in)) {
    for (const Vector& b : basis) {
      require_same_dim(basepoint, b, "affine subspace basis");
    }
    if (basis.size() > basepoint.dim())
      throw InvalidParamError("affine subspace basis larger than the ambient dimension");
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (std::size_t j = i; j < basis.size(); ++j) {
        double want = (i == j) ? 1.0 : 0.0;
        if (std::abs(dot(basis[i], basis[j]) - want) > kOrthonormalTol)
          throw NotOrthonormalError("affine subspace basis is not orthonormal");
      }
    }
  }

  std::size_t dim() const { return basepoint.dim(); }
};

// ---------------------------------------------------------------------------
// Projections and proximal maps
// ---------------------------------------------------------------------------

inline Vector project_halfspace(const HalfspaceSet& s, const Vector& x) {
  require_same_dim(s.u, x, "half-space projection");
  double val = dot(x, s.u);
  if (val <= s.eta) return x;  // includes points exactly on the boundary
  return x + ((s.eta - val) / dot(s.u, s.u)) * s.u;
}

inline Vector project_box(const BoxSet& s, const Vector& x) {
  if (x.dim() != s.dim()) throw DimensionMismatchError("box projection dimension mismatch");
  std::vector<double> c(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) c[i] = std::clamp(x[i], s.lo[i], s.hi[i]);
  return Vector(std::move(c));
}

inline Vector project_translated_cone(const TranslatedConeSet& s, const Vector& x) {
  require_same_dim(s.anchor, x, "cone projection");
  std::vector<double> c(x.dim(), 0.0);
  for (std::size_t i = 0; i < x.dim(); ++i) {
    double rel = x[i] - s.anchor[i];
    c[i] = s.anchor[i] + (i == s.axis ? std::max(rel, 0.0) : 0.0);
  }
  return Vector(std::move(c));
}

inline Vector project_affine(const AffineSubspaceSet& s, const Vector& x) {
  require_same_dim(s.basepoint, x, "affine projection");
  Vector rel = x - s.basepoint;
  Vector out = s.basepoint;
  for (const Vector& b : s.basis) out = out + dot(rel, b) * b;
  return out;
}

// Proximal map of ||.||_1 + indicator of the box [-c, c]:
// componentwise soft-threshold then clamp,
//   xi_i = min(max(|x_i| - 1, 0), c_i) * sign(x_i),  sign(0) = 0.
inline Vector prox_l1_box(const Vector& x, const std::vector<double>& c) {
  if (x.dim() != c.size()) throw DimensionMismatchError("l1-box prox dimension mismatch");
  std::vector<double> out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (std::isnan(c[i])) throw NonFiniteError("l1-box bound is NaN");
    if (c[i] < 0.0) throw NegativeBoundError("l1-box bound must be nonnegative");
    double mag = std::min(std::max(std::abs(x[i]) - 1.0, 0.0), c[i]);
    double sign = (x[i] > 0.0) ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
    out[i] = mag * sign;
  }
  return Vector(std::move(out));
}

// ---------------------------------------------------------------------------
// Membership tests (used by the attached indicator functions)
// ---------------------------------------------------------------------------

inline bool member_halfspace(const HalfspaceSet& s, const Vector& x, double slack = kMembershipSlack) {
  return dot(x, s.u) <= s.eta + slack * std::sqrt(dot(s.u, s.u));
}

inline bool member_box(const BoxSet& s, const Vector& x, double slack = kMembershipSlack) {
  if (x.dim() != s.dim()) throw DimensionMismatchError("box membership dimension mismatch");
  for (std::size_t i = 0; i < x.dim(); ++i) {
    if (x[i] < s.lo[i] - slack || x[i] > s.hi[i] + slack) return false;
  }
  return true;
}

inline bool member_translated_cone(const TranslatedConeSet& s, const Vector& x,
                                   double slack = kMembershipSlack) {
  return dist(x, project_translated_cone(s, x)) <= slack;
}

inline bool member_affine(const AffineSubspaceSet& s, const Vector& x,
                          double slack = kMembershipSlack) {
  return dist(x, project_affine(s, x)) <= slack;
}

// ---------------------------------------------------------------------------
// Operator handles for the catalog
// ---------------------------------------------------------------------------

// Normal cone operator of a set C: the resolvent is the projection onto C and
// the attached function is the indicator of C.

inline OperatorHandle normal_cone_operator(const HalfspaceSet& s) {
  std::size_t d = s.u.dim();
  return OperatorHandle{
      [s](const Vector& x) { return project_halfspace(s, x); },
      "normal_cone(halfspace)",
      [s](const Vector& x) { return member_halfspace(s, x) ? 0.0 : kInf; },
      d};
}

inline OperatorHandle normal_cone_operator(const BoxSet& s) {
  std::size_t d = s.dim();
  return OperatorHandle{
      [s](const Vector& x) { return project_box(s, x); },
      "normal_cone(box)",
      [s](const Vector& x) { return member_box(s, x) ? 0.0 : kInf; },
      d};
}

inline OperatorHandle normal_cone_operator(const TranslatedConeSet& s) {
  std::size_t d = s.anchor.dim();
  return OperatorHandle{
      [s](const Vector& x) { return project_translated_cone(s, x); },
      "normal_cone(translated_cone)",
      [s](const Vector& x) { return member_translated_cone(s, x) ? 0.0 : kInf; },
      d};
}

inline OperatorHandle normal_cone_operator(const AffineSubspaceSet& s) {
  std::size_t d = s.dim();
  return OperatorHandle{
      [s](const Vector& x) { return project_affine(s, x); },
      "normal_cone(affine)",
      [s](const Vector& x) { return member_affine(s, x) ? 0.0 : kInf; },
      d};
}

// Subdifferential of ||.||_1 + indicator of [-c, c]; the resolvent is the
// proximal map above.
inline OperatorHandle l1_box_subdifferential(const std::vector<double>& c) {
  std::size_t d = c.size();
  for (double ci : c) {
    if (std::isnan(ci)) throw NonFiniteError("l1-box bound is NaN");
    if (ci < 0.0) throw NegativeBoundError("l1-box bound must be nonnegative");
  }
  BoxSet box = [&] {
    std::vector<double> lo(d), hi(d);
    for (std::size_t i = 0; i < d; ++i) {
      lo[i] = -c[i];
      hi[i] = c[i];
    }
    return BoxSet(std::move(lo), std::move(hi));
  }();
  return OperatorHandle{
      [c](const Vector& x) { return prox_l1_box(x, c); },
      "subdiff(l1+box)",
      [box](const Vector& x) { return member_box(box, x) ? norm1(x) : kInf; },
      d};
}

// ---------------------------------------------------------------------------
// Operator algebra on resolvents
// ---------------------------------------------------------------------------

// Reflected resolvent 2 J - Id.
inline ResolventMap reflect(const OperatorHandle& op) {
  if (!op.resolvent) throw InvalidParamError("operator has no resolvent");
  ResolventMap j = op.resolvent;
  return [j](const Vector& x) { return 2.0 * j(x) - x; };
}

// Resolvent of the inverse operator: J_{A^{-1}} = Id - J_A.
inline OperatorHandle inverse_resolvent(const OperatorHandle& op) {
  if (!op.resolvent) throw InvalidParamError("operator has no resolvent");
  ResolventMap j = op.resolvent;
  return OperatorHandle{
      [j](const Vector& x) { return x - j(x); },
      "inverse(" + op.label + ")",
      {},
      op.dim};
}

// Resolvent of -w + A: J_{-w+A}(y) = J_A(y + w). When A carries a function f,
// -w + A carries f - <w, .>.
inline OperatorHandle resolvent_of_shift_plus(const OperatorHandle& op, const Vector& w) {
  if (!op.resolvent) throw InvalidParamError("operator has no resolvent");
  ResolventMap j = op.resolvent;
  ValueMap f = op.evaluable;
  ValueMap shifted_f;
  if (f) shifted_f = [f, w](const Vector& x) { return f(x) - dot(w, x); };
  return OperatorHandle{
      [j, w](const Vector& y) { return j(y + w); },
      "shift_plus(" + op.label + ")",
      std::move(shifted_f),
      op.dim};
}

// Operator b + A, realized as -(-b) + A. Its function is f + <b, .>.
inline OperatorHandle offset_operator(const OperatorHandle& op, const Vector& b) {
  OperatorHandle out = resolvent_of_shift_plus(op, -b);
  out.label = "offset(" + op.label + ")";
  return out;
}

// Operator A(. - v): J(y) = v + J_A(y - v); the function becomes f(. - v).
inline OperatorHandle translate_operator_arg(const OperatorHandle& op, const Vector& v) {
  if (!op.resolvent) throw InvalidParamError("operator has no resolvent");
  ResolventMap j = op.resolvent;
  ValueMap f = op.evaluable;
  ValueMap translated_f;
  if (f) translated_f = [f, v](const Vector& x) { return f(x - v); };
  return OperatorHandle{
      [j, v](const Vector& y) { return v + j(y - v); },
      "translate_arg(" + op.label + ")",
      std::move(translated_f),
      op.dim};
}

}  // namespace drsplit
