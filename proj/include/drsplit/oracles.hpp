#pragma once

// Independent ground truth: closed-form displacement vectors and solution
// sets for the worked operator families, a brute-force grid minimizer for
// function-based problems, and recession-cone projection formulas. Everything
// here is computed without running the splitting iteration, so it can certify
// the engine's output.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "drsplit/core.hpp"
#include "drsplit/prox.hpp"

namespace drsplit {

// ---------------------------------------------------------------------------
// Ray-plus-point cone pair in the plane
// ---------------------------------------------------------------------------
//
// A = normal cone of (alpha, beta) + K and B = (gamma, delta) + normal cone
// of K, where K = { (t, 0) : t >= 0 } and gamma < 0. The problem is doubly
// inconsistent: the domains force the second coordinate, the ranges force the
// first.

struct ConeExampleParams {
  double alpha, beta, gamma, delta;
};

// { (t, level) : t >= left } in the plane.
struct HalflineSet {
  double left;
  double level;

  bool contains(const Vector& x, double tol = 1e-9) const {
    if (x.dim() != 2) throw DimensionMismatchError("half-line membership needs dimension 2");
    return x[0] >= left - tol && std::abs(x[1] - level) <= tol;
  }
  double distance(const Vector& x) const {
    if (x.dim() != 2) throw DimensionMismatchError("half-line distance needs dimension 2");
    double dx = std::max(left - x[0], 0.0);
    double dy = x[1] - level;
    return std::sqrt(dx * dx + dy * dy);
  }
};

struct ConeExampleTruth {
  Vector v_d, v_r, v;
  HalflineSet z;        // solutions of the normal problem
  HalflineSet z_tilde;  // solutions of the componentwise-shifted inclusion
  bool strict_inclusion;
};

inline ConeExampleTruth cone_example_truth(const ConeExampleParams& p) {
  if (!(p.gamma < 0.0)) throw InvalidParamError("cone example requires gamma < 0");
  for (double c : {p.alpha, p.beta, p.gamma, p.delta})
    if (!std::isfinite(c)) throw NonFiniteError("cone example parameter is not finite");
  Vector v_d = make_vector({0.0, p.beta});
  Vector v_r = make_vector({p.gamma, 0.0});
  HalflineSet z{std::max(p.gamma, p.alpha), p.beta};
  HalflineSet z_tilde{std::max(0.0, p.alpha), p.beta};
  return ConeExampleTruth{v_d, v_r, v_d + v_r, z, z_tilde, p.alpha < 0.0};
}

// Membership in z_tilde checked from the defining inclusion rather than the
// closed-form segment: x must lie in the first domain and x - v_d in the
// cone; the coordinatewise normal-cone intervals then absorb the offsets.
inline bool cone_ztilde_member(const ConeExampleParams& p, const Vector& x, double tol = 1e-9) {
  ConeExampleTruth t = cone_example_truth(p);
  if (x.dim() != 2) throw DimensionMismatchError("cone membership needs dimension 2");
  bool in_dom_a = x[0] >= p.alpha - tol && std::abs(x[1] - p.beta) <= tol;
  Vector shifted = x - t.v_d;
  bool in_dom_b = shifted[0] >= -tol && std::abs(shifted[1]) <= tol;
  return in_dom_a && in_dom_b;
}

// ---------------------------------------------------------------------------
// Parallel affine subspace pair
// ---------------------------------------------------------------------------
//
// A = normal cone of a + U and B = b + normal cone of U with a orthogonal to
// U and b inside U. Then (v_d, v_r) = (a, b) and the normal problem's
// solution set is a + U.

struct AffineExampleTruth {
  Vector v_d, v_r, v;
  AffineSubspaceSet z;  // z_tilde coincides with z for this family
};

inline AffineExampleTruth affine_example_truth(const std::vector<Vector>& u_basis,
                                               const Vector& a, const Vector& b) {
  AffineSubspaceSet subspace(zeros(a.dim()), u_basis);
  require_same_dim(a, b, "affine example offsets");
  Vector pa = project_affine(subspace, a);
  if (norm(pa) > kIdentityTol)
    throw NotOrthonormalError("offset a must be orthogonal to the subspace");
  Vector pb = project_affine(subspace, b);
  if (dist(pb, b) > kIdentityTol)
    throw NotInSubspaceError("offset b must lie inside the subspace");
  return AffineExampleTruth{a, b, a + b, AffineSubspaceSet(a, u_basis)};
}

// ---------------------------------------------------------------------------
// Half-space versus l1-over-a-box
// ---------------------------------------------------------------------------
//
// f the indicator of the half-space, g = ||.||_1 + indicator of [-c, c] with
// finite c. The Minkowski difference of the half-space and the box is again a
// half-space (offset grown by the box support function), so the displacement
// vector has the exact closed form v = v_d = projection of 0 onto it, v_r = 0.

struct HalfspaceL1Truth {
  Vector v_d, v_r, v;
  double eta_diff;  // offset of the difference half-space
  bool feasible;    // the two domains intersect
};

inline HalfspaceL1Truth halfspace_l1_truth(const HalfspaceSet& halfspace,
                                           const std::vector<double>& c) {
  if (halfspace.u.dim() != c.size())
    throw DimensionMismatchError("half-space and box dimensions differ");
  double support = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::isnan(c[i])) throw NonFiniteError("box bound is NaN");
    if (c[i] < 0.0) throw NegativeBoundError("box bound must be nonnegative");
    if (std::isinf(c[i])) throw InvalidParamError("closed-form truth needs finite box bounds");
    support += c[i] * std::abs(halfspace.u[i]);
  }
  double eta_diff = halfspace.eta + support;
  Vector v_d = zeros(halfspace.u.dim());
  if (eta_diff < 0.0) v_d = (eta_diff / dot(halfspace.u, halfspace.u)) * halfspace.u;
  Vector v_r = zeros(halfspace.u.dim());
  return HalfspaceL1Truth{v_d, v_r, v_d + v_r, eta_diff, eta_diff >= 0.0};
}

// ---------------------------------------------------------------------------
// Brute-force grid minimizer
// ---------------------------------------------------------------------------

struct GridSpec {
  std::vector<double> lo, hi;
  std::size_t points_per_axis;
};

struct GridMinimum {
  Vector argmin;
  double min_value;
  double cell_width;  // largest axis spacing, the resolution of the certificate
};

// Exhaustive minimization of y -> f(y) + g(y - v) over the grid. Ties keep
// the lexicographically smallest point. Deliberately brute force so its
// correctness is self-evident.
inline GridMinimum grid_minimize(const ValueMap& f, const ValueMap& g, const Vector& v,
                                 const GridSpec& grid) {
  if (!f || !g) throw MissingFunctionError("grid minimizer needs both functions");
  std::size_t d = grid.lo.size();
  if (d == 0) throw EmptyError("grid has no axes");
  if (grid.hi.size() != d || v.dim() != d)
    throw DimensionMismatchError("grid bounds and shift must share one dimension");
  if (grid.points_per_axis < 3) throw InvalidParamError("grid needs at least 3 points per axis");
  double total = 1.0;
  double cell = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(grid.lo[i]) || !std::isfinite(grid.hi[i]))
      throw NonFiniteError("grid bounds must be finite");
    if (grid.lo[i] > grid.hi[i]) throw InvalidParamError("grid has lo > hi");
    total *= static_cast<double>(grid.points_per_axis);
    cell = std::max(cell, (grid.hi[i] - grid.lo[i]) /
                              static_cast<double>(grid.points_per_axis - 1));
  }
  if (total > 2e8) throw InvalidParamError("grid is too large to enumerate");

  std::vector<std::size_t> idx(d, 0);
  std::vector<double> point(d);
  bool found = false;
  double best = kInf;
  std::vector<double> best_point;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) {
      point[i] = grid.lo[i] + static_cast<double>(idx[i]) * (grid.hi[i] - grid.lo[i]) /
                                  static_cast<double>(grid.points_per_axis - 1);
    }
    Vector y = make_vector(point);
    double value = f(y);
    if (value < kInf) value += g(y - v);
    if (value < best) {  // strict: keeps the lexicographically first minimizer
      best = value;
      best_point = point;
      found = true;
    }
    // advance the last axis fastest, so enumeration is lexicographic
    std::size_t axis = d;
    while (axis > 0) {
      --axis;
      if (++idx[axis] < grid.points_per_axis) break;
      idx[axis] = 0;
      if (axis == 0) {
        if (!found) throw AllInfiniteError("objective is +inf on every grid node");
        return GridMinimum{make_vector(best_point), best, cell};
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Recession-cone projections
// ---------------------------------------------------------------------------
//
// For a normal-cone (or l1-over-a-box subdifferential) operator A built on a
// catalog set, the decomposition can be recovered by projecting v onto cones
// derived from the recession cones of cl dom A and cl ran A:
//   v_d = P onto (rec cl dom A)^+   and   v_d = P onto -(rec cl ran A)
//   v_r = P onto -(rec cl dom A)    and   v_r = P onto (rec cl ran A)^+
// where ^+ is the positive polar cone.

namespace detail {

// Closed convex cones closed under negation and polarity.
struct CoordCone {
  enum Sign { zero, nonneg, nonpos, all };
  std::vector<Sign> signs;
};
struct RayCone { Vector u; };            // { t u : t >= 0 }
struct HalfspaceCone { Vector u; };      // { x : <x,u> <= 0 }
struct SubspaceCone {                    // span(basis), or its orthogonal complement
  std::vector<Vector> basis;
  std::size_t ambient_dim;
  bool complement;
};
using RecCone = std::variant<CoordCone, RayCone, HalfspaceCone, SubspaceCone>;

inline RecCone negate_cone(const RecCone& c) {
  if (const auto* cc = std::get_if<CoordCone>(&c)) {
    CoordCone out = *cc;
    for (auto& s : out.signs) {
      if (s == CoordCone::nonneg) s = CoordCone::nonpos;
      else if (s == CoordCone::nonpos) s = CoordCone::nonneg;
    }
    return out;
  }
  if (const auto* rc = std::get_if<RayCone>(&c)) return RayCone{-rc->u};
  if (const auto* hc = std::get_if<HalfspaceCone>(&c)) return HalfspaceCone{-hc->u};
  return c;  // subspaces are symmetric
}

// Negative polar cone { y : <y,x> <= 0 for all x in C }.
inline RecCone polar_cone(const RecCone& c) {
  if (const auto* cc = std::get_if<CoordCone>(&c)) {
    CoordCone out = *cc;
    for (auto& s : out.signs) {
      switch (s) {
        case CoordCone::zero: s = CoordCone::all; break;
        case CoordCone::all: s = CoordCone::zero; break;
        case CoordCone::nonneg: s = CoordCone::nonpos; break;
        case CoordCone::nonpos: s = CoordCone::nonneg; break;
      }
    }
    return out;
  }
  if (const auto* rc = std::get_if<RayCone>(&c)) return HalfspaceCone{rc->u};
  if (const auto* hc = std::get_if<HalfspaceCone>(&c)) return RayCone{hc->u};
  const auto& sc = std::get<SubspaceCone>(c);
  return SubspaceCone{sc.basis, sc.ambient_dim, !sc.complement};
}

// Positive polar cone C^+ = -(negative polar).
inline RecCone positive_polar_cone(const RecCone& c) { return negate_cone(polar_cone(c)); }

inline Vector project_cone(const RecCone& c, const Vector& x) {
  if (const auto* cc = std::get_if<CoordCone>(&c)) {
    if (x.dim() != cc->signs.size())
      throw DimensionMismatchError("cone projection dimension mismatch");
    std::vector<double> out(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
      switch (cc->signs[i]) {
        case CoordCone::zero: out[i] = 0.0; break;
        case CoordCone::all: out[i] = x[i]; break;
        case CoordCone::nonneg: out[i] = std::max(x[i], 0.0); break;
        case CoordCone::nonpos: out[i] = std::min(x[i], 0.0); break;
      }
    }
    return Vector(std::move(out));
  }
  if (const auto* rc = std::get_if<RayCone>(&c)) {
    double t = std::max(dot(x, rc->u), 0.0) / dot(rc->u, rc->u);
    return t * rc->u;
  }
  if (const auto* hc = std::get_if<HalfspaceCone>(&c))
    return project_halfspace(HalfspaceSet(hc->u, 0.0), x);
  const auto& sc = std::get<SubspaceCone>(c);
  Vector in_span = zeros(sc.ambient_dim);
  for (const Vector& b : sc.basis) in_span = in_span + dot(x, b) * b;
  return sc.complement ? x - in_span : in_span;
}

}  // namespace detail

using CatalogSet = std::variant<HalfspaceSet, BoxSet, TranslatedConeSet, AffineSubspaceSet>;

namespace detail {

// Recession cone of the closure of dom A for the normal-cone operator of the
// given set (the set itself).
inline RecCone recession_of_dom(const CatalogSet& set) {
  if (const auto* h = std::get_if<HalfspaceSet>(&set)) return HalfspaceCone{h->u};
  if (const auto* b = std::get_if<BoxSet>(&set)) {
    CoordCone out;
    out.signs.resize(b->dim());
    for (std::size_t i = 0; i < b->dim(); ++i) {
      bool lo_inf = std::isinf(b->lo[i]);
      bool hi_inf = std::isinf(b->hi[i]);
      out.signs[i] = lo_inf ? (hi_inf ? CoordCone::all : CoordCone::nonpos)
                            : (hi_inf ? CoordCone::nonneg : CoordCone::zero);
    }
    return out;
  }
  if (const auto* t = std::get_if<TranslatedConeSet>(&set)) {
    CoordCone out;
    out.signs.assign(t->anchor.dim(), CoordCone::zero);
    out.signs[t->axis] = CoordCone::nonneg;
    return out;
  }
  const auto& a = std::get<AffineSubspaceSet>(set);
  return SubspaceCone{a.basis, a.dim(), false};
}

}  // namespace detail

struct RecessionProjectionTruth {
  Vector v_d_from_dom, v_r_from_dom, v_d_from_ran, v_r_from_ran;
};

// Projects v with all four recession-cone formulas for the normal-cone
// operator of a catalog set. cl ran of such an operator is the negative polar
// of the recession cone of its domain, so both routes are available in closed
// form.
inline RecessionProjectionTruth recession_projection_truth(const CatalogSet& dom_of_a,
                                                           const Vector& v) {
  detail::RecCone rec_dom = detail::recession_of_dom(dom_of_a);
  detail::RecCone rec_ran = detail::polar_cone(rec_dom);
  return RecessionProjectionTruth{
      detail::project_cone(detail::positive_polar_cone(rec_dom), v),
      detail::project_cone(detail::negate_cone(rec_dom), v),
      detail::project_cone(detail::negate_cone(rec_ran), v),
      detail::project_cone(detail::positive_polar_cone(rec_ran), v)};
}

}  // namespace drsplit
