#pragma once

// Core data model: dense vectors, operator handles exposed through their
// resolvents, problem descriptions, and the per-iteration diagnostic records
// shared by the splitting engine and the displacement estimators.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drsplit {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Pointwise operator identities are enforced at this tolerance.
inline constexpr double kIdentityTol = 1e-10;
// Convergence-style checks (estimates, regularity) use this tolerance.
inline constexpr double kConvergenceTol = 1e-6;
// Orthonormality of user-supplied bases is validated at this tolerance.
inline constexpr double kOrthonormalTol = 1e-12;
// Indicator functions accept points this close to their set, so projected
// points and grid nodes on a boundary do not evaluate to +inf by rounding.
inline constexpr double kMembershipSlack = 1e-9;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteError : Error { using Error::Error; };
struct EmptyError : Error { using Error::Error; };
struct DimensionMismatchError : Error { using Error::Error; };
struct InvalidParamError : Error { using Error::Error; };
struct NegativeBoundError : Error { using Error::Error; };
struct NotOrthonormalError : Error { using Error::Error; };
struct NotInSubspaceError : Error { using Error::Error; };
struct InsufficientDataError : Error { using Error::Error; };
struct MissingFunctionError : Error { using Error::Error; };
struct MissingTestPointError : Error { using Error::Error; };
struct NotAFixedPointError : Error { using Error::Error; };
struct AllInfiniteError : Error { using Error::Error; };
struct UnsupportedSetError : Error { using Error::Error; };
struct NoConvergenceError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// Immutable dense point. Construction rejects empty or non-finite input, so
// every Vector in the system is a valid element of some R^m.
class Vector {
 public:
  explicit Vector(std::vector<double> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw EmptyError("vector must have at least one coordinate");
    for (double c : coords_) {
      if (!std::isfinite(c)) throw NonFiniteError("vector coordinate is not finite");
    }
  }

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }

 private:
  std::vector<double> coords_;
};

inline Vector make_vector(std::vector<double> coords) { return Vector(std::move(coords)); }

inline Vector zeros(std::size_t dim) { return Vector(std::vector<double>(dim, 0.0)); }

inline void require_same_dim(const Vector& a, const Vector& b, const char* what) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatchError(std::string(what) + ": dimensions " +
                                 std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
}

inline Vector operator+(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "vector addition");
  std::vector<double> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a[i] + b[i];
  return Vector(std::move(c));
}

inline Vector operator-(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "vector subtraction");
  std::vector<double> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = a[i] - b[i];
  return Vector(std::move(c));
}

inline Vector operator*(double s, const Vector& a) {
  std::vector<double> c(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) c[i] = s * a[i];
  return Vector(std::move(c));
}

inline Vector operator-(const Vector& a) { return -1.0 * a; }

inline double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "inner product");
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

inline double norm1(const Vector& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::abs(a[i]);
  return s;
}

inline double dist(const Vector& a, const Vector& b) { return norm(a - b); }

// A maximally monotone operator exposed as a black box through its resolvent
// J = (Id + A)^{-1}. When the operator is the subdifferential of a function,
// `evaluable` returns that function's extended-real value (+inf outside the
// domain). `dim` is 0 when the handle works in any dimension.
using ResolventMap = std::function<Vector(const Vector&)>;
using ValueMap = std::function<double(const Vector&)>;

struct OperatorHandle {
  ResolventMap resolvent;
  std::string label;
  ValueMap evaluable;  // empty when no function is attached
  std::size_t dim = 0;
};

struct ProblemSpec {
  std::size_t dim = 0;
  OperatorHandle op_a;
  OperatorHandle op_b;
  Vector start;
  std::string scenario_name;
};

inline void validate_problem(const ProblemSpec& spec) {
  if (spec.dim == 0) throw InvalidParamError("problem dimension must be positive");
  if (spec.start.dim() != spec.dim)
    throw DimensionMismatchError("start point dimension does not match problem dimension");
  if (!spec.op_a.resolvent || !spec.op_b.resolvent)
    throw InvalidParamError("both operators need a resolvent");
  if (spec.op_a.dim != 0 && spec.op_a.dim != spec.dim)
    throw DimensionMismatchError("first operator dimension does not match problem dimension");
  if (spec.op_b.dim != 0 && spec.op_b.dim != spec.dim)
    throw DimensionMismatchError("second operator dimension does not match problem dimension");
}

// One iteration's diagnostic row. With T the splitting operator and x the
// governing iterate:
//   p = J_A x            (primal shadow)
//   q = J_B (2 J_A - Id) x
//   d = J_{A^{-1}} x = x - p   (dual shadow)
//   e = J_{B^{-1}} (2 J_A - Id) x
//   step_diff = x - T x
// which forces p - q == step_diff, d + e == step_diff and p + d == x.
struct IterateRecord {
  std::size_t n = 0;
  Vector x, p, q, d, e, step_diff;
  std::optional<double> f_val, g_val;  // extended reals, set when evaluable
  std::optional<double> eps, delta;    // value-monitor terms, filled on demand
};

// Largest violation of the three internal identities of a record.
inline double record_identity_violation(const IterateRecord& r) {
  double a = norm((r.p - r.q) - r.step_diff);
  double b = norm((r.d + r.e) - r.step_diff);
  double c = norm((r.p + r.d) - r.x);
  return std::max(a, std::max(b, c));
}

enum class EstimateMethod { last_difference, tail_average, cesaro };

inline const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::last_difference: return "last_difference";
    case EstimateMethod::tail_average: return "tail_average";
    case EstimateMethod::cesaro: return "cesaro";
  }
  return "unknown";
}

// Estimate of the minimal displacement vector v and its decomposition
// v = v_d + v_r. `residual` is ||v - v_d - v_r||; `converged` is set when the
// decomposition is internally consistent (orthogonality and residual within
// tolerance on a sufficiently long trace).
struct DisplacementEstimate {
  Vector v, v_d, v_r;
  EstimateMethod method = EstimateMethod::last_difference;
  double residual = 0.0;
  std::size_t iterations_used = 0;
  bool converged = false;
};

struct RunConfig {
  std::size_t max_iters = 10000;
  double stop_tol = kConvergenceTol;  // <= 0 disables early stopping
  std::size_t record_every = 1;
  std::optional<Vector> anchor;  // known generalized fixed point, when available
};

struct RunTrace {
  std::vector<IterateRecord> records;
  DisplacementEstimate final_estimate;
  std::optional<Vector> limit_primal;   // set when the primal shadows settle
  std::optional<double> limit_value;    // f(p) + g(q) at the limit, when evaluable
  std::size_t iterations = 0;
  bool stopped_early = false;
};

struct FirmnessReport {
  double max_violation = 0.0;
  bool pass = true;
};

// Firm nonexpansiveness of a map J on sampled pairs:
//   ||Jx - Jy||^2 <= <Jx - Jy, x - y>.
// The reported violation is the largest (possibly negative) excess.
inline FirmnessReport check_firm_nonexpansiveness(
    const OperatorHandle& op, const std::vector<std::pair<Vector, Vector>>& samples,
    double tol = kIdentityTol) {
  if (!op.resolvent) throw InvalidParamError("operator has no resolvent");
  FirmnessReport report;
  report.max_violation = -kInf;
  if (samples.empty()) {
    report.max_violation = 0.0;
    return report;
  }
  for (const auto& [x, y] : samples) {
    Vector jx = op.resolvent(x);
    Vector jy = op.resolvent(y);
    Vector dj = jx - jy;
    double violation = dot(dj, dj) - dot(dj, x - y);
    report.max_violation = std::max(report.max_violation, violation);
  }
  report.pass = report.max_violation <= tol;
  return report;
}

}  // namespace drsplit
