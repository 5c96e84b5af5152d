#pragma once

// Scenario files, trace/summary serialization and the run harness. A scenario
// JSON describes the problem (operator descriptors, start point, run budget)
// plus optional ground truth (oracle block), a known generalized fixed point
// (anchor) and a feasible test point for the value monitors. The harness runs
// the iteration, evaluates every applicable monitor and compares against the
// oracle, reporting pass (0), mismatch / not converged (1) or failure (2).

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "drsplit/core.hpp"
#include "drsplit/displacement.hpp"
#include "drsplit/engine.hpp"
#include "drsplit/oracles.hpp"
#include "drsplit/prox.hpp"

namespace drsplit {

using json = nlohmann::json;

// Harness comparison tolerances, pinned.
inline constexpr double kOracleVTol = 1e-4;   // displacement estimates vs oracle
inline constexpr double kOracleZTol = 1e-3;   // solution-point distance vs oracle set
inline constexpr double kOracleMuTol = 1e-4;  // optimal value vs oracle
inline constexpr double kMethodAgreeTol = 5e-3;  // pairwise estimator agreement
inline constexpr double kFejerSlack = 1e-9;   // allowed distance increase per step

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

// 17 significant digits: round-trips any double, and is byte-stable.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline std::string trace_csv_header(std::size_t dim) {
  std::ostringstream os;
  os << "n";
  auto block = [&](const char* base) {
    for (std::size_t i = 1; i <= dim; ++i) os << "," << base << "_" << i;
  };
  block("x");
  block("p");
  block("q");
  block("d");
  block("e");
  block("stepdiff");
  os << ",f_val,g_val,eps_n,delta_n";
  return os.str();
}

inline void emit_trace_csv(const RunTrace& trace, std::size_t dim, std::ostream& os) {
  if (trace.records.empty()) throw InsufficientDataError("trace has no records to emit");
  os << trace_csv_header(dim) << "\n";
  auto cells = [&](const Vector& v) {
    for (std::size_t i = 0; i < v.dim(); ++i) os << "," << format_double(v[i]);
  };
  auto opt_cell = [&](const std::optional<double>& v) {
    os << "," << (v ? format_double(*v) : "nan");
  };
  for (const IterateRecord& r : trace.records) {
    os << r.n;
    cells(r.x);
    cells(r.p);
    cells(r.q);
    cells(r.d);
    cells(r.e);
    cells(r.step_diff);
    opt_cell(r.f_val);
    opt_cell(r.g_val);
    opt_cell(r.eps);
    opt_cell(r.delta);
    os << "\n";
  }
  if (!os) throw IoError("failed while writing trace CSV");
}

inline void emit_trace_csv(const RunTrace& trace, std::size_t dim,
                           const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open trace CSV for writing: " + path.string());
  emit_trace_csv(trace, dim, os);
}

// Reads back a trace CSV produced by emit_trace_csv (used for round-trip
// verification). Optional cells parse as absent when they hold "nan".
inline std::vector<IterateRecord> parse_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("trace CSV is empty");
  std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (columns < 11 || (columns - 5) % 6 != 0)
    throw ParseError("trace CSV header has an unexpected column count");
  std::size_t dim = (columns - 5) / 6;

  std::vector<IterateRecord> records;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      cells.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cells.size() != columns) throw ParseError("trace CSV row has an unexpected column count");
    std::size_t at = 0;
    auto next = [&] { return std::stod(cells[at++]); };
    std::size_t n = static_cast<std::size_t>(next());
    auto vec = [&] {
      std::vector<double> c(dim);
      for (double& ci : c) ci = next();
      return Vector(std::move(c));
    };
    Vector x = vec(), p = vec(), q = vec(), d = vec(), e = vec(), sd = vec();
    auto opt = [&]() -> std::optional<double> {
      double val = next();
      if (std::isnan(val)) return std::nullopt;
      return val;
    };
    records.push_back(IterateRecord{n, x, p, q, d, e, sd, opt(), opt(), opt(), opt()});
  }
  return records;
}

// ---------------------------------------------------------------------------
// JSON parsing helpers
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_extended(const json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ValidationError(where + ": expected a number or \"inf\"/\"-inf\"");
}

inline std::vector<double> parse_number_list(const json& j, std::size_t dim,
                                             const std::string& where, bool extended = false) {
  if (!j.is_array()) throw ValidationError(where + ": expected an array");
  if (dim != 0 && j.size() != dim)
    throw ValidationError(where + ": expected " + std::to_string(dim) + " entries, got " +
                          std::to_string(j.size()));
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& cell : j) {
    if (extended) {
      out.push_back(parse_extended(cell, where));
    } else {
      if (!cell.is_number()) throw ValidationError(where + ": expected numeric entries");
      out.push_back(cell.get<double>());
    }
  }
  return out;
}

inline Vector parse_vector(const json& j, std::size_t dim, const std::string& where) {
  std::vector<double> c = parse_number_list(j, dim, where);
  try {
    return Vector(std::move(c));
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Operator descriptors
// ---------------------------------------------------------------------------

// Builds an operator handle from a JSON descriptor:
//   {"type":"halfspace","u":[...],"eta":t}          normal cone operator
//   {"type":"box","lo":[...],"hi":[...]}            normal cone operator
//   {"type":"translated_cone","anchor":[...],"axis":i}
//   {"type":"affine","basepoint":[...],"basis":[[...],...]}
//   {"type":"l1_box","c":[...]}                     subdifferential
//   {"type":"offset","offset":[...],"inner":{...}}        b + A
//   {"type":"translate_arg","offset":[...],"inner":{...}} A(. - offset)
inline OperatorHandle build_operator(const json& desc, std::size_t dim,
                                     const std::string& where) {
  if (!desc.is_object()) throw ValidationError(where + ": descriptor must be an object");
  if (!desc.contains("type") || !desc["type"].is_string())
    throw ValidationError(where + ": descriptor needs a string \"type\"");
  std::string type = desc["type"].get<std::string>();
  try {
    if (type == "halfspace") {
      Vector u = detail::parse_vector(desc.at("u"), dim, where + ".u");
      double eta = desc.at("eta").get<double>();
      return normal_cone_operator(HalfspaceSet(u, eta));
    }
    if (type == "box") {
      return normal_cone_operator(
          BoxSet(detail::parse_number_list(desc.at("lo"), dim, where + ".lo", true),
                 detail::parse_number_list(desc.at("hi"), dim, where + ".hi", true)));
    }
    if (type == "translated_cone") {
      Vector anchor = detail::parse_vector(desc.at("anchor"), dim, where + ".anchor");
      std::size_t axis = desc.at("axis").get<std::size_t>();
      return normal_cone_operator(TranslatedConeSet(anchor, axis));
    }
    if (type == "affine") {
      Vector basepoint = detail::parse_vector(desc.at("basepoint"), dim, where + ".basepoint");
      std::vector<Vector> basis;
      for (const auto& b : desc.at("basis"))
        basis.push_back(detail::parse_vector(b, dim, where + ".basis"));
      return normal_cone_operator(AffineSubspaceSet(basepoint, basis));
    }
    if (type == "l1_box") {
      return l1_box_subdifferential(
          detail::parse_number_list(desc.at("c"), dim, where + ".c", true));
    }
    if (type == "offset") {
      Vector offset = detail::parse_vector(desc.at("offset"), dim, where + ".offset");
      return offset_operator(build_operator(desc.at("inner"), dim, where + ".inner"), offset);
    }
    if (type == "translate_arg") {
      Vector offset = detail::parse_vector(desc.at("offset"), dim, where + ".offset");
      return translate_operator_arg(build_operator(desc.at("inner"), dim, where + ".inner"),
                                    offset);
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const json::exception& e) {
    throw ValidationError(where + ": " + e.what());
  } catch (const Error& e) {
    throw ValidationError(where + ": " + e.what());
  }
  throw ValidationError(where + ": unknown operator type \"" + type + "\"");
}

// The catalog set underlying a descriptor, with output offsets and argument
// translations peeled away (neither changes the recession geometry).
inline CatalogSet descriptor_catalog_set(const json& desc, std::size_t dim,
                                         const std::string& where) {
  std::string type = desc.at("type").get<std::string>();
  if (type == "offset" || type == "translate_arg")
    return descriptor_catalog_set(desc.at("inner"), dim, where + ".inner");
  if (type == "halfspace")
    return HalfspaceSet(detail::parse_vector(desc.at("u"), dim, where + ".u"),
                        desc.at("eta").get<double>());
  if (type == "box")
    return BoxSet(detail::parse_number_list(desc.at("lo"), dim, where + ".lo", true),
                  detail::parse_number_list(desc.at("hi"), dim, where + ".hi", true));
  if (type == "translated_cone")
    return TranslatedConeSet(detail::parse_vector(desc.at("anchor"), dim, where + ".anchor"),
                             desc.at("axis").get<std::size_t>());
  if (type == "affine") {
    std::vector<Vector> basis;
    for (const auto& b : desc.at("basis"))
      basis.push_back(detail::parse_vector(b, dim, where + ".basis"));
    return AffineSubspaceSet(detail::parse_vector(desc.at("basepoint"), dim, where + ".basepoint"),
                             basis);
  }
  throw UnsupportedSetError(where + ": no catalog set for operator type \"" + type + "\"");
}

// ---------------------------------------------------------------------------
// Oracle block
// ---------------------------------------------------------------------------

struct ZPoint { Vector point; };
struct ZBox { BoxSet box; };
struct ZHalfline { HalflineSet halfline; };
struct ZAffine { AffineSubspaceSet set; };
using ZSet = std::variant<ZPoint, ZBox, ZHalfline, ZAffine>;

inline double z_distance(const ZSet& z, const Vector& x) {
  if (const auto* p = std::get_if<ZPoint>(&z)) return dist(p->point, x);
  if (const auto* b = std::get_if<ZBox>(&z)) return dist(project_box(b->box, x), x);
  if (const auto* h = std::get_if<ZHalfline>(&z)) return h->halfline.distance(x);
  return dist(project_affine(std::get<ZAffine>(z).set, x), x);
}

struct OracleBlock {
  std::optional<Vector> v, v_d, v_r;
  std::optional<double> mu;
  std::optional<ZSet> z;
};

// ---------------------------------------------------------------------------
// Scenario file
// ---------------------------------------------------------------------------

struct ScenarioFile {
  std::string name;
  std::size_t dim;
  json op_a_desc, op_b_desc;
  Vector start;
  RunConfig run_cfg;
  std::optional<Vector> test_point;
  std::optional<OracleBlock> oracle;
};

inline ScenarioFile parse_scenario(const json& j) {
  std::vector<std::string> problems;
  auto complain = [&](const std::string& msg) { problems.push_back(msg); };

  std::string name = "unnamed";
  if (!j.contains("name") || !j["name"].is_string()) complain("\"name\" must be a string");
  else name = j["name"].get<std::string>();

  std::size_t dim = 0;
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() <= 0)
    complain("\"dim\" must be a positive integer");
  else dim = j["dim"].get<std::size_t>();

  json op_a_desc = j.value("operator_a", json());
  json op_b_desc = j.value("operator_b", json());
  std::optional<Vector> start;
  RunConfig cfg;
  std::optional<Vector> test_point;
  std::optional<OracleBlock> oracle;

  if (dim > 0) {
    for (const char* key : {"operator_a", "operator_b"}) {
      if (!j.contains(key)) {
        complain(std::string("\"") + key + "\" is required");
        continue;
      }
      try {
        (void)build_operator(j[key], dim, key);
      } catch (const Error& e) {
        complain(e.what());
      }
    }
    if (!j.contains("start")) {
      complain("\"start\" is required");
    } else {
      try {
        start = detail::parse_vector(j["start"], dim, "start");
      } catch (const Error& e) {
        complain(e.what());
      }
    }
    try {
      if (j.contains("run")) {
        const json& r = j["run"];
        cfg.max_iters = r.value("max_iters", cfg.max_iters);
        cfg.stop_tol = r.value("stop_tol", cfg.stop_tol);
        cfg.record_every = r.value("record_every", cfg.record_every);
        if (cfg.max_iters == 0) complain("run.max_iters must be at least 1");
        if (cfg.record_every == 0) complain("run.record_every must be at least 1");
        if (r.contains("anchor")) cfg.anchor = detail::parse_vector(r["anchor"], dim, "run.anchor");
      }
      if (j.contains("test_point_y"))
        test_point = detail::parse_vector(j["test_point_y"], dim, "test_point_y");
    } catch (const Error& e) {
      complain(e.what());
    }
    if (j.contains("oracle")) {
      const json& o = j["oracle"];
      OracleBlock block;
      try {
        if (o.contains("v")) block.v = detail::parse_vector(o["v"], dim, "oracle.v");
        if (o.contains("v_d")) block.v_d = detail::parse_vector(o["v_d"], dim, "oracle.v_d");
        if (o.contains("v_r")) block.v_r = detail::parse_vector(o["v_r"], dim, "oracle.v_r");
        if (o.contains("mu")) {
          if (!o["mu"].is_number()) throw ValidationError("oracle.mu must be a number");
          block.mu = o["mu"].get<double>();
        }
        if (o.contains("z")) {
          const json& z = o["z"];
          std::string kind = z.at("kind").get<std::string>();
          if (kind == "point") {
            block.z = ZPoint{detail::parse_vector(z.at("point"), dim, "oracle.z.point")};
          } else if (kind == "box") {
            block.z = ZBox{BoxSet(
                detail::parse_number_list(z.at("lo"), dim, "oracle.z.lo", true),
                detail::parse_number_list(z.at("hi"), dim, "oracle.z.hi", true))};
          } else if (kind == "halfline") {
            if (dim != 2) throw ValidationError("oracle.z halfline needs dim == 2");
            block.z = ZHalfline{
                HalflineSet{z.at("left").get<double>(), z.at("level").get<double>()}};
          } else if (kind == "affine") {
            std::vector<Vector> basis;
            for (const auto& b : z.at("basis"))
              basis.push_back(detail::parse_vector(b, dim, "oracle.z.basis"));
            block.z = ZAffine{AffineSubspaceSet(
                detail::parse_vector(z.at("basepoint"), dim, "oracle.z.basepoint"), basis)};
          } else {
            throw ValidationError("oracle.z.kind \"" + kind + "\" is not recognized");
          }
        }
        if (block.v && block.v_d && block.v_r) {
          if (norm(*block.v - *block.v_d - *block.v_r) > 1e-8)
            complain("oracle decomposition violates v = v_d + v_r");
          if (std::abs(dot(*block.v_d, *block.v_r)) > 1e-8)
            complain("oracle decomposition violates <v_d, v_r> = 0");
        }
        oracle = std::move(block);
      } catch (const json::exception& e) {
        complain(std::string("oracle: ") + e.what());
      } catch (const Error& e) {
        complain(e.what());
      }
    }
  }

  if (!problems.empty()) {
    std::string msg = "scenario validation failed:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ValidationError(msg);
  }
  return ScenarioFile{name, dim, op_a_desc, op_b_desc, *start, cfg, test_point, oracle};
}

inline ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open scenario file: " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

inline ProblemSpec to_problem(const ScenarioFile& sc) {
  return ProblemSpec{sc.dim, build_operator(sc.op_a_desc, sc.dim, "operator_a"),
                     build_operator(sc.op_b_desc, sc.dim, "operator_b"), sc.start, sc.name};
}

// Seed for all randomized sampling in the harness (identity checks).
inline std::uint64_t env_seed() {
  const char* s = std::getenv("DRTOOL_SEED");
  if (!s || *s == '\0') return 0;
  char* end = nullptr;
  unsigned long long value = std::strtoull(s, &end, 10);
  if (end == nullptr || *end != '\0')
    throw InvalidParamError("DRTOOL_SEED must be a nonnegative integer");
  return static_cast<std::uint64_t>(value);
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

struct RunOverrides {
  std::optional<std::size_t> max_iters;
  std::optional<double> oracle_tol;  // replaces the displacement comparison tolerance
};

struct ScenarioOutcome {
  std::string name;
  std::size_t dim = 0;
  int exit_code = 0;  // 0 pass, 1 mismatch or not converged, 2 runtime failure
  std::vector<std::string> notes;
  json summary;
  std::optional<RunTrace> trace;
};

namespace detail {

inline json to_json(const Vector& v) { return json(v.coords()); }

inline json to_json(const DisplacementEstimate& e) {
  return json{{"v", to_json(e.v)},
              {"v_d", to_json(e.v_d)},
              {"v_r", to_json(e.v_r)},
              {"method", to_string(e.method)},
              {"residual", e.residual},
              {"iterations_used", e.iterations_used},
              {"converged", e.converged}};
}

}  // namespace detail

inline ScenarioOutcome run_scenario(const ScenarioFile& sc, const RunOverrides& overrides = {}) {
  ScenarioOutcome out;
  out.name = sc.name;
  out.dim = sc.dim;
  out.summary["name"] = sc.name;
  out.summary["dim"] = sc.dim;

  double v_tol = overrides.oracle_tol.value_or(kOracleVTol);
  bool gate = sc.oracle.has_value();
  std::vector<json> checks;
  bool any_fail = false;
  auto check = [&](const std::string& name, bool pass, const std::string& detail, bool gating) {
    checks.push_back(json{{"name", name}, {"pass", pass}, {"detail", detail}});
    if (gating && !pass) {
      any_fail = true;
      out.notes.push_back("check failed: " + name + " (" + detail + ")");
    }
  };

  try {
    ProblemSpec spec = to_problem(sc);
    RunConfig cfg = sc.run_cfg;
    if (overrides.max_iters) cfg.max_iters = *overrides.max_iters;

    RunTrace trace = run(spec, cfg);
    out.summary["iterations"] = trace.iterations;
    out.summary["stopped_early"] = trace.stopped_early;

    // Displacement estimates, all three methods.
    const DisplacementEstimate& est = trace.final_estimate;
    DisplacementEstimate tail = estimate_from_records(trace.records, EstimateMethod::tail_average);
    DisplacementEstimate cesaro = estimate_from_records(trace.records, EstimateMethod::cesaro);
    out.summary["estimate"] = detail::to_json(est);
    out.summary["estimates_by_method"] =
        json{{"last_difference", detail::to_json(est)},
             {"tail_average", detail::to_json(tail)},
             {"cesaro", detail::to_json(cesaro)}};

    double method_gap = 0.0;
    const DisplacementEstimate* methods[] = {&est, &tail, &cesaro};
    for (const DisplacementEstimate* a : methods) {
      for (const DisplacementEstimate* b : methods) {
        method_gap = std::max(method_gap, norm(a->v - b->v));
        method_gap = std::max(method_gap, norm(a->v_d - b->v_d));
        method_gap = std::max(method_gap, norm(a->v_r - b->v_r));
      }
    }
    out.summary["method_gap"] = method_gap;
    bool methods_agree = method_gap <= kMethodAgreeTol;
    check("methods_agree", methods_agree,
          methods_agree ? "estimators agree pairwise"
                        : "not yet converged: estimators disagree by " + format_double(method_gap),
          gate);
    check("estimate_converged", est.converged,
          est.converged ? "decomposition is internally consistent"
                        : "not yet converged: decomposition residual " +
                              format_double(est.residual),
          gate);

    OrthogonalityReport orth = check_orthogonal_decomposition(est);
    out.summary["orthogonality"] = json{{"inner", orth.inner},
                                        {"residual", orth.residual},
                                        {"pythagoras_gap", orth.pythagoras_gap},
                                        {"pass", orth.pass}};
    check("orthogonality", orth.pass, "inner product " + format_double(orth.inner), gate);

    RegularityReport reg = asymptotic_regularity_report(trace);
    out.summary["regularity"] = json{{"primal_tail", reg.primal_tail},
                                     {"dual_tail", reg.dual_tail},
                                     {"primal_regular", reg.primal_regular},
                                     {"dual_regular", reg.dual_regular},
                                     {"consistent_with_estimate", reg.consistent_with_estimate}};
    check("regularity_internal", reg.consistent_with_estimate,
          "shadow-increment tails vs estimated decomposition", gate);

    // Shifted governing sequence (bounded exactly when v is attained).
    {
      std::vector<Vector> shifted = shifted_governing(trace, est.v);
      double max_norm = 0.0;
      for (const Vector& s : shifted) max_norm = std::max(max_norm, norm(s));
      out.summary["shifted_governing"] =
          json{{"final", detail::to_json(shifted.back())}, {"max_norm", max_norm}};
    }

    // Value monitors (functions setting only).
    if (spec.op_a.evaluable && spec.op_b.evaluable && sc.test_point) {
      ValueReport vr = value_monitor(spec, trace, sc.test_point);
      trace = with_value_monitors(std::move(trace), vr);
      out.summary["values"] = json{{"final_value", vr.final_value},
                                   {"eps_tail", vr.eps_tail},
                                   {"delta_tail", vr.delta_tail},
                                   {"bound_at_test_point", vr.bound_at_y},
                                   {"max_bound_violation", vr.max_bound_violation}};
    }

    // Monotone distance to the target pair derived from the anchor.
    if (cfg.anchor) {
      Vector target_z = spec.op_a.resolvent(*cfg.anchor);
      Vector target_k = *cfg.anchor - target_z;
      const Vector& v_d = sc.oracle && sc.oracle->v_d ? *sc.oracle->v_d : est.v_d;
      const Vector& v_r = sc.oracle && sc.oracle->v_r ? *sc.oracle->v_r : est.v_r;
      FejerReport fejer = fejer_monitor(trace, v_d, v_r, target_z, target_k, kFejerSlack);
      out.summary["fejer"] = json{{"monotone", fejer.monotone},
                                  {"max_increase", fejer.max_increase},
                                  {"first_distance", fejer.distances.front()},
                                  {"last_distance", fejer.distances.back()}};
      check("fejer_monotone", fejer.monotone,
            "max distance increase " + format_double(fejer.max_increase), gate);

      if (sc.oracle && sc.oracle->v && sc.oracle->v_d && sc.oracle->v_r) {
        AnchoredDriftReport drift =
            anchored_shadow_check(spec, *cfg.anchor, *sc.oracle->v, *sc.oracle->v_d,
                                  *sc.oracle->v_r, std::min<std::size_t>(cfg.max_iters, 1000));
        out.summary["anchored_drift"] = json{{"max_scaled_violation", drift.max_scaled_violation},
                                             {"pass", drift.pass}};
        check("anchored_drift", drift.pass,
              "max scaled violation " + format_double(drift.max_scaled_violation), gate);
      }
    }

    // Normal problem: identity spot-check and a consistent solve.
    const Vector v_used = sc.oracle && sc.oracle->v ? *sc.oracle->v : est.v;
    {
      IdentityCheckReport ids = check_identities(spec, 100, env_seed(), v_used);
      out.summary["normal_identity_max_violation"] = ids.max_normal;
      check("normal_identity", ids.max_normal <= kIdentityTol,
            "max violation " + format_double(ids.max_normal), gate);
      NormalProblem np = build_normal_problem(spec, v_used);
      try {
        NormalSolution sol = solve_normal(np, cfg);
        json normal{{"z_bar", detail::to_json(sol.z_bar)},
                    {"residual", sol.residual},
                    {"iterations", sol.iterations}};
        if (sol.mu) normal["mu"] = *sol.mu;
        out.summary["normal"] = normal;

        if (sc.oracle && sc.oracle->z) {
          double dz = z_distance(*sc.oracle->z, sol.z_bar);
          out.summary["oracle_deltas"]["z_normal"] = dz;
          check("oracle_z_normal", dz <= kOracleZTol, "distance " + format_double(dz), gate);
        }
        if (sc.oracle && sc.oracle->mu && sol.mu) {
          double dmu = std::abs(*sol.mu - *sc.oracle->mu);
          out.summary["oracle_deltas"]["mu"] = dmu;
          check("oracle_mu", dmu <= kOracleMuTol, "delta " + format_double(dmu), gate);
        }
        if (trace.limit_primal) {
          double gap = dist(*trace.limit_primal, sol.z_bar);
          out.summary["normal"]["shadow_gap"] = gap;
          check("normal_matches_shadow", gap <= kOracleZTol,
                "distance between shadow limit and normal solution " + format_double(gap), gate);
        }
      } catch (const NoConvergenceError& e) {
        out.summary["normal"] = json{{"error", e.what()}};
        check("normal_solve", false, e.what(), gate);
      }
    }

    if (trace.limit_primal) {
      out.summary["limit_primal"] = detail::to_json(*trace.limit_primal);
      if (trace.limit_value) out.summary["limit_value"] = *trace.limit_value;
    }

    // Oracle comparisons.
    if (sc.oracle) {
      const OracleBlock& oracle = *sc.oracle;
      auto compare_vec = [&](const char* key, const std::optional<Vector>& want,
                             const Vector& got) {
        if (!want) return;
        double delta = dist(*want, got);
        out.summary["oracle_deltas"][key] = delta;
        check(std::string("oracle_") + key, delta <= v_tol, "delta " + format_double(delta),
              true);
      };
      compare_vec("v", oracle.v, est.v);
      compare_vec("v_d", oracle.v_d, est.v_d);
      compare_vec("v_r", oracle.v_r, est.v_r);

      if (oracle.z && trace.limit_primal) {
        double dz = z_distance(*oracle.z, *trace.limit_primal);
        out.summary["oracle_deltas"]["z_shadow"] = dz;
        check("oracle_z_shadow", dz <= kOracleZTol, "distance " + format_double(dz), true);
      }
      if (oracle.mu && trace.limit_value) {
        double dmu = std::abs(*trace.limit_value - *oracle.mu);
        out.summary["oracle_deltas"]["value_limit"] = dmu;
        check("oracle_value_limit", dmu <= kOracleMuTol, "delta " + format_double(dmu), true);
      }
      if (oracle.v_r && oracle.v_d) {
        bool want_primal = norm(*oracle.v_r) <= kConvergenceTol;
        bool want_dual = norm(*oracle.v_d) <= kConvergenceTol;
        bool match = reg.primal_regular == want_primal && reg.dual_regular == want_dual;
        check("regularity_dichotomy", match,
              match ? "shadow regularity matches the oracle decomposition"
                    : "shadow regularity contradicts the oracle decomposition",
              true);
      }
    }

    out.trace = std::move(trace);
  } catch (const Error& e) {
    out.exit_code = 2;
    out.notes.push_back(e.what());
    out.summary["error"] = e.what();
    out.summary["checks"] = checks;
    out.summary["exit_code"] = out.exit_code;
    return out;
  }

  out.exit_code = any_fail ? 1 : 0;
  out.summary["checks"] = checks;
  out.summary["exit_code"] = out.exit_code;
  return out;
}

inline void write_outputs(const ScenarioOutcome& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory: " + dir.string());
  if (out.trace) emit_trace_csv(*out.trace, out.dim, dir / (out.name + "_trace.csv"));
  std::ofstream os(dir / (out.name + "_summary.json"), std::ios::binary);
  if (!os) throw IoError("cannot open summary for writing");
  os << out.summary.dump(2) << "\n";
  if (!os) throw IoError("failed while writing summary");
}

}  // namespace drsplit
