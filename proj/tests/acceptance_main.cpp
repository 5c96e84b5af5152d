// Acceptance gate: one PASS/FAIL line per criterion, exit code = number of
// failed criteria. Runs against the bundled scenario corpus.

#include <drsplit/drsplit.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

using namespace drsplit;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int index, const std::string& label, bool pass, const std::string& detail) {
  std::printf("%s: criterion %d, %s (%s)\n", pass ? "PASS" : "FAIL", index, label.c_str(),
              detail.c_str());
  if (!pass) ++g_failures;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", x);
  return buf;
}

struct Loaded {
  ScenarioFile sc;
  ProblemSpec spec;
  RunTrace trace;
};

std::map<std::string, Loaded> run_corpus(const fs::path& dir) {
  std::map<std::string, Loaded> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    ScenarioFile sc = load_scenario(entry.path());
    ProblemSpec spec = to_problem(sc);
    RunTrace trace = run(spec, sc.run_cfg);
    std::string name = sc.name;
    out.emplace(std::move(name), Loaded{std::move(sc), std::move(spec), std::move(trace)});
  }
  return out;
}

Vector shift_pattern(std::size_t dim) {
  std::vector<double> c(dim);
  const double base[4] = {0.5, -0.75, 0.25, -0.5};
  for (std::size_t i = 0; i < dim; ++i) c[i] = base[i % 4];
  return Vector(std::move(c));
}

// --------------------------------------------------------------------------
// 1. Pointwise operator identities across dimensions 1..4
// --------------------------------------------------------------------------

void criterion_identities() {
  std::vector<std::pair<std::string, ProblemSpec>> pairs;
  auto add = [&](const std::string& name, std::size_t dim, OperatorHandle a, OperatorHandle b) {
    pairs.emplace_back(name, ProblemSpec{dim, std::move(a), std::move(b), zeros(dim), name});
  };

  add("halfspace/box 1d", 1,
      normal_cone_operator(HalfspaceSet(make_vector({1.0}), 0.5)),
      normal_cone_operator(BoxSet({-1.0}, {2.0})));
  add("box/l1 1d", 1, normal_cone_operator(BoxSet({0.0}, {3.0})),
      l1_box_subdifferential({1.0}));
  add("cone/point 1d", 1,
      normal_cone_operator(TranslatedConeSet(make_vector({0.25}), 0)),
      normal_cone_operator(AffineSubspaceSet(make_vector({0.7}), {})));

  add("cone/shifted cone 2d", 2,
      normal_cone_operator(TranslatedConeSet(make_vector({-2.0, 3.0}), 0)),
      offset_operator(normal_cone_operator(TranslatedConeSet(make_vector({0.0, 0.0}), 0)),
                      make_vector({-1.0, 0.0})));
  add("line/shifted line 2d", 2,
      normal_cone_operator(AffineSubspaceSet(make_vector({0.0, 3.0}),
                                             {make_vector({1.0, 0.0})})),
      offset_operator(normal_cone_operator(AffineSubspaceSet(make_vector({0.0, 0.0}),
                                                             {make_vector({1.0, 0.0})})),
                      make_vector({2.0, 0.0})));
  add("halfspace/l1 2d", 2,
      normal_cone_operator(HalfspaceSet(make_vector({1.0, 0.0}), -2.0)),
      l1_box_subdifferential({1.0, 1.0}));
  add("box/box 2d", 2, normal_cone_operator(BoxSet({-1.0, -1.0}, {1.0, 1.0})),
      normal_cone_operator(BoxSet({0.0, 0.0}, {2.0, 2.0})));

  add("halfspace/box 3d", 3,
      normal_cone_operator(HalfspaceSet(make_vector({1.0, 2.0, -1.0}), 0.3)),
      normal_cone_operator(BoxSet({-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0})));
  add("plane/l1 3d", 3,
      normal_cone_operator(AffineSubspaceSet(
          make_vector({0.0, 0.0, 2.0}),
          {make_vector({1.0, 0.0, 0.0}), make_vector({0.0, 1.0, 0.0})})),
      l1_box_subdifferential({1.0, 0.5, 2.0}));

  add("open box/halfspace 4d", 4,
      normal_cone_operator(BoxSet({-kInf, -1.0, 0.0, -2.0}, {1.0, kInf, kInf, 2.0})),
      normal_cone_operator(HalfspaceSet(make_vector({1.0, 1.0, 1.0, 1.0}), 1.0)));
  add("l1/cone 4d", 4, l1_box_subdifferential({0.5, 1.0, 1.5, 2.0}),
      normal_cone_operator(TranslatedConeSet(make_vector({1.0, 0.0, 0.0, 0.0}), 2)));

  auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool all_pass = true;
  std::string first_bad;
  std::uint64_t seed = 7;
  for (const auto& [name, spec] : pairs) {
    IdentityCheckReport rep = check_identities(spec, 1000, seed++, shift_pattern(spec.dim));
    double m = std::max({rep.max_inverse_sum, rep.max_double_identity, rep.max_shift,
                         rep.max_firmness, rep.max_normal});
    worst = std::max(worst, m);
    if (!rep.pass(kIdentityTol) && first_bad.empty()) {
      all_pass = false;
      first_bad = name;
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = std::to_string(pairs.size()) + " operator pairs, 1000 samples each, " +
                       "worst violation " + num(worst) + ", " + num(secs) + "s";
  if (!first_bad.empty()) detail += ", first failing pair: " + first_bad;
  report(1, "resolvent identity suite, dimensions 1-4", all_pass && secs < 5.0, detail);
}

// --------------------------------------------------------------------------
// 2. Translated-cone family against its closed form
// --------------------------------------------------------------------------

void criterion_cones(const std::map<std::string, Loaded>& all) {
  const std::vector<std::pair<std::string, ConeExampleParams>> cases = {
      {"cone_example", {-2.0, 3.0, -1.0, 0.0}},
      {"cone_example_feasible_alpha", {5.0, 0.0, -1.0, 7.0}},
      {"cone_example_boundary", {0.0, 0.0, -1.0, 0.0}},
  };
  bool pass = true;
  double worst = 0.0;
  std::string notes;
  for (const auto& [name, params] : cases) {
    const Loaded& ld = all.at(name);
    ConeExampleTruth truth = cone_example_truth(params);
    const DisplacementEstimate& est = ld.trace.final_estimate;
    double err = std::max({dist(est.v, truth.v), dist(est.v_d, truth.v_d),
                           dist(est.v_r, truth.v_r)});
    worst = std::max(worst, err);
    if (err > 1e-4 || ld.trace.iterations > 20000) pass = false;

    if (dist(*ld.sc.oracle->v, truth.v) > 1e-12) pass = false;

    // Inclusion of the componentwise-shifted solutions in the normal ones,
    // strict exactly when the first anchor coordinate is negative.
    for (double t : {0.0, 0.5, 3.0}) {
      Vector inner = make_vector({truth.z_tilde.left + t, truth.z_tilde.level});
      if (!cone_ztilde_member(params, inner) || !truth.z.contains(inner)) pass = false;
    }
    Vector edge = make_vector({truth.z.left, truth.z.level});
    bool witness_outside = !cone_ztilde_member(params, edge);
    if (truth.strict_inclusion != (params.alpha < 0.0)) pass = false;
    if (witness_outside != truth.strict_inclusion) pass = false;
    if (!notes.empty()) notes += "; ";
    notes += name + (truth.strict_inclusion ? " strict" : " tight");
  }
  report(2, "cone family displacement closed form", pass,
         "worst estimate error " + num(worst) + "; " + notes);
}

// --------------------------------------------------------------------------
// 3. Parallel affine subspaces: exact displacement and anchored drift
// --------------------------------------------------------------------------

void criterion_affine(const std::map<std::string, Loaded>& all) {
  struct Case {
    std::string name;
    std::vector<Vector> basis;
    Vector a, b;
  };
  const std::vector<Case> cases = {
      {"affine_example",
       {make_vector({1.0, 0.0})},
       make_vector({0.0, 3.0}),
       make_vector({2.0, 0.0})},
      {"affine_example_dim3",
       {make_vector({1.0, 0.0, 0.0}), make_vector({0.0, 1.0, 0.0})},
       make_vector({0.0, 0.0, 2.0}),
       make_vector({1.0, -1.0, 0.0})},
  };
  bool pass = true;
  double worst_est = 0.0, worst_drift = 0.0;
  for (const Case& c : cases) {
    const Loaded& ld = all.at(c.name);
    AffineExampleTruth truth = affine_example_truth(c.basis, c.a, c.b);
    const DisplacementEstimate& est = ld.trace.final_estimate;
    double err = std::max({dist(est.v, truth.v), dist(est.v_d, truth.v_d),
                           dist(est.v_r, truth.v_r)});
    worst_est = std::max(worst_est, err);
    if (err > 1e-6) pass = false;

    AnchoredDriftReport drift = anchored_shadow_check(
        ld.spec, *ld.sc.run_cfg.anchor, truth.v, truth.v_d, truth.v_r, 1000);
    worst_drift = std::max(worst_drift, drift.max_scaled_violation);
    if (!drift.pass) pass = false;
  }
  report(3, "affine family displacement and drift rays", pass,
         "worst estimate error " + num(worst_est) + ", worst scaled drift violation " +
             num(worst_drift));
}

// --------------------------------------------------------------------------
// 4. Half-space vs l1-over-box from several starts
// --------------------------------------------------------------------------

void criterion_multistart(const std::map<std::string, Loaded>& all) {
  const Loaded& ld = all.at("halfspace_l1");
  const Vector v_true = make_vector({-1.0, 0.0});
  const Vector z_true = make_vector({-2.0, 0.0});
  const std::vector<Vector> starts = {
      make_vector({0.0, 0.0}), make_vector({3.0, 5.0}), make_vector({-10.0, 2.0}),
      make_vector({0.7, -0.3})};

  bool pass = true;
  double worst_v = 0.0, worst_z = 0.0, worst_val = 0.0, worst_tail = 0.0;
  auto t0 = std::chrono::steady_clock::now();
  for (const Vector& s : starts) {
    ProblemSpec spec = ld.spec;
    spec.start = s;
    RunTrace trace = run(spec, ld.sc.run_cfg);
    const DisplacementEstimate& est = trace.final_estimate;
    worst_v = std::max(worst_v, dist(est.v, v_true));
    if (norm(est.v_r) > 1e-5 || dist(est.v, v_true) > 1e-4) pass = false;
    if (!trace.limit_primal || !trace.limit_value) {
      pass = false;
      continue;
    }
    worst_z = std::max(worst_z, dist(*trace.limit_primal, z_true));
    worst_val = std::max(worst_val, std::abs(*trace.limit_value - 1.0));
    if (dist(*trace.limit_primal, z_true) > 1e-3) pass = false;
    if (std::abs(*trace.limit_value - 1.0) > 1e-4) pass = false;

    ValueReport values = value_monitor(spec, trace, ld.sc.test_point);
    worst_tail = std::max({worst_tail, values.eps_tail, values.delta_tail,
                           values.max_bound_violation});
    if (values.eps_tail > 1e-6 || values.delta_tail > 1e-6 ||
        values.max_bound_violation > 1e-6)
      pass = false;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= 2.0) pass = false;
  report(4, "half-space/l1 multistart limits and value certificates", pass,
         "4 starts, worst: v error " + num(worst_v) + ", shadow limit error " + num(worst_z) +
             ", value error " + num(worst_val) + ", monitor tail " + num(worst_tail) + ", " +
             num(secs) + "s");
}

// --------------------------------------------------------------------------
// 5. Asymptotic-regularity dichotomy across the corpus
// --------------------------------------------------------------------------

void criterion_regularity(const std::map<std::string, Loaded>& all) {
  bool pass = true;
  std::string bad;
  for (const auto& [name, ld] : all) {
    RegularityReport rep = asymptotic_regularity_report(ld.trace);
    bool primal_expected = norm(*ld.sc.oracle->v_r) <= 1e-12;
    bool dual_expected = norm(*ld.sc.oracle->v_d) <= 1e-12;
    bool ok = rep.primal_regular == primal_expected && rep.dual_regular == dual_expected &&
              rep.consistent_with_estimate;
    if (!ok) {
      pass = false;
      if (bad.empty()) bad = name;
    }
  }
  std::string detail = std::to_string(all.size()) + " scenarios";
  if (!bad.empty()) detail += ", first mismatch: " + bad;
  report(5, "primal/dual regularity matches the oracle dichotomy", pass, detail);
}

// --------------------------------------------------------------------------
// 6. Shadow divergence at the oracle rate when the range part is nonzero
// --------------------------------------------------------------------------

void criterion_divergence(const std::map<std::string, Loaded>& all) {
  bool pass = true;
  std::size_t primal_checked = 0, dual_checked = 0;
  double worst_margin = kInf;
  for (const auto& [name, ld] : all) {
    const Vector& vr = *ld.sc.oracle->v_r;
    const Vector& vd = *ld.sc.oracle->v_d;
    const auto& recs = ld.trace.records;
    const IterateRecord& last = recs.back();
    double nlast = static_cast<double>(last.n);

    if (norm(vr) > 1e-12) {
      ++primal_checked;
      double bound = 0.0;
      for (const IterateRecord& r : recs)
        bound = std::max(bound, norm(r.p + static_cast<double>(r.n) * vr));
      double lhs = norm(last.p);
      if (lhs < nlast * norm(vr) - bound - 1e-6) pass = false;
      if (lhs < 0.5 * nlast * norm(vr)) pass = false;
      worst_margin = std::min(worst_margin, lhs / (nlast * norm(vr)));
      if (nlast < 10000) pass = false;
    }
    if (norm(vd) > 1e-12) {
      ++dual_checked;
      double bound = 0.0;
      for (const IterateRecord& r : recs)
        bound = std::max(bound, norm(r.d + static_cast<double>(r.n) * vd));
      double lhs = norm(last.d);
      if (lhs < nlast * norm(vd) - bound - 1e-6) pass = false;
      if (lhs < 0.5 * nlast * norm(vd)) pass = false;
    }
  }
  if (primal_checked < 6 || dual_checked < 6) pass = false;
  report(6, "linear shadow divergence on inconsistent scenarios", pass,
         std::to_string(primal_checked) + " primal and " + std::to_string(dual_checked) +
             " dual cases, worst growth ratio " + num(worst_margin));
}

// --------------------------------------------------------------------------
// 7. Drift-compensated distance monotonicity everywhere
// --------------------------------------------------------------------------

void criterion_fejer(const std::map<std::string, Loaded>& all) {
  bool pass = true;
  double worst_increase = 0.0;
  std::string bad;
  for (const auto& [name, ld] : all) {
    const Vector& anchor = *ld.sc.run_cfg.anchor;
    Vector p_target = ld.spec.op_a.resolvent(anchor);
    Vector d_target = anchor - p_target;
    FejerReport rep = fejer_monitor(ld.trace, *ld.sc.oracle->v_d, *ld.sc.oracle->v_r,
                                    p_target, d_target);
    worst_increase = std::max(worst_increase, rep.max_increase);
    if (!rep.monotone) {
      pass = false;
      if (bad.empty()) bad = name;
    }
  }
  std::string detail = std::to_string(all.size()) + " scenarios, max distance increase " +
                       num(worst_increase);
  if (!bad.empty()) detail += ", first violator: " + bad;
  report(7, "compensated shadow distances are nonincreasing", pass, detail);
}

// --------------------------------------------------------------------------
// 8. Normal problem: operator identity plus solve-and-compare
// --------------------------------------------------------------------------

void criterion_normal(const std::map<std::string, Loaded>& all) {
  bool pass = true;
  double worst_identity = 0.0, worst_solve = 0.0;
  std::size_t solved = 0;
  std::string bad;
  for (const auto& [name, ld] : all) {
    IdentityCheckReport rep = check_identities(ld.spec, 100, 2026, *ld.sc.oracle->v);
    worst_identity = std::max(worst_identity, rep.max_normal);
    if (rep.max_normal > kIdentityTol) {
      pass = false;
      if (bad.empty()) bad = name;
    }

    if (norm(*ld.sc.oracle->v_r) <= 1e-12) {
      NormalProblem np = build_normal_problem(ld.spec, *ld.sc.oracle->v);
      NormalSolution sol = solve_normal(np, ld.sc.run_cfg);
      ++solved;
      if (!ld.trace.limit_primal) {
        pass = false;
        continue;
      }
      double gap = dist(sol.z_bar, *ld.trace.limit_primal);
      worst_solve = std::max(worst_solve, gap);
      if (gap > 1e-3) pass = false;
    }
  }
  if (solved < 5) pass = false;
  std::string detail = "identity violation " + num(worst_identity) + " over " +
                       std::to_string(all.size()) + " scenarios; " + std::to_string(solved) +
                       " solves, worst shadow gap " + num(worst_solve);
  if (!bad.empty()) detail += ", first violator: " + bad;
  report(8, "normal problem identity and solve agreement", pass, detail);
}

// --------------------------------------------------------------------------
// 9. Deterministic reruns
// --------------------------------------------------------------------------

void criterion_determinism(const std::map<std::string, Loaded>& all) {
  bool pass = true;
  for (const std::string& name : {std::string("halfspace_l1"), std::string("cone_example")}) {
    const ScenarioFile& sc = all.at(name).sc;
    ScenarioOutcome a = run_scenario(sc);
    ScenarioOutcome b = run_scenario(sc);
    if (!a.trace || !b.trace) {
      pass = false;
      continue;
    }
    std::ostringstream csv_a, csv_b;
    emit_trace_csv(*a.trace, sc.dim, csv_a);
    emit_trace_csv(*b.trace, sc.dim, csv_b);
    if (csv_a.str() != csv_b.str()) pass = false;
    if (a.summary.dump(2) != b.summary.dump(2)) pass = false;
    if (a.exit_code != 0 || b.exit_code != 0) pass = false;
  }
  report(9, "reruns produce byte-identical traces and summaries", pass,
         "2 scenarios, full harness run twice each");
}

}  // namespace

int main() {
  std::map<std::string, Loaded> all;
  try {
    all = run_corpus(DRSPLIT_SCENARIO_DIR);
    if (all.size() != 11)
      throw ValidationError("expected 11 scenarios, found " + std::to_string(all.size()));
  } catch (const std::exception& e) {
    std::printf("FAIL: criterion 0, scenario corpus load (%s)\n", e.what());
    return 9;
  }

  auto guard = [](int idx, const char* label, void (*fn)(const std::map<std::string, Loaded>&),
                  const std::map<std::string, Loaded>& data) {
    try {
      fn(data);
    } catch (const std::exception& e) {
      report(idx, label, false, std::string("exception: ") + e.what());
    }
  };

  try {
    criterion_identities();
  } catch (const std::exception& e) {
    report(1, "resolvent identity suite, dimensions 1-4", false,
           std::string("exception: ") + e.what());
  }
  guard(2, "cone family displacement closed form", criterion_cones, all);
  guard(3, "affine family displacement and drift rays", criterion_affine, all);
  guard(4, "half-space/l1 multistart limits and value certificates", criterion_multistart, all);
  guard(5, "primal/dual regularity matches the oracle dichotomy", criterion_regularity, all);
  guard(6, "linear shadow divergence on inconsistent scenarios", criterion_divergence, all);
  guard(7, "compensated shadow distances are nonincreasing", criterion_fejer, all);
  guard(8, "normal problem identity and solve agreement", criterion_normal, all);
  guard(9, "reruns produce byte-identical traces and summaries", criterion_determinism, all);

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
