#include <catch2/catch_amalgamated.hpp>

#include <drsplit/drsplit.hpp>

#include <cmath>
#include <limits>

using namespace drsplit;

TEST_CASE("half-line membership and distance", "[oracles]") {
  HalflineSet h{-1.0, 3.0};
  CHECK(h.contains(make_vector({-1.0, 3.0})));
  CHECK(h.contains(make_vector({50.0, 3.0})));
  CHECK_FALSE(h.contains(make_vector({-1.5, 3.0})));
  CHECK_FALSE(h.contains(make_vector({0.0, 2.0})));
  CHECK(h.distance(make_vector({4.0, 3.0})) == 0.0);
  CHECK(h.distance(make_vector({-4.0, 7.0})) == 5.0);
  CHECK_THROWS_AS(h.contains(zeros(3)), DimensionMismatchError);
}

TEST_CASE("translated-cone family closed form", "[oracles]") {
  ConeExampleTruth t = cone_example_truth({-2.0, 3.0, -1.0, 0.0});
  CHECK(t.v_d.coords() == std::vector<double>{0.0, 3.0});
  CHECK(t.v_r.coords() == std::vector<double>{-1.0, 0.0});
  CHECK(t.v.coords() == std::vector<double>{-1.0, 3.0});
  CHECK(t.z.left == -1.0);
  CHECK(t.z.level == 3.0);
  CHECK(t.z_tilde.left == 0.0);
  CHECK(t.strict_inclusion);

  ConeExampleTruth boundary = cone_example_truth({0.0, 0.0, -1.0, 0.0});
  CHECK_FALSE(boundary.strict_inclusion);
  CHECK(boundary.z.left == boundary.z_tilde.left);

  ConeExampleTruth feasible_alpha = cone_example_truth({5.0, 0.0, -1.0, 7.0});
  CHECK(feasible_alpha.z.left == 5.0);
  CHECK(feasible_alpha.z_tilde.left == 5.0);
  CHECK_FALSE(feasible_alpha.strict_inclusion);

  CHECK_THROWS_AS(cone_example_truth({1.0, 1.0, 0.5, 0.0}), InvalidParamError);
  CHECK_THROWS_AS(cone_example_truth({kInf, 0.0, -1.0, 0.0}), NonFiniteError);
}

TEST_CASE("the restricted solution set sits inside the full one", "[oracles]") {
  for (ConeExampleParams p :
       {ConeExampleParams{-2.0, 3.0, -1.0, 0.0}, ConeExampleParams{-0.5, 1.0, -2.0, 4.0},
        ConeExampleParams{4.0, -1.0, -0.25, 2.0}}) {
    ConeExampleTruth t = cone_example_truth(p);
    for (double step : {0.0, 0.5, 2.0, 10.0}) {
      Vector x = make_vector({t.z_tilde.left + step, p.beta});
      CHECK(t.z.contains(x));
      CHECK(cone_ztilde_member(p, x));
    }
    if (t.strict_inclusion) {
      Vector witness = make_vector({t.z.left, p.beta});
      CHECK(t.z.contains(witness));
      CHECK_FALSE(cone_ztilde_member(p, witness));
      CHECK_FALSE(t.z_tilde.contains(witness));
    } else {
      CHECK(t.z.left == t.z_tilde.left);
    }
  }
}

TEST_CASE("parallel affine family closed form", "[oracles]") {
  std::vector<Vector> u = {make_vector({1.0, 0.0})};
  AffineExampleTruth t = affine_example_truth(u, make_vector({0.0, 3.0}), make_vector({2.0, 0.0}));
  CHECK(t.v.coords() == std::vector<double>{2.0, 3.0});
  CHECK(dist(project_affine(t.z, make_vector({9.0, 9.0})), make_vector({9.0, 3.0})) <= 1e-15);

  CHECK_THROWS_AS(affine_example_truth(u, make_vector({1.0, 3.0}), make_vector({2.0, 0.0})),
                  NotOrthonormalError);
  CHECK_THROWS_AS(affine_example_truth(u, make_vector({0.0, 3.0}), make_vector({2.0, 1.0})),
                  NotInSubspaceError);
}

TEST_CASE("half-space versus l1-box closed form", "[oracles]") {
  HalfspaceL1Truth t =
      halfspace_l1_truth(HalfspaceSet(make_vector({1.0, 0.0}), -2.0), {1.0, 1.0});
  CHECK(t.v_d.coords() == std::vector<double>{-1.0, 0.0});
  CHECK(norm(t.v_r) == 0.0);
  CHECK(t.eta_diff == -1.0);
  CHECK_FALSE(t.feasible);

  HalfspaceL1Truth feasible =
      halfspace_l1_truth(HalfspaceSet(make_vector({1.0, 0.0}), 0.0), {1.0, 1.0});
  CHECK(norm(feasible.v) == 0.0);
  CHECK(feasible.feasible);

  HalfspaceL1Truth tilted =
      halfspace_l1_truth(HalfspaceSet(make_vector({3.0, 4.0}), -30.0), {1.0, 1.0});
  CHECK(std::abs(tilted.eta_diff - (-23.0)) <= 1e-12);
  CHECK(dist(tilted.v, make_vector({-23.0 * 3.0 / 25.0, -23.0 * 4.0 / 25.0})) <= 1e-12);

  CHECK_THROWS_AS(halfspace_l1_truth(HalfspaceSet(make_vector({1.0}), 0.0), {-1.0}),
                  NegativeBoundError);
  CHECK_THROWS_AS(halfspace_l1_truth(HalfspaceSet(make_vector({1.0}), 0.0), {kInf}),
                  InvalidParamError);
  CHECK_THROWS_AS(halfspace_l1_truth(HalfspaceSet(make_vector({1.0}), 0.0), {1.0, 1.0}),
                  DimensionMismatchError);
}

TEST_CASE("closed form agrees with a long run of the iteration", "[oracles]") {
  HalfspaceSet hs(make_vector({2.0, -1.0}), -4.0);
  std::vector<double> c = {0.5, 1.5};
  HalfspaceL1Truth t = halfspace_l1_truth(hs, c);

  ProblemSpec spec{2, normal_cone_operator(hs), l1_box_subdifferential(c), zeros(2),
                   "cross_check"};
  RunConfig cfg;
  cfg.max_iters = 20000;
  cfg.stop_tol = 0.0;
  cfg.record_every = 20;
  RunTrace trace = run(spec, cfg);
  CHECK(dist(trace.final_estimate.v, t.v) <= 1e-6);
  CHECK(dist(trace.final_estimate.v_d, t.v_d) <= 1e-6);
  CHECK(norm(trace.final_estimate.v_r) <= 1e-6);
}

TEST_CASE("grid minimizer on a smooth objective", "[oracles]") {
  ValueMap f = [](const Vector& y) {
    return (y[0] - 1.0) * (y[0] - 1.0) + (y[1] + 2.0) * (y[1] + 2.0);
  };
  ValueMap g = [](const Vector&) { return 0.0; };
  GridSpec grid{{-4.0, -4.0}, {4.0, 4.0}, 201};
  GridMinimum m = grid_minimize(f, g, zeros(2), grid);
  CHECK(std::abs(m.cell_width - 0.04) <= 1e-12);
  CHECK(dist(m.argmin, make_vector({1.0, -2.0})) <= m.cell_width);
  CHECK(m.min_value <= 2.0 * m.cell_width * m.cell_width);
}

TEST_CASE("grid minimizer certifies the half-space versus l1 value", "[oracles]") {
  OperatorHandle half = normal_cone_operator(HalfspaceSet(make_vector({1.0, 0.0}), -2.0));
  OperatorHandle l1 = l1_box_subdifferential({1.0, 1.0});
  Vector v = make_vector({-1.0, 0.0});
  GridSpec grid{{-4.0, -4.0}, {4.0, 4.0}, 401};
  GridMinimum m = grid_minimize(half.evaluable, l1.evaluable, v, grid);
  CHECK(dist(m.argmin, make_vector({-2.0, 0.0})) <= m.cell_width + 1e-9);
  CHECK(std::abs(m.min_value - 1.0) <= 2.0 * m.cell_width);

  // Refining the grid can only lower the certified value.
  GridSpec fine{{-4.0, -4.0}, {4.0, 4.0}, 801};
  GridMinimum mf = grid_minimize(half.evaluable, l1.evaluable, v, fine);
  CHECK(mf.min_value <= m.min_value + 1e-12);
}

TEST_CASE("grid minimizer input validation", "[oracles]") {
  ValueMap zero = [](const Vector&) { return 0.0; };
  ValueMap inf = [](const Vector&) { return kInf; };
  GridSpec grid{{0.0}, {1.0}, 11};
  CHECK_THROWS_AS(grid_minimize(nullptr, zero, zeros(1), grid), MissingFunctionError);
  CHECK_THROWS_AS(grid_minimize(inf, inf, zeros(1), grid), AllInfiniteError);
  CHECK_THROWS_AS(grid_minimize(zero, zero, zeros(2), grid), DimensionMismatchError);
  CHECK_THROWS_AS(grid_minimize(zero, zero, zeros(1), GridSpec{{0.0}, {1.0}, 2}),
                  InvalidParamError);
  CHECK_THROWS_AS(grid_minimize(zero, zero, zeros(1), GridSpec{{2.0}, {1.0}, 11}),
                  InvalidParamError);
  CHECK_THROWS_AS(grid_minimize(zero, zero, zeros(1), GridSpec{{0.0}, {kInf}, 11}),
                  NonFiniteError);
  CHECK_THROWS_AS(grid_minimize(zero, zero, zeros(3), GridSpec{{0, 0, 0}, {1, 1, 1}, 1000}),
                  InvalidParamError);  // 10^9 nodes
}

TEST_CASE("lexicographic tie-breaking on a flat objective", "[oracles]") {
  ValueMap zero = [](const Vector&) { return 0.0; };
  GridSpec grid{{-1.0, -1.0}, {1.0, 1.0}, 5};
  GridMinimum m = grid_minimize(zero, zero, zeros(2), grid);
  CHECK(m.argmin.coords() == std::vector<double>{-1.0, -1.0});
}

TEST_CASE("recession-cone projections match the family truths", "[oracles]") {
  // Half-space domain, as in the l1 pairing.
  {
    CatalogSet dom = HalfspaceSet(make_vector({1.0, 0.0}), -2.0);
    Vector v = make_vector({-1.0, 0.0});
    RecessionProjectionTruth r = recession_projection_truth(dom, v);
    CHECK(dist(r.v_d_from_dom, make_vector({-1.0, 0.0})) <= 1e-15);
    CHECK(dist(r.v_d_from_ran, r.v_d_from_dom) <= 1e-15);
    CHECK(norm(r.v_r_from_dom) <= 1e-15);
    CHECK(norm(r.v_r_from_ran) <= 1e-15);
  }
  // Translated-cone domain.
  {
    CatalogSet dom = TranslatedConeSet(make_vector({-2.0, 3.0}), 0);
    Vector v = make_vector({-1.0, 3.0});
    RecessionProjectionTruth r = recession_projection_truth(dom, v);
    CHECK(dist(r.v_d_from_dom, make_vector({0.0, 3.0})) <= 1e-15);
    CHECK(dist(r.v_r_from_dom, make_vector({-1.0, 0.0})) <= 1e-15);
    CHECK(dist(r.v_d_from_ran, r.v_d_from_dom) <= 1e-15);
    CHECK(dist(r.v_r_from_ran, r.v_r_from_dom) <= 1e-15);
  }
  // Affine domain.
  {
    CatalogSet dom = AffineSubspaceSet(make_vector({0.0, 3.0}), {make_vector({1.0, 0.0})});
    Vector v = make_vector({2.0, 3.0});
    RecessionProjectionTruth r = recession_projection_truth(dom, v);
    CHECK(dist(r.v_d_from_dom, make_vector({0.0, 3.0})) <= 1e-15);
    CHECK(dist(r.v_r_from_dom, make_vector({2.0, 0.0})) <= 1e-15);
    CHECK(dist(r.v_d_from_ran, r.v_d_from_dom) <= 1e-15);
    CHECK(dist(r.v_r_from_ran, r.v_r_from_dom) <= 1e-15);
  }
}

TEST_CASE("recession-cone projections always split v orthogonally", "[oracles]") {
  std::vector<CatalogSet> sets = {
      HalfspaceSet(make_vector({3.0, -4.0}), 1.0),
      BoxSet({-1.0, -kInf}, {1.0, 2.0}),
      BoxSet({0.0, -kInf}, {kInf, kInf}),
      TranslatedConeSet(make_vector({1.0, -1.0}), 1),
      AffineSubspaceSet(make_vector({0.5, 0.5}), {make_vector({0.6, 0.8})}),
  };
  std::vector<Vector> vs = {make_vector({1.0, 2.0}), make_vector({-3.0, 0.5}),
                            make_vector({0.0, -2.0})};
  for (const CatalogSet& dom : sets) {
    for (const Vector& v : vs) {
      RecessionProjectionTruth r = recession_projection_truth(dom, v);
      CHECK(dist(r.v_d_from_dom + r.v_r_from_dom, v) <= 1e-12);
      CHECK(std::abs(dot(r.v_d_from_dom, r.v_r_from_dom)) <= 1e-12);
      CHECK(dist(r.v_d_from_ran, r.v_d_from_dom) <= 1e-12);
      CHECK(dist(r.v_r_from_ran, r.v_r_from_dom) <= 1e-12);
    }
  }
}
