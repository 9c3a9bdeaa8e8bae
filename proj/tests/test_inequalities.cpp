#include <doctest.h>

#include <cmath>
#include <numbers>

#include "sgt/inequalities.hpp"

using namespace sgt;

namespace {

Scene sphere_scene(double radius, int level, const WeightSpec& ws) {
  return make_scene(whole_surface(make_sphere(radius, level)), ws);
}

Scene disk_scene(int level, const WeightSpec& ws) {
  return make_scene(make_disk(1.0, level), ws);
}

WeightSpec zero_spec() { return WeightSpec{}; }

WeightSpec radial_spec(double a) {
  WeightSpec ws;
  ws.kind = WeightKind::Radial;
  ws.a = a;
  return ws;
}

double detail(const InequalityReport& rep, const std::string& key) {
  for (const auto& [k, v] : rep.details)
    if (k == key) return v;
  FAIL("missing detail ", key);
  return 0;
}

}  // namespace

TEST_SUITE("inequalities") {

TEST_CASE("pointwise curvature data") {
  Scene s = sphere_scene(1.0, 3, zero_spec());
  PointwiseRicci pr = pointwise_ricci(s, 1, -2.0);
  REQUIRE(pr.ric.size() == static_cast<size_t>(s.mesh().nV()));
  for (int v = 0; v < s.mesh().nV(); v += 5) {
    // Unweighted, degree 1: by Cayley-Hamilton the curvature term is
    // exactly det(shape) times the identity, so its trace is twice the
    // fitted Gauss curvature.
    double kfit = s.curv.k1[v] * s.curv.k2[v];
    CHECK(pr.ric[static_cast<size_t>(v)].trace() ==
          doctest::Approx(2.0 * kfit).epsilon(1e-10));
    CHECK((pr.ric[static_cast<size_t>(v)] -
           kfit * Eigen::Matrix2d::Identity())
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    // The two Gauss curvature estimates agree to discretization error.
    CHECK(2.0 * kfit == doctest::Approx(s.curv.scal[v]).epsilon(0.2));
    // At f = 0 the dimensional correction changes nothing.
    CHECK((pr.ricN[static_cast<size_t>(v)] - pr.ric[static_cast<size_t>(v)])
              .cwiseAbs()
              .maxCoeff() < 1e-14);
    // Squared shape extension close to the identity on the unit sphere.
    CHECK((pr.sffSq[static_cast<size_t>(v)] - Eigen::Matrix2d::Identity())
              .norm() < 0.12);
  }
}

TEST_CASE("scene wiring") {
  Scene s = sphere_scene(1.0, 1, radial_spec(1.0));
  CHECK(s.closed());
  CHECK_FALSE(s.hasComparison);
  CHECK(s.weight.kind == WeightKind::Radial);
  CHECK(s.ops.dim(0) == s.mesh().nV());

  WeightSpec ws;
  ws.kind = WeightKind::Distance;
  ws.basePoint = 0;
  ws.a = 1.0;
  Scene d = disk_scene(3, ws);
  CHECK_FALSE(d.closed());
  CHECK(d.hasComparison);
  CHECK(d.comparison.basePoint == 0);

  // A positive comparison bound on a closed surface puts the antipode
  // past the cot singularity. The scene records the affected vertices and
  // the comparison estimate refuses to evaluate there.
  WeightSpec bad;
  bad.kind = WeightKind::Distance;
  bad.basePoint = 0;
  bad.a = 1.0;
  bad.bounds.l = 1.0;
  Scene sick = sphere_scene(1.0, 2, bad);
  CHECK(sick.comparison.numSingular > 0);
  ModeSet ms = compute_modes(sick, 0, 3);
  CHECK_THROWS_AS(distance_weight_bounds(sick, ms, 1, 2.0), InequalityError);
}

TEST_CASE("mode sets carry quadrature-consistent components") {
  Scene s = sphere_scene(1.0, 2, radial_spec(0.5));
  for (int p = 0; p < 3; ++p) {
    ModeSet ms = compute_modes(s, p, 6);
    CHECK(ms.p == p);
    REQUIRE(ms.count() == 6);
    REQUIRE(ms.comp.size() == 6);
    long cols = p == 1 ? 2 : 1;
    for (const auto& m : ms.comp) {
      CHECK(m.rows() == s.mesh().nV());
      CHECK(m.cols() == cols);
    }
    CHECK(ms.quadNorm.minCoeff() > 0);
    for (int i = 0; i < ms.count(); ++i) {
      if (p == 0) {
        // Vertex quadrature of functions is the exact W-norm.
        CHECK(ms.quadNorm[i] == doctest::Approx(1.0).epsilon(1e-12));
      } else {
        CHECK(ms.quadNorm[i] == doctest::Approx(1.0).epsilon(0.25));
      }
    }
  }
}

TEST_CASE("vertex components recover simple fields") {
  Scene s = disk_scene(3, zero_spec());
  const SurfaceMesh& m = s.mesh();

  // Degree 0: components are the vertex samples themselves.
  Eigen::VectorXd h(m.nV());
  for (int v = 0; v < m.nV(); ++v)
    h[v] = m.vertices[static_cast<size_t>(v)].x();
  Eigen::MatrixXd c0 = vertex_components(s, 0, h);
  CHECK((c0.col(0) - h).cwiseAbs().maxCoeff() == 0.0);

  // Degree 1: d of a linear height has constant unit gradient; Whitney
  // averaging reproduces it away from the rim.
  Eigen::VectorXd dh(m.nE());
  for (int e = 0; e < m.nE(); ++e) {
    const auto& ev = m.edges[static_cast<size_t>(e)];
    dh[e] = h[ev[1]] - h[ev[0]];
  }
  Eigen::MatrixXd c1 = vertex_components(s, 1, dh);
  for (int v : s.dom.interiorVertices) {
    Eigen::Vector2d got = c1.row(v).transpose();
    Eigen::Vector2d expect =
        s.curv.frame[static_cast<size_t>(v)].transpose() *
        Eigen::Vector3d::UnitX();
    CHECK((got - expect).norm() < 0.02);
  }

  // Degree 2: integrals of the constant density 1 are the face areas.
  Eigen::MatrixXd c2 = vertex_components(s, 2, s.dv.faceArea);
  for (int v : s.dom.interiorVertices)
    CHECK(c2(v, 0) == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gap and upper bounds are sharp on the round sphere") {
  // Both estimates collapse to equalities for unweighted one-forms on the
  // unit sphere, so the slack is pure discretization error.
  Scene s = sphere_scene(1.0, 3, zero_spec());
  InequalityReport gap = first_eigenvalue_gap(s, 1);
  CHECK(gap.id == "gap_lower_bound");
  CHECK(gap.evaluated);
  CHECK(gap.pass);
  CHECK(gap.direction == Direction::LeftGeqRight);
  CHECK(std::abs(gap.left) < 0.05);   // lambda_{1,1} - lambda_{1,0}
  CHECK(std::abs(gap.right) < 0.05);  // curvature infimum near zero
  CHECK(detail(gap, "lambda_p") == doctest::Approx(2.0).epsilon(0.03));
  CHECK(detail(gap, "lambda_pm1") == doctest::Approx(2.0).epsilon(0.03));

  InequalityReport up = exact_eigenvalue_upper(s, 1);
  CHECK(up.id == "exact_form_upper_bound");
  CHECK(up.pass);
  CHECK(up.direction == Direction::LeftLeqRight);
  CHECK(up.left == doctest::Approx(2.0).epsilon(0.03));
  CHECK(up.right == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("gap bound argument checks") {
  Scene s = sphere_scene(1.0, 1, zero_spec());
  CHECK_THROWS_AS(first_eigenvalue_gap(s, 0), InequalityError);
  CHECK_THROWS_AS(first_eigenvalue_gap(s, 3), InequalityError);
  CHECK_THROWS_AS(exact_eigenvalue_upper(s, 0), InequalityError);
}

TEST_CASE("dimensional lower bound on the sphere") {
  Scene s = sphere_scene(1.0, 2, zero_spec());
  // Inadmissible dimension parameters sit inside [0, n - p + 1].
  CHECK_THROWS_AS(gallot_meyer_f(s, 1, 1.0, 0.5), InequalityError);
  CHECK_THROWS_AS(gallot_meyer_f(s, 1, 0.0, 0.5), InequalityError);
  CHECK_THROWS_AS(gallot_meyer_f(s, 1, 2.0, 0.5), InequalityError);

  InequalityReport rep = gallot_meyer_f(s, 1, -2.0, 0.9);
  CHECK(rep.id == "gallot_meyer");
  CHECK(rep.evaluated);
  CHECK(rep.pass);
  CHECK(detail(rep, "hypothesis_min") >= 0.9);
  // p(2-p) gamma N/(N-1) with p=1, N=-2: two thirds of gamma.
  CHECK(rep.right == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(rep.left == doctest::Approx(2.0).epsilon(0.03));

  // On the torus the curvature hypothesis fails and the estimate must
  // step aside rather than assert anything.
  Scene t = make_scene(whole_surface(make_torus(2.0, 0.5, 12, 12)),
                       zero_spec());
  InequalityReport vac = gallot_meyer_f(t, 1, -2.0, 0.5);
  CHECK_FALSE(vac.evaluated);
  CHECK(vac.pass);
  CHECK_FALSE(vac.note.empty());
}

TEST_CASE("vanishing criterion") {
  // Positive curvature term on the sphere: harmonic 1-forms must vanish.
  Scene s = sphere_scene(1.0, 2, zero_spec());
  InequalityReport rep = vanishing_check(s, 1);
  CHECK(rep.id == "vanishing_criterion");
  CHECK(rep.evaluated);
  CHECK(rep.pass);
  CHECK(detail(rep, "criterion_min") > 0);
  CHECK(detail(rep, "betti") == 0);

  // Flat directions on the torus: criterion fails, betti 2 is reported,
  // nothing is asserted.
  Scene t = make_scene(whole_surface(make_torus(2.0, 0.5, 12, 12)),
                       zero_spec());
  InequalityReport vac = vanishing_check(t, 1);
  CHECK_FALSE(vac.evaluated);
  CHECK(vac.pass);
  CHECK(detail(vac, "betti") == 2);

  Scene d = disk_scene(2, zero_spec());
  CHECK_THROWS_AS(vanishing_check(d, 1), InequalityError);
}

TEST_CASE("recursion argument validation") {
  Scene s = disk_scene(3, zero_spec());
  ModeSet ms = compute_modes(s, 0, 5);
  CHECK_THROWS_AS(yang_recursion(s, ms, 0, 2.0), InequalityError);
  CHECK_THROWS_AS(yang_recursion(s, ms, 5, 2.0), InequalityError);
  // Exponents below 1 are legitimate (the recursion covers all alpha <= 2).
  CHECK(yang_recursion(s, ms, 2, 0.5).evaluated);
  CHECK_THROWS_AS(extremal_recursion(s, ms, 0, 2.0), InequalityError);
  CHECK_THROWS_AS(radial_recursion(s, ms, 1, 2.0), InequalityError);  // not radial
}

TEST_CASE("recursion estimates on the flat disk") {
  Scene s = disk_scene(4, zero_spec());
  ModeSet ms = compute_modes(s, 0, 8);
  // lambda2/lambda1 for the drum is about 2.539, comfortably inside the
  // factor-3 cap that k = 1, alpha = 2 enforces.
  for (double alpha : {1.5, 2.0, 3.0}) {
    for (int k = 1; k <= 5; ++k) {
      InequalityReport yang = yang_recursion(s, ms, k, alpha);
      CHECK(yang.id == "eigenvalue_recursion");
      CHECK(yang.pass);
      InequalityReport ext = extremal_recursion(s, ms, k, alpha);
      CHECK(ext.id == "recursion_extremal_constants");
      CHECK(ext.pass);
      // Freezing the bracket at its extreme constants can only weaken the
      // right-hand side.
      CHECK(ext.right >= yang.right - 1e-12);
      CHECK(yang.left == doctest::Approx(ext.left).epsilon(1e-12));
    }
  }
}

TEST_CASE("radial recursion matches a hand-built bracket on the disk") {
  // Flat disk, a = 1/2, functions: the shape terms die, the weighted mean
  // curvature dies, and the bracket reduces to
  //   b_i = lambda_i + 1/2 - (1/16) * integral of |X|^2 |omega|^2.
  double a = 0.5;
  Scene s = disk_scene(4, radial_spec(a));
  ModeSet ms = compute_modes(s, 0, 4);
  int k = 2;
  double alpha = 2.0;
  InequalityReport rep = radial_recursion(s, ms, k, alpha);
  CHECK(rep.id == "radial_weight_recursion");
  CHECK(rep.pass);
  CHECK(detail(rep, "a") == a);

  const Eigen::VectorXd& mass = s.ops.starF[0];
  double lamNext = ms.spec.eigenvalues[k];
  double right = 0;
  for (int i = 0; i < k; ++i) {
    double xint = 0, norm = 0;
    for (int v = 0; v < s.mesh().nV(); ++v) {
      double w2 = ms.comp[static_cast<size_t>(i)](v, 0) *
                  ms.comp[static_cast<size_t>(i)](v, 0);
      xint += mass[v] * w2 *
              s.mesh().vertices[static_cast<size_t>(v)].squaredNorm();
      norm += mass[v] * w2;
    }
    double bi = ms.spec.eigenvalues[i] + 0.5 - (a * a / 4.0) * xint / norm;
    double diff = lamNext - ms.spec.eigenvalues[i];
    right += 2.0 * diff * bi;  // alpha = 2 factor c/2 = 2
  }
  CHECK(rep.right == doctest::Approx(right).epsilon(1e-10));
  CHECK(rep.left == doctest::Approx(std::pow(lamNext - ms.spec.eigenvalues[0],
                                             2.0) +
                                    std::pow(lamNext - ms.spec.eigenvalues[1],
                                             2.0))
                        .epsilon(1e-12));
}

TEST_CASE("distance recursion branches") {
  WeightSpec ricci;
  ricci.kind = WeightKind::Distance;
  ricci.basePoint = 0;
  ricci.a = 0.5;
  ricci.bounds.sectional = false;
  ricci.bounds.l = 0.0;
  Scene sR = disk_scene(4, ricci);

  WeightSpec sec = ricci;
  sec.bounds.sectional = true;
  sec.bounds.l1 = 0.0;
  sec.bounds.l2 = 0.0;  // flat sectional pinching, lower branch
  Scene sS = disk_scene(4, sec);

  for (int p : {0, 1}) {
    ModeSet msR = compute_modes(sR, p, 5);
    ModeSet msS = compute_modes(sS, p, 5);
    InequalityReport repR = distance_weight_bounds(sR, msR, 2, 2.0);
    InequalityReport repS = distance_weight_bounds(sS, msS, 2, 2.0);
    CHECK(repR.id == "distance_weight_recursion");
    CHECK(repR.pass);
    CHECK(repS.pass);
    if (p == 1) {
      // With sectional control the shape term is handled exactly and the
      // residual constant shrinks: delta2 drops from 4a to 0 here.
      CHECK(detail(repR, "delta2") == doctest::Approx(4 * 0.5).epsilon(1e-9));
      CHECK(detail(repS, "delta2") <= detail(repR, "delta2") + 1e-12);
    }
  }

  // Distance data is mandatory.
  Scene plain = disk_scene(3, zero_spec());
  ModeSet ms = compute_modes(plain, 0, 4);
  CHECK_THROWS_AS(distance_weight_bounds(plain, ms, 1, 2.0), InequalityError);
}

TEST_CASE("iterated bound needs the ambient surface and k at least 1") {
  WeightSpec ws = zero_spec();
  SurfaceMesh sphere = make_sphere(1.0, 2);
  Scene closed = make_scene(whole_surface(sphere), ws);
  std::vector<char> keep(static_cast<size_t>(sphere.nV()));
  for (int v = 0; v < sphere.nV(); ++v)
    keep[static_cast<size_t>(v)] =
        sphere.vertices[static_cast<size_t>(v)].z() > 0.2;
  Scene cap = make_scene(extract_domain(sphere, keep), ws);
  ModeSet ms = compute_modes(cap, 1, 5);
  InequalityReport rep = kth_eigenvalue_bound(closed, cap, ms, 2);
  CHECK(rep.id == "kth_eigenvalue_bound");
  CHECK(rep.pass);
  CHECK(rep.left == doctest::Approx(ms.spec.eigenvalues[2]));
  CHECK(detail(rep, "closed_average") > 0);
  CHECK_THROWS_AS(kth_eigenvalue_bound(closed, cap, ms, -1), InequalityError);
  // The domain scene alone is not enough.
  CHECK_THROWS_AS(kth_eigenvalue_bound(cap, cap, ms, 2), InequalityError);
}

TEST_CASE("stability analysis on the self-shrinking sphere") {
  double r = std::sqrt(2.0);
  Scene s = sphere_scene(r, 3, radial_spec(1.0));
  auto [res, reps] = jacobi_stability(s, 1, 3);
  CHECK(res.a == 1.0);
  CHECK(res.hFsup < 0.05);
  CHECK(res.fMinimal);
  CHECK(res.index == 4);
  REQUIRE(res.dTable.size() == 3);
  CHECK(res.dTable[0] == 1);
  CHECK(res.dTable[1] == 4);
  CHECK(res.dTable[2] == 7);
  // Lowest Jacobi eigenvalues of the shrinking sphere: -2, then -1 three
  // times, then +1.
  CHECK(res.spectrum[0] == doctest::Approx(-2.0).epsilon(0.04));
  for (int i = 1; i <= 3; ++i)
    CHECK(res.spectrum[i] == doctest::Approx(-1.0).epsilon(0.04));
  CHECK(res.spectrum[4] == doctest::Approx(1.0).epsilon(0.06));
  for (const auto& rep : reps) CHECK(rep.pass);
  bool sawBetti = false;
  for (const auto& rep : reps)
    if (rep.id == "stability_index_betti") {
      sawBetti = true;
      CHECK(rep.left == 4.0);
      CHECK(rep.right == doctest::Approx(3.0).epsilon(1e-12));
    }
  CHECK(sawBetti);
}

TEST_CASE("stability argument validation") {
  Scene zero = sphere_scene(1.0, 1, zero_spec());
  CHECK_THROWS_AS(jacobi_stability(zero, 1, 3), InequalityError);
  Scene rad = sphere_scene(1.0, 1, radial_spec(1.0));
  CHECK_THROWS_AS(jacobi_stability(rad, 0, 3), InequalityError);
  CHECK_THROWS_AS(jacobi_stability(rad, 1, 0), InequalityError);
  Scene disk = disk_scene(2, radial_spec(1.0));
  CHECK_THROWS_AS(jacobi_stability(disk, 1, 3), InequalityError);
}

TEST_CASE("reports apply the slack convention") {
  Scene s = sphere_scene(1.0, 2, zero_spec());
  InequalityReport gap = first_eigenvalue_gap(s, 1);
  CHECK(gap.slack == doctest::Approx(gap.left - gap.right).epsilon(1e-14));
  InequalityReport up = exact_eigenvalue_upper(s, 1);
  CHECK(up.slack == doctest::Approx(up.right - up.left).epsilon(1e-14));
  CHECK(up.tolerance > 0);
  CHECK(up.pass == (up.slack >= -up.tolerance));
}

}  // TEST_SUITE
