// Release gate: every numbered criterion below prints exactly one
// [PASS]/[FAIL] line with its measured margins, and the process exit code
// is the number of failed criteria. Tolerances are pinned here, next to
// the check that uses them, and are not configurable.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sgt/extalg.hpp"
#include "sgt/inequalities.hpp"

using namespace sgt;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// Smooth seeded test weight: a random quadratic polynomial of the ambient
// coordinates sampled at the vertices.
Eigen::VectorXd random_smooth_samples(const SurfaceMesh& m, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double c[10];
  for (double& x : c) x = u(gen);
  Eigen::VectorXd f(m.nV());
  for (int v = 0; v < m.nV(); ++v) {
    const Eigen::Vector3d& x = m.vertices[static_cast<size_t>(v)];
    f[v] = c[0] + c[1] * x.x() + c[2] * x.y() + c[3] * x.z() +
           c[4] * x.x() * x.y() + c[5] * x.y() * x.z() +
           c[6] * x.z() * x.x() + c[7] * x.x() * x.x() +
           c[8] * x.y() * x.y() + c[9] * x.z() * x.z();
  }
  return f;
}

Eigen::VectorXd random_form(int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(dim);
  for (int i = 0; i < dim; ++i) x[i] = g(gen);
  return x;
}

int probe_max_z(const SurfaceMesh& m) {
  int best = 0;
  for (int v = 1; v < m.nV(); ++v)
    if (m.vertices[static_cast<size_t>(v)].z() >
        m.vertices[static_cast<size_t>(best)].z())
      best = v;
  return best;
}

int probe_nearest(const DomainMesh& dom, const Eigen::Vector3d& target) {
  int best = -1;
  double bestD = std::numeric_limits<double>::infinity();
  for (int v : dom.interiorVertices) {
    double d = (dom.mesh.vertices[static_cast<size_t>(v)] - target).norm();
    if (d < bestD) {
      bestD = d;
      best = v;
    }
  }
  return best;
}

DomainMesh cap_domain(double radius, int level, double z0) {
  SurfaceMesh m = make_sphere(radius, level);
  std::vector<char> keep(static_cast<size_t>(m.nV()));
  for (int v = 0; v < m.nV(); ++v)
    keep[static_cast<size_t>(v)] = m.vertices[static_cast<size_t>(v)].z() > z0;
  return extract_domain(m, keep);
}

DomainMesh window_domain(double R, double r, int nu, int nv) {
  SurfaceMesh m = make_torus(R, r, nu, nv);
  std::vector<char> keep(static_cast<size_t>(m.nV()));
  for (int v = 0; v < m.nV(); ++v) {
    const Eigen::Vector3d& x = m.vertices[static_cast<size_t>(v)];
    keep[static_cast<size_t>(v)] = x.y() > 1e-9 && x.head<2>().norm() > R + 1e-9;
  }
  return extract_domain(m, keep);
}

int scene_dim(const Scene& s, int p) {
  if (s.dom.wholeSurface()) return s.ops.dim(p);
  return static_cast<int>(p == 0   ? s.dom.interiorVertices.size()
                          : p == 1 ? s.dom.interiorEdges.size()
                                   : s.dom.interiorFaces.size());
}

struct Criterion {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    pass = false;
    if (!detail.empty()) detail += "; ";
    detail += why;
  }
  void note(const std::string& what) {
    if (!detail.empty()) detail += ", ";
    detail += what;
  }
};

// ---------------------------------------------------------------------
// 1. Structural exactness: d1 d0 = 0 exactly, weighted adjointness to
//    1e-12, strictly positive Hodge stars, under one second per fixture.
Criterion criterion1() {
  constexpr double kAdjointTol = 1e-12;
  constexpr double kFixtureBudget = 1.0;  // seconds
  Criterion c;

  struct Fixture {
    std::string name;
    DomainMesh dom;
    int distBase;
    CurvatureBounds distBounds;
  };
  std::vector<Fixture> fixtures;
  {
    CurvatureBounds sphereB;
    sphereB.l = 1.0;
    fixtures.push_back({"sphere", whole_surface(make_sphere(1.0, 3)), 0, sphereB});
    CurvatureBounds torusB;
    torusB.l = -1.0 / (0.5 * 1.5);
    fixtures.push_back({"torus", whole_surface(make_torus(2.0, 0.5, 16, 16)), 0, torusB});
    CurvatureBounds diskB;  // flat: zero Ricci bound
    fixtures.push_back({"disk", make_disk(1.0, 4), 0, diskB});
    double R = std::sqrt(2.0);
    DomainMesh cap = cap_domain(R, 3, 0.35 * R);
    int pole = probe_max_z(cap.mesh);
    CurvatureBounds capB;
    capB.sectional = true;
    capB.l1 = capB.l2 = 1.0 / (R * R);
    fixtures.push_back({"cap", std::move(cap), pole, capB});
    DomainMesh window = window_domain(2.0, 0.5, 32, 32);
    int base = probe_nearest(window, Eigen::Vector3d(0, 2.5, 0));
    CurvatureBounds winB;
    winB.l = -1.0 / (0.5 * 1.5);
    fixtures.push_back({"patch", std::move(window), base, winB});
  }

  double worstResidual = 0, worstTime = 0;
  for (const auto& fx : fixtures) {
    Clock::time_point t0 = Clock::now();
    for (int wk = 0; wk < 4; ++wk) {
      WeightSpec ws;
      switch (wk) {
        case 0: break;
        case 1:
          ws.kind = WeightKind::Radial;
          ws.a = 1.0;
          break;
        case 2:
          ws.kind = WeightKind::Custom;
          ws.samples = random_smooth_samples(fx.dom.mesh, 7);
          break;
        case 3:
          ws.kind = WeightKind::Distance;
          ws.basePoint = fx.distBase;
          ws.a = 0.5;
          ws.bounds = fx.distBounds;
          break;
      }
      DomainMesh dom = fx.dom;  // make_scene takes ownership
      Scene s = make_scene(std::move(dom), ws);

      SpMat dd = (s.ops.d1 * s.ops.d0).pruned(1.0, 0.0);
      if (dd.nonZeros() != 0)
        c.fail(fx.name + ": d1 d0 has " + std::to_string(dd.nonZeros()) +
               " nonzeros");

      for (int p = 0; p <= 1; ++p) {
        Eigen::VectorXd a = random_form(s.ops.dim(p), 100 + wk);
        Eigen::VectorXd b = random_form(s.ops.dim(p + 1), 200 + wk);
        Eigen::VectorXd da = differential(s.ops, p, a);
        Eigen::VectorXd db = codifferential(s.ops, p + 1, b);
        double lhs = da.dot(s.ops.starF[static_cast<size_t>(p + 1)].asDiagonal() * b);
        double rhs = a.dot(s.ops.starF[static_cast<size_t>(p)].asDiagonal() * db);
        double rel = std::abs(lhs - rhs) /
                     std::max({1.0, std::abs(lhs), std::abs(rhs)});
        worstResidual = std::max(worstResidual, rel);
        if (rel > kAdjointTol)
          c.fail(fx.name + ": adjointness residual " + fmt(rel) + " at p=" +
                 std::to_string(p));
      }

      for (int p = 0; p <= 2; ++p) {
        if (s.ops.star[static_cast<size_t>(p)].minCoeff() <= 0 ||
            s.ops.starF[static_cast<size_t>(p)].minCoeff() <= 0)
          c.fail(fx.name + ": nonpositive star at p=" + std::to_string(p));
      }
    }
    double dt = seconds_since(t0);
    worstTime = std::max(worstTime, dt);
    if (dt > kFixtureBudget)
      c.fail(fx.name + " took " + fmt(dt) + "s (budget " +
             fmt(kFixtureBudget) + "s)");
  }
  c.note("worst adjoint residual " + fmt(worstResidual));
  c.note("slowest fixture " + fmt(worstTime) + "s");
  return c;
}

// ---------------------------------------------------------------------
// 2. Gauge invariance: the conjugated weighted Laplacian is isospectral
//    to the unweighted one, degreewise, to 1e-10 relative.
Criterion criterion2() {
  constexpr double kTol = 1e-10;
  constexpr double kBudget = 60.0;
  Criterion c;
  Clock::time_point t0 = Clock::now();

  struct Case {
    std::string name;
    SurfaceMesh mesh;
  };
  std::vector<Case> cases;
  cases.push_back({"sphere", make_sphere(1.0, 2)});
  cases.push_back({"torus", make_torus(2.0, 0.5, 16, 16)});

  double worst = 0;
  for (const auto& cs : cases) {
    DualVolumes dv = dual_volumes(cs.mesh);
    CurvatureField curv = estimate_curvature(cs.mesh);
    WeightField unweighted = zero_weight(cs.mesh, curv);
    DecOperators plain = assemble(cs.mesh, dv, unweighted);

    for (int wk = 0; wk < 2; ++wk) {
      WeightField w = wk == 0
                          ? radial_weight(cs.mesh, curv, 1.0)
                          : custom_weight(cs.mesh, curv,
                                          random_smooth_samples(cs.mesh, 11));
      TwistedOperators tw = assemble_twisted(cs.mesh, dv, w);
      for (int p = 0; p <= 2; ++p) {
        int dim = plain.dim(p);
        OperatorPair a;
        a.L = tw.L[static_cast<size_t>(p)];
        a.W = tw.starF[static_cast<size_t>(p)];
        OperatorPair b;
        b.L = plain.L[static_cast<size_t>(p)];
        b.W = plain.starF[static_cast<size_t>(p)];
        for (int i = 0; i < dim; ++i) {
          a.dofs.push_back(i);
          b.dofs.push_back(i);
        }
        SpectrumResult sa = solve(a, dim, SolveMethod::Dense);
        SpectrumResult sb = solve(b, dim, SolveMethod::Dense);
        for (int i = 0; i < dim; ++i) {
          double rel = std::abs(sa.eigenvalues[i] - sb.eigenvalues[i]) /
                       std::max({1.0, std::abs(sa.eigenvalues[i]),
                                 std::abs(sb.eigenvalues[i])});
          worst = std::max(worst, rel);
        }
      }
    }
  }
  if (worst > kTol) c.fail("spectral deviation " + fmt(worst));
  double dt = seconds_since(t0);
  if (dt > kBudget) c.fail("took " + fmt(dt) + "s (budget 60s)");
  c.note("worst relative deviation " + fmt(worst));
  c.note(fmt(dt) + "s");
  return c;
}

// ---------------------------------------------------------------------
// 3. Convergence against closed-form spectra, plus the dense oracle.
Criterion criterion3() {
  constexpr double kSphereTol = 0.02;
  constexpr double kDiskTol = 0.03;
  constexpr double kRatioTarget = 2.539;
  constexpr double kRatioTol = 0.05;
  constexpr double kOracleTol = 1e-8;
  Criterion c;

  {
    SurfaceMesh m = make_sphere(1.0, 4);
    DualVolumes dv = dual_volumes(m);
    CurvatureField curv = estimate_curvature(m);
    DecOperators ops = assemble(m, dv, zero_weight(m, curv));

    SpectrumResult s0 = solve(full_pair(ops, 0), 9);
    bool ok = std::abs(s0.eigenvalues[0]) < 1e-8;
    for (int i = 1; i <= 3; ++i)
      ok = ok && std::abs(s0.eigenvalues[i] - 2.0) <= kSphereTol * 2.0;
    for (int i = 4; i <= 8; ++i)
      ok = ok && std::abs(s0.eigenvalues[i] - 6.0) <= kSphereTol * 6.0;
    if (!ok) c.fail("sphere 0-form bands off target");
    c.note("sphere l=1 band " + fmt(s0.eigenvalues[1]) + ".." +
           fmt(s0.eigenvalues[3]));

    SpectrumResult s1 = solve(full_pair(ops, 1), 8);
    bool ok1 = true;
    for (int i = 0; i <= 5; ++i)
      ok1 = ok1 && std::abs(s1.eigenvalues[i] - 2.0) <= kSphereTol * 2.0;
    ok1 = ok1 && s1.eigenvalues[6] > 4.0;  // multiplicity exactly six
    if (!ok1) c.fail("sphere 1-form first band off target");
  }

  {
    DomainMesh disk = make_disk(1.0, 4);
    DualVolumes dv = dual_volumes(disk.mesh);
    CurvatureField curv = estimate_curvature(disk.mesh);
    DecOperators ops = assemble(disk.mesh, dv, zero_weight(disk.mesh, curv));
    SpectrumResult s = solve(dirichlet_restrict(ops, disk, 0), 2);
    double l1 = s.eigenvalues[0], ratio = s.eigenvalues[1] / s.eigenvalues[0];
    if (std::abs(l1 - 5.7832) > kDiskTol * 5.7832)
      c.fail("disk lambda1 " + fmt(l1));
    if (std::abs(ratio - kRatioTarget) > kRatioTol)
      c.fail("disk ratio " + fmt(ratio));
    c.note("disk lambda1 " + fmt(l1) + ", ratio " + fmt(ratio));
  }

  {
    double worst = 0;
    struct Small {
      DomainMesh dom;
    };
    std::vector<DomainMesh> small;
    small.push_back(whole_surface(make_sphere(1.0, 1)));
    small.push_back(whole_surface(make_torus(2.0, 0.5, 8, 8)));
    small.push_back(make_disk(1.0, 2));
    for (const auto& dom : small) {
      DualVolumes dv = dual_volumes(dom.mesh);
      CurvatureField curv = estimate_curvature(dom.mesh);
      DecOperators ops = assemble(dom.mesh, dv,
                                  custom_weight(dom.mesh, curv,
                                                random_smooth_samples(dom.mesh, 3)));
      for (int p = 0; p <= 2; ++p) {
        OperatorPair pair = dom.wholeSurface() ? full_pair(ops, p)
                                               : dirichlet_restrict(ops, dom, p);
        int k = std::min(12, pair.dim());
        SpectrumResult dense = solve(pair, k, SolveMethod::Dense);
        SpectrumResult sparse = solve(pair, k, SolveMethod::Lanczos);
        for (int i = 0; i < k; ++i)
          worst = std::max(worst,
                           std::abs(dense.eigenvalues[i] - sparse.eigenvalues[i]) /
                               std::max(1.0, std::abs(dense.eigenvalues[i])));
      }
    }
    if (worst > kOracleTol) c.fail("dense/sparse deviation " + fmt(worst));
    c.note("dense vs sparse " + fmt(worst));
  }
  return c;
}

// ---------------------------------------------------------------------
// 4. Weighted Betti numbers are weight-independent.
Criterion criterion4() {
  constexpr double kBudget = 120.0;
  Criterion c;
  Clock::time_point t0 = Clock::now();

  struct Case {
    std::string name;
    SurfaceMesh mesh;
    std::array<int, 3> expect;
  };
  std::vector<Case> cases;
  cases.push_back({"sphere", make_sphere(1.0, 3), {1, 0, 1}});
  cases.push_back({"torus", make_torus(2.0, 0.5, 16, 16), {1, 2, 1}});

  for (const auto& cs : cases) {
    DualVolumes dv = dual_volumes(cs.mesh);
    CurvatureField curv = estimate_curvature(cs.mesh);
    for (int wk = 0; wk < 3; ++wk) {
      WeightField w = wk == 0   ? zero_weight(cs.mesh, curv)
                      : wk == 1 ? radial_weight(cs.mesh, curv, 1.0)
                                : custom_weight(cs.mesh, curv,
                                                random_smooth_samples(cs.mesh, 5));
      DecOperators ops = assemble(cs.mesh, dv, w);
      for (int p = 0; p <= 2; ++p) {
        int b = f_betti(ops, p);
        if (b != cs.expect[static_cast<size_t>(p)])
          c.fail(cs.name + " weight " + std::to_string(wk) + ": b" +
                 std::to_string(p) + " = " + std::to_string(b));
      }
    }
  }
  double dt = seconds_since(t0);
  if (dt > kBudget) c.fail("took " + fmt(dt) + "s (budget 120s)");
  c.note("kernel dimensions stable across weights");
  c.note(fmt(dt) + "s");
  return c;
}

// ---------------------------------------------------------------------
// 5. Sharpness of the first-eigenvalue bounds on the round sphere: small
//    slack at level 4, strictly smaller at level 5.
Criterion criterion5() {
  constexpr double kSlackCap = 0.05;
  Criterion c;

  auto slacks = [&](int level) {
    Scene s = make_scene(whole_surface(make_sphere(1.0, level)), WeightSpec{});
    InequalityReport gap = first_eigenvalue_gap(s, 1);
    InequalityReport up = exact_eigenvalue_upper(s, 1);
    return std::pair<double, double>(gap.slack, up.slack);
  };
  auto [gap4, up4] = slacks(4);
  auto [gap5, up5] = slacks(5);

  if (std::abs(gap4) > kSlackCap) c.fail("gap slack " + fmt(gap4) + " at level 4");
  if (std::abs(up4) > kSlackCap) c.fail("upper slack " + fmt(up4) + " at level 4");
  if (!(std::abs(gap5) < std::abs(gap4)))
    c.fail("gap slack magnitude grew at level 5");
  if (!(std::abs(up5) < std::abs(up4)))
    c.fail("upper slack magnitude grew at level 5");
  c.note("gap slack " + fmt(gap4) + " -> " + fmt(gap5));
  c.note("upper slack " + fmt(up4) + " -> " + fmt(up5));
  return c;
}

// ---------------------------------------------------------------------
// 6. Recursion grids on the three bounded domains under all weights.
Criterion criterion6() {
  constexpr double kRatioTarget = 2.54;
  constexpr double kRatioTol = 0.05;
  Criterion c;

  {
    DomainMesh disk = make_disk(1.0, 4);
    DualVolumes dv = dual_volumes(disk.mesh);
    CurvatureField curv = estimate_curvature(disk.mesh);
    DecOperators ops = assemble(disk.mesh, dv, zero_weight(disk.mesh, curv));
    SpectrumResult s = solve(dirichlet_restrict(ops, disk, 0), 2);
    double ratio = s.eigenvalues[1] / s.eigenvalues[0];
    if (!(s.eigenvalues[1] <= 3.0 * s.eigenvalues[0]))
      c.fail("lambda2 > 3 lambda1 on the disk");
    if (std::abs(ratio - kRatioTarget) > kRatioTol)
      c.fail("disk ratio " + fmt(ratio));
    c.note("disk ratio " + fmt(ratio));
  }

  double R = std::sqrt(2.0);
  struct Fixture {
    std::string name;
    std::function<DomainMesh()> build;
    int distBase;  // -1: probe after build
    Eigen::Vector3d probeTarget;
    bool probeMaxZ;
    CurvatureBounds bounds;
  };
  CurvatureBounds diskB;
  CurvatureBounds capB;
  capB.sectional = true;
  capB.l1 = capB.l2 = 1.0 / (R * R);
  CurvatureBounds winB;
  winB.l = -1.0 / (0.5 * 1.5);
  std::vector<Fixture> fixtures;
  fixtures.push_back({"disk", [] { return make_disk(1.0, 4); }, 0,
                      Eigen::Vector3d::Zero(), false, diskB});
  fixtures.push_back({"cap", [R] { return cap_domain(R, 3, 0.35 * R); }, -1,
                      Eigen::Vector3d::Zero(), true, capB});
  fixtures.push_back({"patch", [] { return window_domain(2.0, 0.5, 32, 32); }, -1,
                      Eigen::Vector3d(0, 2.5, 0), false, winB});

  const std::vector<double> alphas = {1.5, 2.0, 3.0};
  int total = 0, failed = 0;
  double worstSlack = std::numeric_limits<double>::infinity();
  for (const auto& fx : fixtures) {
    for (int wk = 0; wk < 3; ++wk) {
      DomainMesh dom = fx.build();
      WeightSpec ws;
      if (wk == 1) {
        ws.kind = WeightKind::Radial;
        ws.a = 1.0;
      } else if (wk == 2) {
        ws.kind = WeightKind::Distance;
        ws.a = 0.5;
        ws.bounds = fx.bounds;
        ws.basePoint = fx.distBase >= 0 ? fx.distBase
                       : fx.probeMaxZ   ? probe_max_z(dom.mesh)
                                        : probe_nearest(dom, fx.probeTarget);
      }
      Scene s = make_scene(std::move(dom), ws);
      for (int p = 0; p <= 2; ++p) {
        int count = std::min(11, scene_dim(s, p));
        if (count < 2) continue;
        ModeSet ms = compute_modes(s, p, count);
        for (double alpha : alphas) {
          for (int k = 1; k <= std::min(5, ms.count() - 1); ++k) {
            std::vector<InequalityReport> reps;
            reps.push_back(yang_recursion(s, ms, k, alpha));
            reps.push_back(extremal_recursion(s, ms, k, alpha));
            if (s.weight.kind == WeightKind::Radial)
              reps.push_back(radial_recursion(s, ms, k, alpha));
            if (s.weight.kind == WeightKind::Distance)
              reps.push_back(distance_weight_bounds(s, ms, k, alpha));
            for (const auto& r : reps) {
              ++total;
              worstSlack = std::min(worstSlack, r.slack);
              if (!r.pass) {
                ++failed;
                if (failed <= 3)
                  c.fail(fx.name + " w" + std::to_string(wk) + " " + r.id +
                         " p=" + std::to_string(p) + " k=" + std::to_string(k) +
                         " alpha=" + fmt(alpha) + " slack " + fmt(r.slack));
              }
            }
          }
        }
      }
    }
  }
  if (failed > 3) c.fail(std::to_string(failed) + " grid reports failed");
  c.note(std::to_string(total - failed) + "/" + std::to_string(total) +
         " grid reports pass");
  c.note("worst slack " + fmt(worstSlack));
  return c;
}

// ---------------------------------------------------------------------
// 7. Stability analysis of the self-shrinking sphere.
Criterion criterion7() {
  constexpr double kHfTol = 0.05;
  constexpr double kSpecTol = 0.03;
  constexpr double kBudget = 60.0;
  Criterion c;
  Clock::time_point t0 = Clock::now();

  WeightSpec ws;
  ws.kind = WeightKind::Radial;
  ws.a = 1.0;
  Scene s = make_scene(whole_surface(make_sphere(std::sqrt(2.0), 4)), ws);
  // maxL = 7 also forces enough eigenpairs to resolve the third cluster.
  auto [res, reports] = jacobi_stability(s, 1, 7);

  if (!(res.hFsup < kHfTol)) c.fail("sup |H_f| = " + fmt(res.hFsup));
  if (res.index != 4) c.fail("index " + std::to_string(res.index));

  const double target[9] = {-2, -1, -1, -1, 1, 1, 1, 1, 1};
  if (res.spectrum.size() < 9) {
    c.fail("only " + std::to_string(res.spectrum.size()) + " eigenvalues");
  } else {
    for (int i = 0; i < 9; ++i)
      if (std::abs(res.spectrum[i] - target[i]) > kSpecTol * std::abs(target[i]))
        c.fail("eigenvalue " + std::to_string(i) + " = " + fmt(res.spectrum[i]));
  }

  if (res.dTable.size() < 3 || res.dTable[0] != 1 || res.dTable[1] != 4 ||
      res.dTable[2] != 7)
    c.fail("comparison d-table wrong");

  bool sawCount = false, sawBetti = false;
  for (const auto& r : reports) {
    if (r.id == "stability_eigenvalue_bound") {
      double l = 0;
      for (const auto& [k, v] : r.details)
        if (k == "l") l = v;
      if (l <= 3.0 && !r.pass)
        c.fail("eigenvalue bound fails at l=" + fmt(l));
    } else if (r.id == "stability_index_count") {
      sawCount = true;
      if (!r.pass) c.fail("index count bound fails");
    } else if (r.id == "stability_index_betti") {
      sawBetti = true;
      if (!r.pass || std::abs(r.right - 3.0) > 1e-9)
        c.fail("Betti index bound " + fmt(r.right) + " vs index " + fmt(r.left));
    }
  }
  if (!sawCount || !sawBetti) c.fail("missing stability reports");

  double dt = seconds_since(t0);
  if (dt > kBudget) c.fail("took " + fmt(dt) + "s (budget 60s)");
  c.note("index 4, spectrum clusters at " + fmt(res.spectrum.size() >= 1 ? res.spectrum[0] : 0) +
         "/" + fmt(res.spectrum.size() >= 2 ? res.spectrum[1] : 0) + "/" +
         fmt(res.spectrum.size() >= 5 ? res.spectrum[4] : 0));
  c.note(fmt(dt) + "s");
  return c;
}

// ---------------------------------------------------------------------
// 8. Frame-sum identities at every vertex of every fixture.
Criterion criterion8() {
  constexpr double kTol = 1e-10;
  Criterion c;

  std::vector<DomainMesh> fixtures;
  fixtures.push_back(whole_surface(make_sphere(1.0, 3)));
  fixtures.push_back(whole_surface(make_torus(2.0, 0.5, 16, 16)));
  fixtures.push_back(make_disk(1.0, 4));
  double R = std::sqrt(2.0);
  fixtures.push_back(cap_domain(R, 3, 0.35 * R));
  fixtures.push_back(window_domain(2.0, 0.5, 32, 32));

  double worst = 0;
  Eigen::VectorXd X(2);
  X << 0.6, -0.8;
  for (const auto& dom : fixtures) {
    CurvatureField curv = estimate_curvature(dom.mesh);
    for (int v = 0; v < dom.mesh.nV(); ++v) {
      std::vector<Eigen::VectorXd> frame;
      for (int i = 0; i < 3; ++i)
        frame.push_back(curv.frame[static_cast<size_t>(v)].transpose() *
                        Eigen::Vector3d::Unit(i));
      for (int p = 1; p <= 2; ++p) {
        FrameSumReport rep = frame_sum_checks(2, p, frame, X);
        double err = std::max(
            std::abs(rep.wedge_sum - rep.wedge_predicted) /
                std::max(1.0, rep.wedge_predicted),
            std::abs(rep.interior_sum - rep.interior_predicted) /
                std::max(1.0, rep.interior_predicted));
        worst = std::max(worst, err);
        if (err > kTol) {
          c.fail("identity residual " + fmt(err) + " at a vertex (p=" +
                 std::to_string(p) + ")");
          break;
        }
      }
      if (!c.pass) break;
    }
    if (!c.pass) break;
  }
  c.note("worst identity residual " + fmt(worst));
  return c;
}

// ---------------------------------------------------------------------
// 9. Determinism: identical runs of the command line tool produce byte
//    identical artifacts.
Criterion criterion9(const std::string& cliPath) {
  Criterion c;
  if (cliPath.empty()) {
    c.fail("no CLI binary path given (argv[1])");
    return c;
  }

  fs::path dir = fs::temp_directory_path() /
                 ("sgt_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  auto run = [&](const std::string& args) {
    std::string cmd = cliPath + " " + args + " >/dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };

  std::string verifyArgs =
      "verify --fixture sphere:1,2 --weight radial:1 -p 0,1,2 --kmax 3 "
      "--alpha 1.5,2 --seed 31 --out " + (dir / "v").string();
  if (run(verifyArgs) != 0) c.fail("verify run failed");
  std::string first = slurp(dir / "v" / "verify.json");
  if (run(verifyArgs) != 0) c.fail("verify rerun failed");
  std::string second = slurp(dir / "v" / "verify.json");
  if (first.empty() || first != second) c.fail("verify.json not byte-identical");

  std::string specArgs =
      "spectrum --fixture torus:2,0.5,12,12 --weight radial:1 -p 1 -k 10 "
      "--method lanczos --seed 99 --out " + (dir / "s").string();
  if (run(specArgs) != 0) c.fail("spectrum run failed");
  std::string csv1 = slurp(dir / "s" / "spectrum_p1.csv");
  if (run(specArgs) != 0) c.fail("spectrum rerun failed");
  std::string csv2 = slurp(dir / "s" / "spectrum_p1.csv");
  if (csv1.empty() || csv1 != csv2) c.fail("spectrum CSV not byte-identical");

  std::error_code ec;
  fs::remove_all(dir, ec);
  c.note("verify.json and spectrum CSV stable across reruns");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cliPath = argc > 1 ? argv[1] : "";

  struct Entry {
    int num;
    const char* name;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> entries = {
      {1, "structural exactness", criterion1},
      {2, "gauge invariance", criterion2},
      {3, "spectrum convergence", criterion3},
      {4, "weighted Betti invariance", criterion4},
      {5, "first-eigenvalue sharpness", criterion5},
      {6, "recursion grids", criterion6},
      {7, "shrinker stability", criterion7},
      {8, "frame-sum identities", criterion8},
      {9, "determinism", [&] { return criterion9(cliPath); }},
  };

  int failures = 0;
  for (const auto& e : entries) {
    Criterion c;
    try {
      c = e.run();
    } catch (const std::exception& ex) {
      c.pass = false;
      c.detail = std::string("exception: ") + ex.what();
    }
    if (!c.pass) ++failures;
    std::printf("[%s] %d %s%s%s\n", c.pass ? "PASS" : "FAIL", e.num, e.name,
                c.detail.empty() ? "" : ": ", c.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/9 criteria passed\n",
              static_cast<int>(entries.size()) - failures);
  return failures;
}
