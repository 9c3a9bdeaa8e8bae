#include "sgt/inequalities.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sgt {

namespace {

double min_eig(const FormEndo& A) {
  if (A.rows() == 1) return A(0, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
  return es.eigenvalues()(0);
}

// x^e extended by 0 for x <= 0, so degenerate eigenvalue gaps drop out of
// the recursion sums instead of producing 0^0 artifacts.
double powp(double x, double e) { return x > 0 ? std::pow(x, e) : 0.0; }

// The recursion constant c/n for n = 2: c = 4 for alpha <= 2, 2 alpha above.
double recursion_factor(double alpha) {
  return (alpha <= 2.0 ? 4.0 : 2.0 * alpha) / 2.0;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string weight_desc(const WeightField& w) {
  switch (w.kind) {
    case WeightKind::Zero:
      return "zero";
    case WeightKind::Radial:
      return "radial(a=" + fmt(w.a) + ")";
    case WeightKind::Distance:
      return "distance(a=" + fmt(w.a) + ")";
    case WeightKind::Custom:
      return "custom";
  }
  return "?";
}

std::string scene_desc(const Scene& s) {
  std::ostringstream os;
  os << (s.closed() ? "closed surface" : "Dirichlet domain") << " V="
     << s.mesh().nV() << " E=" << s.mesh().nE() << " F=" << s.mesh().nF()
     << ", weight " << weight_desc(s.weight);
  return os.str();
}

// Fill slack, tolerance and pass once left/right/direction are set. The
// default tolerance is 5% of the larger side; estimates verified against
// a discretization cannot do much better at desk resolutions.
void finish(InequalityReport& r, double tol = -1.0) {
  r.slack = r.direction == Direction::LeftLeqRight ? r.right - r.left
                                                   : r.left - r.right;
  r.tolerance =
      tol >= 0 ? tol
               : 0.05 * std::max(std::abs(r.left), std::abs(r.right)) + 1e-12;
  r.pass = !r.evaluated || r.slack >= -r.tolerance;
}

Eigen::VectorXd scatter_mode(const OperatorPair& pr, int fullDim,
                             const Eigen::VectorXd& x) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(fullDim);
  for (int i = 0; i < pr.dim(); ++i) full[pr.dofs[static_cast<size_t>(i)]] = x[i];
  return full;
}

template <class F>
double domain_min(const Scene& s, F f) {
  double m = std::numeric_limits<double>::infinity();
  for (int v : s.dom.interiorVertices) m = std::min(m, f(v));
  return m;
}

template <class F>
double domain_max(const Scene& s, F f) {
  double m = -std::numeric_limits<double>::infinity();
  for (int v : s.dom.interiorVertices) m = std::max(m, f(v));
  return m;
}

struct FirstEigs {
  double withZero = 0;
  double positive = 0;
  int kernel = 0;
};

FirstEigs first_eigs(const OperatorPair& pr, SolveMethod method,
                     unsigned seed) {
  int n = pr.dim();
  int k = std::min(n, 8);
  for (;;) {
    SpectrumResult r = solve(pr, k, method, seed);
    if (r.kernelDim < k)
      return {r.eigenvalues[0], r.eigenvalues[r.kernelDim], r.kernelDim};
    if (k == n) throw SpectraError("operator has no positive eigenvalues");
    k = std::min(n, 2 * k + 8);
  }
}

// Quadrature of scalar and endomorphism densities against one mode,
// normalized by the mode's own quadrature mass so the vertex averaging
// bias cancels between numerator and denominator.
double integral_scalar(const Scene& s, const ModeSet& ms, int i,
                       const Eigen::VectorXd& dens) {
  const Eigen::VectorXd& mass = s.ops.starF[0];
  const Eigen::MatrixXd& C = ms.comp[static_cast<size_t>(i)];
  double acc = 0;
  for (int v = 0; v < C.rows(); ++v)
    acc += mass[v] * dens[v] * C.row(v).squaredNorm();
  return acc / ms.quadNorm[i];
}

double integral_endo(const Scene& s, const ModeSet& ms, int i,
                     const std::vector<FormEndo>& R) {
  const Eigen::VectorXd& mass = s.ops.starF[0];
  const Eigen::MatrixXd& C = ms.comp[static_cast<size_t>(i)];
  double acc = 0;
  for (int v = 0; v < C.rows(); ++v) {
    Eigen::VectorXd cv = C.row(v).transpose();
    acc += mass[v] * cv.dot(R[static_cast<size_t>(v)] * cv);
  }
  return acc / ms.quadNorm[i];
}

double integral_endo_sq(const Scene& s, const ModeSet& ms, int i,
                        const std::vector<FormEndo>& R) {
  const Eigen::VectorXd& mass = s.ops.starF[0];
  const Eigen::MatrixXd& C = ms.comp[static_cast<size_t>(i)];
  double acc = 0;
  for (int v = 0; v < C.rows(); ++v) {
    Eigen::VectorXd cv = C.row(v).transpose();
    acc += mass[v] * (R[static_cast<size_t>(v)] * cv).squaredNorm();
  }
  return acc / ms.quadNorm[i];
}

void check_recursion_args(const ModeSet& ms, int k) {
  if (k < 1) throw InequalityError("recursion order k must be at least 1");
  if (k + 1 > ms.count())
    throw InequalityError("mode set holds " + std::to_string(ms.count()) +
                          " eigenpairs but the recursion needs " +
                          std::to_string(k + 1));
}

// Assembles the summed recursion inequality from a per-mode bracket.
template <class BracketFn>
void recursion_sides(const ModeSet& ms, int k, double alpha, BracketFn b,
                     InequalityReport& rep) {
  double lamNext = ms.spec.eigenvalues[k];
  double lhs = 0, rhs = 0;
  for (int i = 0; i < k; ++i) {
    double diff = std::max(0.0, lamNext - ms.spec.eigenvalues[i]);
    lhs += powp(diff, alpha);
    rhs += powp(diff, alpha - 1.0) * b(i);
  }
  rep.left = lhs;
  rep.right = recursion_factor(alpha) * rhs;
  rep.direction = Direction::LeftLeqRight;
  rep.details.emplace_back("lambda_next", lamNext);
}

// df wedge (df contracted into .) on p-form coefficients, from the frame
// components of the gradient. Rank one on 1-forms, |df|^2 at the top.
FormEndo grad_wedge_contract(const Eigen::Vector2d& g, int p) {
  FormEndo M;
  if (p == 0) {
    M = FormEndo::Zero(1, 1);
    return M;
  }
  PForm oneForm(2, 1);
  oneForm.c = g;
  Eigen::VectorXd gv = g;
  long dim = PForm(2, p).c.size();
  M.resize(dim, dim);
  for (long j = 0; j < dim; ++j) {
    PForm basis = PForm::basisForm(2, p, static_cast<int>(j));
    PForm inner = interior(gv, basis);
    PForm out = wedge(oneForm, inner);
    M.col(j) = out.c;
  }
  return M;
}

std::vector<FormEndo> curvature_plus_weight(const Scene& s, int p) {
  std::vector<FormEndo> B = bochner_ext(s.curv, p);
  std::vector<FormEndo> T = t_f_on_forms(s.weight, p);
  for (size_t v = 0; v < B.size(); ++v) B[v] += T[v];
  return B;
}

Eigen::VectorXd weighted_mean_curvature(const Scene& s) {
  const SurfaceMesh& m = s.mesh();
  Eigen::VectorXd hf(m.nV());
  double a = s.weight.a;
  for (int v = 0; v < m.nV(); ++v)
    hf[v] = a * m.vertices[static_cast<size_t>(v)].dot(
                    s.curv.normal[static_cast<size_t>(v)]) -
            2.0 * s.curv.H[v];
  return hf;
}

SpMat subtract_weighted_diagonal(const SpMat& L, const Eigen::VectorXd& w,
                                 const Eigen::VectorXd& q) {
  SpMat D(L.rows(), L.cols());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(L.rows()));
  for (int v = 0; v < L.rows(); ++v) trips.emplace_back(v, v, w[v] * q[v]);
  D.setFromTriplets(trips.begin(), trips.end());
  SpMat out = L - D;
  out.makeCompressed();
  return out;
}

long binom3(int k) {
  // C(3, k) for the comparison index table (ambient dimension 3).
  static const long table[4] = {1, 3, 3, 1};
  return (k >= 0 && k <= 3) ? table[k] : 0;
}

void check_degree(int p) {
  if (p < 0 || p > 2)
    throw InequalityError("form degree must be 0, 1 or 2 on a surface");
}

}  // namespace

Scene make_scene(DomainMesh dom, const WeightSpec& spec) {
  Scene s;
  s.dom = std::move(dom);
  s.dv = dual_volumes(s.dom.mesh);
  s.curv = estimate_curvature(s.dom.mesh);
  switch (spec.kind) {
    case WeightKind::Zero:
      s.weight = zero_weight(s.dom.mesh, s.curv);
      break;
    case WeightKind::Radial:
      s.weight = radial_weight(s.dom.mesh, s.curv, spec.a);
      break;
    case WeightKind::Distance: {
      auto [w, cd] = distance_weight(s.dom.mesh, s.curv, spec.basePoint,
                                     spec.a, spec.bounds);
      s.weight = std::move(w);
      s.comparison = std::move(cd);
      s.hasComparison = true;
      break;
    }
    case WeightKind::Custom:
      if (spec.samples.size() != s.dom.mesh.nV())
        throw InequalityError("custom weight needs one sample per vertex");
      s.weight = custom_weight(s.dom.mesh, s.curv, spec.samples);
      break;
  }
  s.ops = assemble(s.dom.mesh, s.dv, s.weight);
  return s;
}

PointwiseRicci pointwise_ricci(const Scene& s, int p, double N) {
  check_degree(p);
  if (!(N < 0.0 || N > 3.0 - p))
    throw InequalityError(
        "dimension parameter N must be negative or exceed n - p + 1 = " +
        fmt(3.0 - p));
  PointwiseRicci out;
  out.p = p;
  out.N = N;
  out.ric = curvature_plus_weight(s, p);
  std::vector<FormEndo> S = sff_on_forms(s.curv, p);
  out.sffSq.resize(S.size());
  for (size_t v = 0; v < S.size(); ++v) out.sffSq[v] = S[v] * S[v];
  out.ricN = out.ric;
  double denom = N - (3.0 - p);
  for (size_t v = 0; v < out.ricN.size(); ++v)
    out.ricN[v] -= grad_wedge_contract(s.weight.gradFrame[v], p) / denom;
  return out;
}

Eigen::MatrixXd vertex_components(const Scene& s, int p,
                                  const Eigen::VectorXd& full) {
  check_degree(p);
  const SurfaceMesh& m = s.mesh();
  if (full.size() != s.ops.dim(p))
    throw InequalityError("coefficient vector does not match the degree");
  int nV = m.nV();
  if (p == 0) return full;

  if (p == 2) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(nV, 1);
    for (int v = 0; v < nV; ++v) {
      double acc = 0;
      for (int f : m.vertexFaces[static_cast<size_t>(v)]) acc += full[f] / 3.0;
      comp(v, 0) = acc / s.dv.vertexArea[v];
    }
    return comp;
  }

  // Degree 1: evaluate the Whitney interpolant at each face barycenter,
  // spread the face's area to its corners, then project on the vertex
  // frame. At the barycenter the interpolant of edge (a, b), a < b, is
  // (grad hat_b - grad hat_a) / 3.
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nV, 3);
  for (int f = 0; f < m.nF(); ++f) {
    const auto& fv = m.faces[static_cast<size_t>(f)];
    const Eigen::Vector3d& xi = m.vertices[static_cast<size_t>(fv[0])];
    const Eigen::Vector3d& xj = m.vertices[static_cast<size_t>(fv[1])];
    const Eigen::Vector3d& xk = m.vertices[static_cast<size_t>(fv[2])];
    double A = s.dv.faceArea[f];
    Eigen::Vector3d nf = (xj - xi).cross(xk - xi).normalized();
    Eigen::Vector3d grad[3] = {nf.cross(xk - xj) / (2.0 * A),
                               nf.cross(xi - xk) / (2.0 * A),
                               nf.cross(xj - xi) / (2.0 * A)};
    Eigen::Vector3d w = Eigen::Vector3d::Zero();
    for (int c = 0; c < 3; ++c) {
      int u = fv[static_cast<size_t>(c)];
      int v = fv[static_cast<size_t>((c + 1) % 3)];
      int lu = c, lv = (c + 1) % 3;
      if (u > v) {
        std::swap(u, v);
        std::swap(lu, lv);
      }
      int e = m.edgeIndex(u, v);
      w += full[e] * (grad[lv] - grad[lu]) / 3.0;
    }
    for (int c = 0; c < 3; ++c)
      acc.row(fv[static_cast<size_t>(c)]) += (A / 3.0) * w.transpose();
  }
  Eigen::MatrixXd comp(nV, 2);
  for (int v = 0; v < nV; ++v) {
    Eigen::Vector3d vec = acc.row(v).transpose() / s.dv.vertexArea[v];
    comp.row(v) =
        (s.curv.frame[static_cast<size_t>(v)].transpose() * vec).transpose();
  }
  return comp;
}

ModeSet compute_modes(const Scene& s, int p, int count, SolveMethod method,
                      unsigned seed) {
  check_degree(p);
  ModeSet ms;
  ms.p = p;
  ms.pair = s.dom.wholeSurface() ? full_pair(s.ops, p)
                                 : dirichlet_restrict(s.ops, s.dom, p);
  count = std::min(count, ms.pair.dim());
  if (count < 1) throw InequalityError("mode count must be positive");
  ms.spec = solve(ms.pair, count, method, seed);
  const Eigen::VectorXd& mass = s.ops.starF[0];
  ms.comp.reserve(static_cast<size_t>(count));
  ms.quadNorm.resize(count);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd full =
        scatter_mode(ms.pair, s.ops.dim(p), ms.spec.eigenvectors.col(i));
    ms.comp.push_back(vertex_components(s, p, full));
    double q = 0;
    for (int v = 0; v < ms.comp.back().rows(); ++v)
      q += mass[v] * ms.comp.back().row(v).squaredNorm();
    if (!(q > 0))
      throw InequalityError("mode has no quadrature mass; mesh too coarse");
    ms.quadNorm[i] = q;
  }
  return ms;
}

InequalityReport first_eigenvalue_gap(const Scene& s, int p,
                                      bool includeZeroModes,
                                      SolveMethod method, unsigned seed) {
  check_degree(p);
  if (p < 1)
    throw InequalityError("the gap estimate compares degree p with p - 1");

  OperatorPair prP = s.dom.wholeSurface()
                         ? full_pair(s.ops, p)
                         : dirichlet_restrict(s.ops, s.dom, p);
  OperatorPair prQ = s.dom.wholeSurface()
                         ? full_pair(s.ops, p - 1)
                         : dirichlet_restrict(s.ops, s.dom, p - 1);
  FirstEigs ep = first_eigs(prP, method, seed);
  FirstEigs eq = first_eigs(prQ, method, seed);
  double lamP = includeZeroModes ? ep.withZero : ep.positive;
  double lamQ = includeZeroModes ? eq.withZero : eq.positive;

  std::vector<FormEndo> R = curvature_plus_weight(s, p);
  std::vector<FormEndo> S = sff_on_forms(s.curv, p);
  double bound = domain_min(s, [&](int v) {
    FormEndo M = R[static_cast<size_t>(v)] -
                 S[static_cast<size_t>(v)] * S[static_cast<size_t>(v)];
    return min_eig(M);
  });

  InequalityReport rep;
  rep.id = "gap_lower_bound";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               (includeZeroModes ? ", zero modes included" : "");
  rep.direction = Direction::LeftGeqRight;
  rep.left = lamP - lamQ;
  rep.right = bound / p;
  rep.details.emplace_back("lambda_p", lamP);
  rep.details.emplace_back("lambda_pm1", lamQ);
  rep.details.emplace_back("kernel_p", ep.kernel);
  rep.details.emplace_back("kernel_pm1", eq.kernel);
  rep.details.emplace_back("curvature_min", bound);
  finish(rep);
  return rep;
}

InequalityReport exact_eigenvalue_upper(const Scene& s, int p,
                                        SolveMethod method, unsigned seed) {
  check_degree(p);
  if (p < 1) throw InequalityError("exact forms need degree at least 1");
  if (!s.closed())
    throw InequalityError("the integral upper bound needs a closed surface");

  double lam = first_exact_eigenvalue(s.ops, s.dom, p, method, seed);
  const Eigen::VectorXd& mass = s.ops.starF[0];
  double num = 0, den = 0;
  for (int v = 0; v < s.mesh().nV(); ++v) {
    double h2 = s.curv.H[v] * s.curv.H[v];
    double integrand = 2.0 * p * h2 - 0.5 * p * (p - 1) * s.curv.scal[v] +
                       0.5 * p * s.weight.gradNorm2[v];
    num += mass[v] * integrand;
    den += mass[v];
  }

  InequalityReport rep;
  rep.id = "exact_form_upper_bound";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p);
  rep.direction = Direction::LeftLeqRight;
  rep.left = lam;
  rep.right = num / den;
  rep.details.emplace_back("weighted_volume", den);
  finish(rep);
  return rep;
}

InequalityReport gallot_meyer_f(const Scene& s, int p, double N, double gamma,
                                SolveMethod method, unsigned seed) {
  if (p < 1 || p > 2)
    throw InequalityError("the twisted Gallot-Meyer estimate needs p = 1 or 2");
  PointwiseRicci ric = pointwise_ricci(s, p, N);
  double hypMin =
      domain_min(s, [&](int v) { return min_eig(ric.ricN[static_cast<size_t>(v)]); });
  double threshold = p * (2 - p) * gamma;

  InequalityReport rep;
  rep.id = "gallot_meyer";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) + ", N=" + fmt(N) +
               ", gamma=" + fmt(gamma);
  rep.details.emplace_back("hypothesis_min", hypMin);
  rep.details.emplace_back("hypothesis_threshold", threshold);
  if (hypMin < threshold) {
    rep.evaluated = false;
    rep.note = "curvature hypothesis fails: pointwise minimum " + fmt(hypMin) +
               " is below p(n-p)gamma = " + fmt(threshold);
    finish(rep);
    return rep;
  }
  rep.direction = Direction::LeftGeqRight;
  rep.left = first_exact_eigenvalue(s.ops, s.dom, p, method, seed);
  rep.right = threshold * N / (N - 1.0);
  finish(rep);
  return rep;
}

InequalityReport vanishing_check(const Scene& s, int p, SolveMethod method,
                                 unsigned seed) {
  check_degree(p);
  if (!s.closed())
    throw InequalityError("the vanishing criterion applies to closed surfaces");

  std::vector<FormEndo> B = bochner_ext(s.curv, p);
  double crit = domain_min(s, [&](int v) {
    return min_eig(B[static_cast<size_t>(v)]) - 0.5 * s.weight.lapF[v] -
           0.25 * s.weight.gradNorm2[v];
  });
  int betti = f_betti(s.ops, p, method, seed);

  InequalityReport rep;
  rep.id = "vanishing_criterion";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p);
  rep.direction = Direction::LeftGeqRight;
  rep.left = crit;
  rep.right = 0;
  rep.details.emplace_back("criterion_min", crit);
  rep.details.emplace_back("betti", betti);
  if (crit > 0) {
    rep.note = "criterion positive, harmonic space must vanish; computed "
               "dimension " +
               std::to_string(betti);
    finish(rep, 0.0);
    rep.pass = betti == 0;
  } else {
    rep.evaluated = false;
    rep.note = "criterion not positive, no vanishing forced; computed "
               "dimension " +
               std::to_string(betti);
    finish(rep, 0.0);
  }
  return rep;
}

InequalityReport yang_recursion(const Scene& s, const ModeSet& ms, int k,
                                double alpha) {
  check_recursion_args(ms, k);
  int p = ms.p;
  std::vector<FormEndo> R = curvature_plus_weight(s, p);
  Eigen::VectorXd dens(s.mesh().nV());
  for (int v = 0; v < s.mesh().nV(); ++v)
    dens[v] = s.curv.H[v] * s.curv.H[v] -
              0.25 * (2.0 * s.weight.lapF[v] + s.weight.gradNorm2[v]);

  InequalityReport rep;
  rep.id = "eigenvalue_recursion";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               ", k=" + std::to_string(k) + ", alpha=" + fmt(alpha);
  recursion_sides(ms, k, alpha,
                  [&](int i) {
                    return ms.spec.eigenvalues[i] -
                           integral_endo(s, ms, i, R) +
                           integral_scalar(s, ms, i, dens);
                  },
                  rep);
  finish(rep);
  return rep;
}

InequalityReport extremal_recursion(const Scene& s, const ModeSet& ms, int k,
                                 double alpha) {
  check_recursion_args(ms, k);
  int p = ms.p;
  std::vector<FormEndo> R = curvature_plus_weight(s, p);
  double delta1 =
      domain_min(s, [&](int v) { return min_eig(R[static_cast<size_t>(v)]); });
  double delta2 = domain_max(s, [&](int v) {
    return 4.0 * s.curv.H[v] * s.curv.H[v] - 2.0 * s.weight.lapF[v] -
           s.weight.gradNorm2[v];
  });

  InequalityReport rep;
  rep.id = "recursion_extremal_constants";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               ", k=" + std::to_string(k) + ", alpha=" + fmt(alpha);
  recursion_sides(ms, k, alpha,
                  [&](int i) {
                    return ms.spec.eigenvalues[i] - delta1 + 0.25 * delta2;
                  },
                  rep);
  rep.details.emplace_back("delta1", delta1);
  rep.details.emplace_back("delta2", delta2);
  finish(rep);
  return rep;
}

InequalityReport kth_eigenvalue_bound(const Scene& closedScene, const Scene& s,
                             const ModeSet& ms, int k) {
  if (k < 0) throw InequalityError("eigenvalue index k must be nonnegative");
  if (k + 1 > ms.count())
    throw InequalityError("mode set holds " + std::to_string(ms.count()) +
                          " eigenpairs but the bound needs " +
                          std::to_string(k + 1));
  if (!closedScene.closed())
    throw InequalityError(
        "the closed-form bound needs the ambient closed surface");
  int p = ms.p;

  std::vector<FormEndo> R = curvature_plus_weight(s, p);
  double delta1 =
      domain_min(s, [&](int v) { return min_eig(R[static_cast<size_t>(v)]); });
  double delta2 = domain_max(s, [&](int v) {
    return 4.0 * s.curv.H[v] * s.curv.H[v] - 2.0 * s.weight.lapF[v] -
           s.weight.gradNorm2[v];
  });

  const Eigen::VectorXd& mass = closedScene.ops.starF[0];
  double num = 0, den = 0;
  for (int v = 0; v < closedScene.mesh().nV(); ++v) {
    double h2 = closedScene.curv.H[v] * closedScene.curv.H[v];
    num += mass[v] * (2.0 * p * h2 -
                      0.5 * p * (p - 1) * closedScene.curv.scal[v] +
                      0.5 * p * closedScene.weight.gradNorm2[v]);
    den += mass[v];
  }
  double avg = num / den;

  InequalityReport rep;
  rep.id = "kth_eigenvalue_bound";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               ", k=" + std::to_string(k);
  rep.direction = Direction::LeftLeqRight;
  rep.left = ms.spec.eigenvalues[k];
  // n = 2: the dimensional constant 1 + 4/n is 3 and k^(2/n) is k.
  rep.right = (delta1 - 0.25 * delta2) * (1.0 - 3.0 * k) + 3.0 * k * avg;
  rep.details.emplace_back("delta1", delta1);
  rep.details.emplace_back("delta2", delta2);
  rep.details.emplace_back("closed_average", avg);
  finish(rep);
  return rep;
}

InequalityReport radial_recursion(const Scene& s, const ModeSet& ms, int k,
                              double alpha) {
  check_recursion_args(ms, k);
  if (s.weight.kind != WeightKind::Radial)
    throw InequalityError(
        "the radial recursion needs a quadratic radial weight");
  int p = ms.p;
  double a = s.weight.a;
  const SurfaceMesh& m = s.mesh();

  std::vector<FormEndo> S = sff_on_forms(s.curv, p);
  Eigen::VectorXd hf = weighted_mean_curvature(s);
  std::vector<FormEndo> hfS(S.size());
  for (size_t v = 0; v < S.size(); ++v) hfS[v] = hf[static_cast<int>(v)] * S[v];
  Eigen::VectorXd x2(m.nV()), hf2(m.nV());
  for (int v = 0; v < m.nV(); ++v) {
    x2[v] = m.vertices[static_cast<size_t>(v)].squaredNorm();
    hf2[v] = hf[v] * hf[v];
  }

  InequalityReport rep;
  rep.id = "radial_weight_recursion";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               ", k=" + std::to_string(k) + ", alpha=" + fmt(alpha);
  recursion_sides(ms, k, alpha,
                  [&](int i) {
                    return ms.spec.eigenvalues[i] +
                           integral_endo(s, ms, i, hfS) +
                           integral_endo_sq(s, ms, i, S) - a * p + a -
                           0.25 * a * a * integral_scalar(s, ms, i, x2) +
                           0.25 * integral_scalar(s, ms, i, hf2);
                  },
                  rep);
  rep.details.emplace_back("a", a);
  finish(rep);
  return rep;
}

InequalityReport distance_weight_bounds(const Scene& s, const ModeSet& ms,
                                        int k, double alpha) {
  check_recursion_args(ms, k);
  if (s.weight.kind != WeightKind::Distance || !s.hasComparison)
    throw InequalityError(
        "the comparison recursion needs a distance weight with bounds");
  const ComparisonData& cd = s.comparison;
  for (int v : s.dom.interiorVertices)
    if (cd.singular[static_cast<size_t>(v)])
      throw InequalityError(
          "comparison bound is singular inside the domain: sqrt(l) d "
          "reached pi at vertex " +
          std::to_string(v));

  int p = ms.p;
  double a = cd.a;

  InequalityReport rep;
  rep.id = "distance_weight_recursion";
  rep.inputs = scene_desc(s) + ", p=" + std::to_string(p) +
               ", k=" + std::to_string(k) + ", alpha=" + fmt(alpha) +
               (cd.bounds.sectional ? ", sectional bounds" : ", Ricci bound");

  if (!cd.bounds.sectional) {
    std::vector<FormEndo> R = curvature_plus_weight(s, p);
    double delta1 = domain_min(
        s, [&](int v) { return min_eig(R[static_cast<size_t>(v)]); });
    double delta2 = domain_max(s, [&](int v) {
      return 4.0 * s.curv.H[v] * s.curv.H[v] +
             2.0 * a * (1.0 + cd.dHl_ricci[v]) - a * a * cd.dist[v] * cd.dist[v];
    });
    recursion_sides(ms, k, alpha,
                    [&](int i) {
                      return ms.spec.eigenvalues[i] - delta1 + 0.25 * delta2;
                    },
                    rep);
    rep.details.emplace_back("delta1", delta1);
    rep.details.emplace_back("delta2", delta2);
  } else {
    std::vector<FormEndo> S = sff_on_forms(s.curv, p);
    std::vector<FormEndo> twoHS(S.size());
    for (size_t v = 0; v < S.size(); ++v)
      twoHS[v] = 2.0 * s.curv.H[static_cast<int>(v)] * S[v];
    double delta2 = domain_max(s, [&](int v) {
      double base = 4.0 * s.curv.H[v] * s.curv.H[v] +
                    2.0 * a * (1.0 + cd.dHl_sec1[v]) -
                    a * a * cd.dist[v] * cd.dist[v];
      double extra = cd.bounds.l2 <= 0
                         ? -4.0 * a * ((p - 1) * cd.dHl_sec2[v] + 1.0)
                         : -4.0 * a * p * cd.dHl_sec2[v];
      return base + extra;
    });
    recursion_sides(ms, k, alpha,
                    [&](int i) {
                      return ms.spec.eigenvalues[i] -
                             integral_endo(s, ms, i, twoHS) +
                             integral_endo_sq(s, ms, i, S) + 0.25 * delta2;
                    },
                    rep);
    rep.details.emplace_back("delta2", delta2);
  }
  finish(rep);
  return rep;
}

std::pair<JacobiResult, std::vector<InequalityReport>> jacobi_stability(
    const Scene& s, int p, int maxL, SolveMethod method, unsigned seed) {
  if (p < 1 || p > 2)
    throw InequalityError("the stability estimate needs p = 1 or 2");
  if (maxL < 1) throw InequalityError("maxL must be at least 1");
  if (s.weight.kind != WeightKind::Radial)
    throw InequalityError(
        "stability analysis needs a radial weight; ambient normal Hessians "
        "are not available for other weight kinds");
  if (!s.closed())
    throw InequalityError("stability analysis needs a closed surface");

  const SurfaceMesh& m = s.mesh();
  int nVert = m.nV();
  JacobiResult res;
  res.a = s.weight.a;
  res.gammaM = gamma_m(m, s.curv);
  res.mass = s.ops.starF[0];

  // Jacobi potential: the ambient Hessian of the radial weight is a times
  // the identity, so its normal-normal component is the constant a.
  res.potential.resize(nVert);
  for (int v = 0; v < nVert; ++v) res.potential[v] = res.a + s.curv.sff2[v];
  res.pencil = subtract_weighted_diagonal(s.ops.L[0], res.mass, res.potential);

  res.hF = weighted_mean_curvature(s);
  res.hFsup = res.hF.cwiseAbs().maxCoeff();
  res.fMinimal = res.hFsup < 0.05;
  res.index = negative_inertia(res.pencil, res.mass);

  // The pencil is indefinite; solve it shifted into the definite range and
  // move the eigenvalues back.
  double c0 = res.potential.maxCoeff() + 1.0;
  SpMat shifted =
      subtract_weighted_diagonal(res.pencil, res.mass, Eigen::VectorXd::Constant(nVert, -c0));
  OperatorPair jp;
  jp.L = shifted;
  jp.W = res.mass;
  jp.dofs.resize(static_cast<size_t>(nVert));
  for (int v = 0; v < nVert; ++v) jp.dofs[static_cast<size_t>(v)] = v;
  int kWant = std::min(nVert, std::max({maxL + 2, res.index + 2, 8}));
  if (kWant < maxL)
    throw InequalityError("maxL exceeds the Jacobi operator dimension");
  SpectrumResult js = solve(jp, kWant, method, seed);
  res.spectrum = js.eigenvalues.array() - c0;

  long comb = binom3(p + 1);
  res.dTable.resize(static_cast<size_t>(maxL));
  for (int l = 1; l <= maxL; ++l)
    res.dTable[static_cast<size_t>(l - 1)] = static_cast<int>(comb * (l - 1) + 1);
  int maxD = res.dTable.back();
  if (maxD > s.ops.dim(p))
    throw InequalityError("comparison index d(maxL) exceeds the form count");

  OperatorPair formPair = full_pair(s.ops, p);
  SpectrumResult fs = solve(formPair, maxD, method, seed);

  std::vector<InequalityReport> reports;
  std::string base = scene_desc(s) + ", p=" + std::to_string(p);
  std::string advisory =
      res.fMinimal ? ""
                   : "; surface is not f-minimal (sup |H_f| = " +
                         fmt(res.hFsup) + "), estimate hypotheses unmet";

  for (int l = 1; l <= maxL; ++l) {
    InequalityReport rep;
    rep.id = "stability_eigenvalue_bound";
    rep.inputs = base + ", l=" + std::to_string(l);
    rep.direction = Direction::LeftLeqRight;
    rep.left = res.spectrum[l - 1];
    int d = res.dTable[static_cast<size_t>(l - 1)];
    rep.right = fs.eigenvalues[d - 1] - (p + 1) * res.a +
                res.gammaM * p * (p - 1);
    rep.details.emplace_back("l", l);
    rep.details.emplace_back("d", d);
    rep.note = advisory.empty() ? "" : advisory.substr(2);
    finish(rep);
    reports.push_back(std::move(rep));
  }

  // Counting form: the stability index dominates the number of p-form
  // eigenvalues under (p+1)a - gamma_M p(p-1), divided by C(n+1, p+1).
  double threshold = (p + 1) * res.a - res.gammaM * p * (p - 1);
  SpMat belowOp = subtract_weighted_diagonal(
      s.ops.L[p], s.ops.starF[static_cast<size_t>(p)],
      Eigen::VectorXd::Constant(s.ops.dim(p), threshold));
  int beta = negative_inertia(belowOp, s.ops.starF[static_cast<size_t>(p)]);
  {
    InequalityReport rep;
    rep.id = "stability_index_count";
    rep.inputs = base;
    rep.direction = Direction::LeftGeqRight;
    rep.left = res.index;
    rep.right = static_cast<double>(beta) / static_cast<double>(comb);
    rep.details.emplace_back("beta", beta);
    rep.details.emplace_back("threshold", threshold);
    rep.note = advisory.empty() ? "" : advisory.substr(2);
    finish(rep, 0.5);
    reports.push_back(std::move(rep));
  }

  {
    InequalityReport rep;
    rep.id = "stability_index_betti";
    rep.inputs = base;
    rep.details.emplace_back("gamma_M", res.gammaM);
    bool shrinker = std::abs(res.a - 1.0) < 1e-12 && res.fMinimal;
    double pinch = p * (p - 1) * res.gammaM;
    if (!shrinker) {
      rep.evaluated = false;
      rep.note = "needs a self-shrinker (a = 1 and f-minimal); sup |H_f| = " +
                 fmt(res.hFsup) + ", a = " + fmt(res.a);
      finish(rep, 0.5);
    } else if (pinch > p + 1.0) {
      rep.evaluated = false;
      rep.note = "pinching hypothesis fails: p(p-1) gamma_M = " + fmt(pinch) +
                 " exceeds p + 1";
      finish(rep, 0.5);
    } else {
      int betti = f_betti(s.ops, p, method, seed);
      rep.direction = Direction::LeftGeqRight;
      rep.left = res.index;
      rep.right = static_cast<double>(betti) / static_cast<double>(comb) + 3.0;
      rep.details.emplace_back("betti", betti);
      finish(rep, 0.5);
    }
    reports.push_back(std::move(rep));
  }

  return {std::move(res), std::move(reports)};
}

}  // namespace sgt
