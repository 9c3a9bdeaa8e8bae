#include "sgt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace sgt {

namespace {

// Inverse square root of the 2x2 metric I + g g^T.
Eigen::Matrix2d inv_sqrt_metric(const Eigen::Vector2d& g) {
  double n2 = g.squaredNorm();
  if (n2 < 1e-300) return Eigen::Matrix2d::Identity();
  Eigen::Vector2d u = g / std::sqrt(n2);
  double w = std::sqrt(1.0 + n2);
  return Eigen::Matrix2d::Identity() + (1.0 / w - 1.0) * (u * u.transpose());
}

struct QuadFit {
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
  bool ok = false;
};

// Least-squares z = d x + e y + (A x^2 + 2 B x y + C y^2)/2 through the
// origin. Columns are rescaled so the rank test is dimensionless.
QuadFit fit_quadric(const Eigen::MatrixX2d& xy, const Eigen::VectorXd& z) {
  QuadFit out;
  const int npts = static_cast<int>(xy.rows());
  if (npts < 5) return out;
  double s = std::sqrt(xy.rowwise().squaredNorm().maxCoeff());
  if (s <= 0) return out;
  Eigen::MatrixXd D(npts, 5);
  for (int i = 0; i < npts; ++i) {
    double x = xy(i, 0) / s, y = xy(i, 1) / s;
    D.row(i) << x, y, 0.5 * x * x, x * y, 0.5 * y * y;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  if (svd.singularValues()(4) < 1e-8 * svd.singularValues()(0)) return out;
  Eigen::VectorXd sol = svd.solve(z / s);
  out.grad << sol[0], sol[1];
  out.hess << sol[2] / s, sol[3] / s, sol[3] / s, sol[4] / s;
  out.ok = true;
  return out;
}

Eigen::MatrixX2d project_coords(const SurfaceMesh& m,
                                const std::vector<int>& nbhd, int v,
                                const Eigen::Matrix<double, 3, 2>& t) {
  Eigen::MatrixX2d xy(nbhd.size(), 2);
  for (size_t i = 0; i < nbhd.size(); ++i)
    xy.row(static_cast<int>(i)) =
        (t.transpose() *
         (m.vertices[static_cast<size_t>(nbhd[i])] -
          m.vertices[static_cast<size_t>(v)]))
            .transpose();
  return xy;
}

Eigen::VectorXd project_heights(const SurfaceMesh& m,
                                const std::vector<int>& nbhd, int v,
                                const Eigen::Vector3d& n) {
  Eigen::VectorXd z(nbhd.size());
  for (size_t i = 0; i < nbhd.size(); ++i)
    z[static_cast<int>(i)] = n.dot(m.vertices[static_cast<size_t>(nbhd[i])] -
                                   m.vertices[static_cast<size_t>(v)]);
  return z;
}

Eigen::Matrix<double, 3, 2> frame_for_normal(const Eigen::Vector3d& n) {
  Eigen::Vector3d seed = std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                               : Eigen::Vector3d::UnitY();
  Eigen::Matrix<double, 3, 2> t;
  t.col(0) = (seed - seed.dot(n) * n).normalized();
  t.col(1) = n.cross(t.col(0));
  return t;
}

}  // namespace

CurvatureField estimate_curvature(const SurfaceMesh& m) {
  const int nv = m.nV();
  DualVolumes dv = dual_volumes(m);
  CurvatureField c;
  c.frame.resize(static_cast<size_t>(nv));
  c.normal.resize(static_cast<size_t>(nv));
  c.shape.resize(static_cast<size_t>(nv));
  c.k1.resize(nv);
  c.k2.resize(nv);
  c.H.resize(nv);
  c.Hcot.resize(nv);
  c.K.resize(nv);
  c.scal.resize(nv);
  c.sff2.resize(nv);
  c.fitNeighborhood.resize(static_cast<size_t>(nv));
  c.fitCoords.resize(static_cast<size_t>(nv));
  c.surfGrad.resize(static_cast<size_t>(nv));
  c.surfHess.resize(static_cast<size_t>(nv));

  // Face-orientation-induced vertex normals seed the fit.
  std::vector<Eigen::Vector3d> seedNormal(static_cast<size_t>(nv),
                                          Eigen::Vector3d::Zero());
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    Eigen::Vector3d an = (m.vertices[static_cast<size_t>(t[1])] -
                          m.vertices[static_cast<size_t>(t[0])])
                             .cross(m.vertices[static_cast<size_t>(t[2])] -
                                    m.vertices[static_cast<size_t>(t[0])]);
    for (int v : t) seedNormal[static_cast<size_t>(v)] += an;
  }

  for (int v = 0; v < nv; ++v) {
    Eigen::Vector3d n = seedNormal[static_cast<size_t>(v)].normalized();
    std::vector<int> nbhd = m.ring(v, 2);
    Eigen::Matrix<double, 3, 2> t = frame_for_normal(n);
    QuadFit fit =
        fit_quadric(project_coords(m, nbhd, v, t), project_heights(m, nbhd, v, n));
    if (!fit.ok) {
      nbhd = m.ring(v, 3);
      fit = fit_quadric(project_coords(m, nbhd, v, t),
                        project_heights(m, nbhd, v, n));
      if (!fit.ok)
        throw GeometryError("curvature fit rank-deficient at vertex " +
                            std::to_string(v));
    }
    // Refine the frame around the fitted normal and refit; the residual
    // gradient after this pass is handled exactly by the metric terms.
    for (int pass = 0; pass < 2; ++pass) {
      Eigen::Vector3d nn =
          (n - fit.grad[0] * t.col(0) - fit.grad[1] * t.col(1)).normalized();
      n = nn;
      t = frame_for_normal(n);
      QuadFit refit = fit_quadric(project_coords(m, nbhd, v, t),
                                  project_heights(m, nbhd, v, n));
      if (!refit.ok) break;
      fit = refit;
    }

    const Eigen::Vector2d g = fit.grad;
    const double w = std::sqrt(1.0 + g.squaredNorm());
    const Eigen::Matrix2d Gis = inv_sqrt_metric(g);
    Eigen::Matrix2d S = -(Gis * (fit.hess / w) * Gis).eval();
    S = 0.5 * (S + S.transpose()).eval();

    c.normal[static_cast<size_t>(v)] =
        (n - g[0] * t.col(0) - g[1] * t.col(1)) / w;
    Eigen::Matrix<double, 3, 2> u;
    u.col(0) = t.col(0) + g[0] * n;
    u.col(1) = t.col(1) + g[1] * n;
    c.frame[static_cast<size_t>(v)] = u * Gis;
    c.shape[static_cast<size_t>(v)] = S;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
    c.k1[v] = es.eigenvalues()[1];
    c.k2[v] = es.eigenvalues()[0];
    c.H[v] = 0.5 * (c.k1[v] + c.k2[v]);
    c.sff2[v] = c.k1[v] * c.k1[v] + c.k2[v] * c.k2[v];

    c.fitNeighborhood[static_cast<size_t>(v)] = std::move(nbhd);
    c.fitCoords[static_cast<size_t>(v)] =
        project_coords(m, c.fitNeighborhood[static_cast<size_t>(v)], v, t);
    c.surfGrad[static_cast<size_t>(v)] = g;
    c.surfHess[static_cast<size_t>(v)] = fit.hess;
  }

  // Angle defects: Gauss-Bonnet is then exact by construction.
  Eigen::VectorXd angleSum = Eigen::VectorXd::Zero(nv);
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d& a = m.vertices[static_cast<size_t>(t[k])];
      Eigen::Vector3d e1 = m.vertices[static_cast<size_t>(t[(k + 1) % 3])] - a;
      Eigen::Vector3d e2 = m.vertices[static_cast<size_t>(t[(k + 2) % 3])] - a;
      angleSum[t[k]] += std::atan2(e1.cross(e2).norm(), e1.dot(e2));
    }
  }
  for (int v = 0; v < nv; ++v) {
    double defect = (m.boundaryVertex[static_cast<size_t>(v)]
                         ? std::numbers::pi
                         : 2.0 * std::numbers::pi) -
                    angleSum[v];
    c.K[v] = defect / dv.vertexArea[v];
    c.scal[v] = 2.0 * c.K[v];
  }

  // Cotangent cross-check of H: the stiffness applied to the positions is
  // n H times the dual area along the normal (interior vertices only).
  std::vector<Eigen::Vector3d> lapPos(static_cast<size_t>(nv),
                                      Eigen::Vector3d::Zero());
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3], o = t[(k + 2) % 3];
      Eigen::Vector3d ea = m.vertices[static_cast<size_t>(a)] -
                           m.vertices[static_cast<size_t>(o)];
      Eigen::Vector3d eb = m.vertices[static_cast<size_t>(b)] -
                           m.vertices[static_cast<size_t>(o)];
      double cot = ea.dot(eb) / ea.cross(eb).norm();
      Eigen::Vector3d diff = m.vertices[static_cast<size_t>(a)] -
                             m.vertices[static_cast<size_t>(b)];
      lapPos[static_cast<size_t>(a)] += 0.5 * cot * diff;
      lapPos[static_cast<size_t>(b)] -= 0.5 * cot * diff;
    }
  }
  for (int v = 0; v < nv; ++v)
    c.Hcot[v] = m.boundaryVertex[static_cast<size_t>(v)]
                    ? c.H[v]
                    : lapPos[static_cast<size_t>(v)].dot(
                          c.normal[static_cast<size_t>(v)]) /
                          (2.0 * dv.vertexArea[v]);
  return c;
}

double gamma_m(const SurfaceMesh& m, const CurvatureField& c) {
  double g = -std::numeric_limits<double>::infinity();
  for (int v = 0; v < m.nV(); ++v) {
    g = std::max(g, c.k1[v] * c.k2[v]);
    if (!m.boundaryVertex[static_cast<size_t>(v)]) g = std::max(g, c.K[v]);
  }
  return g;
}

std::vector<FormEndo> sff_on_forms(const CurvatureField& c, int p) {
  std::vector<FormEndo> out;
  out.reserve(c.shape.size());
  for (const auto& S : c.shape) out.push_back(extend_endo(S, p));
  return out;
}

std::vector<FormEndo> bochner_ext(const CurvatureField& c, int p) {
  std::vector<FormEndo> out;
  out.reserve(c.shape.size());
  for (size_t v = 0; v < c.shape.size(); ++v) {
    FormEndo Sp = extend_endo(c.shape[v], p);
    out.push_back(2.0 * c.H[static_cast<int>(v)] * Sp - Sp * Sp);
  }
  return out;
}

ScalarJet fit_scalar_jet(const CurvatureField& c,
                         const Eigen::VectorXd& samples, int v) {
  const auto& nbhd = c.fitNeighborhood[static_cast<size_t>(v)];
  Eigen::VectorXd rhs(nbhd.size());
  for (size_t i = 0; i < nbhd.size(); ++i)
    rhs[static_cast<int>(i)] = samples[nbhd[i]] - samples[v];
  QuadFit fit = fit_quadric(c.fitCoords[static_cast<size_t>(v)], rhs);
  if (!fit.ok)
    throw GeometryError("scalar jet fit failed at vertex " +
                        std::to_string(v));
  const Eigen::Vector2d& g = c.surfGrad[static_cast<size_t>(v)];
  Eigen::Matrix2d G = Eigen::Matrix2d::Identity() + g * g.transpose();
  Eigen::Matrix2d Gis = inv_sqrt_metric(g);
  // Covariant Hessian: the only Christoffel term of the graph chart is
  // h_ij * <grad h, grad u> with both gradients index-raised by G.
  Eigen::Matrix2d Hcov =
      fit.hess -
      c.surfHess[static_cast<size_t>(v)] * (g.dot(G.inverse() * fit.grad));
  ScalarJet jet;
  jet.grad = Gis * fit.grad;
  jet.hess = (Gis * Hcov * Gis).eval();
  jet.hess = 0.5 * (jet.hess + jet.hess.transpose()).eval();
  return jet;
}

}  // namespace sgt
