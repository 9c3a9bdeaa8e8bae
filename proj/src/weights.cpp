#include "sgt/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

namespace sgt {

namespace {

Eigen::VectorXd cotan_laplacian_apply(const SurfaceMesh& m,
                                      const Eigen::VectorXd& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.nV());
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3], o = t[(k + 2) % 3];
      Eigen::Vector3d ea = m.vertices[static_cast<size_t>(a)] -
                           m.vertices[static_cast<size_t>(o)];
      Eigen::Vector3d eb = m.vertices[static_cast<size_t>(b)] -
                           m.vertices[static_cast<size_t>(o)];
      double cot = ea.dot(eb) / ea.cross(eb).norm();
      double diff = 0.5 * cot * (u[a] - u[b]);
      out[a] += diff;
      out[b] -= diff;
    }
  }
  return out;
}

// Gradient of the linear interpolant on each face.
std::vector<Eigen::Vector3d> face_gradients(const SurfaceMesh& m,
                                            const Eigen::VectorXd& u) {
  std::vector<Eigen::Vector3d> g(static_cast<size_t>(m.nF()));
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    const Eigen::Vector3d& pa = m.vertices[static_cast<size_t>(t[0])];
    const Eigen::Vector3d& pb = m.vertices[static_cast<size_t>(t[1])];
    const Eigen::Vector3d& pc = m.vertices[static_cast<size_t>(t[2])];
    Eigen::Vector3d nrm = (pb - pa).cross(pc - pa);
    double twoA = nrm.norm();
    nrm /= twoA;
    g[static_cast<size_t>(f)] =
        nrm.cross(u[t[0]] * (pc - pb) + u[t[1]] * (pa - pc) +
                  u[t[2]] * (pb - pa)) /
        twoA;
  }
  return g;
}

void numeric_derived_fields(const SurfaceMesh& m, const CurvatureField& c,
                            WeightField& w) {
  DualVolumes dv = dual_volumes(m);
  w.faceGrad = face_gradients(m, w.f);
  w.gradNorm2 = Eigen::VectorXd::Zero(m.nV());
  w.gradFrame.assign(static_cast<size_t>(m.nV()), Eigen::Vector2d::Zero());
  std::vector<Eigen::Vector3d> gradAvg(static_cast<size_t>(m.nV()),
                                       Eigen::Vector3d::Zero());
  for (int f = 0; f < m.nF(); ++f)
    for (int v : m.faces[static_cast<size_t>(f)]) {
      w.gradNorm2[v] += dv.faceArea[f] / 3.0 *
                        w.faceGrad[static_cast<size_t>(f)].squaredNorm();
      gradAvg[static_cast<size_t>(v)] +=
          dv.faceArea[f] / 3.0 * w.faceGrad[static_cast<size_t>(f)];
    }
  for (int v = 0; v < m.nV(); ++v) {
    w.gradNorm2[v] /= dv.vertexArea[v];
    w.gradFrame[static_cast<size_t>(v)] =
        c.frame[static_cast<size_t>(v)].transpose() *
        (gradAvg[static_cast<size_t>(v)] / dv.vertexArea[v]);
  }
  Eigen::VectorXd lap = cotan_laplacian_apply(m, w.f);
  w.lapF = lap.cwiseQuotient(dv.vertexArea);
  w.hess.resize(static_cast<size_t>(m.nV()));
  for (int v = 0; v < m.nV(); ++v)
    w.hess[static_cast<size_t>(v)] = fit_scalar_jet(c, w.f, v).hess;
}

}  // namespace

WeightField zero_weight(const SurfaceMesh& m, const CurvatureField& c) {
  (void)c;
  WeightField w;
  w.kind = WeightKind::Zero;
  w.f = Eigen::VectorXd::Zero(m.nV());
  w.faceGrad.assign(static_cast<size_t>(m.nF()), Eigen::Vector3d::Zero());
  w.gradNorm2 = Eigen::VectorXd::Zero(m.nV());
  w.lapF = Eigen::VectorXd::Zero(m.nV());
  w.hess.assign(static_cast<size_t>(m.nV()), Eigen::Matrix2d::Zero());
  w.gradFrame.assign(static_cast<size_t>(m.nV()), Eigen::Vector2d::Zero());
  return w;
}

WeightField radial_weight(const SurfaceMesh& m, const CurvatureField& c,
                          double a) {
  if (!(a > 0)) throw WeightError("radial weight needs a > 0");
  WeightField w;
  w.kind = WeightKind::Radial;
  w.a = a;
  const int nv = m.nV();
  w.f.resize(nv);
  for (int v = 0; v < nv; ++v)
    w.f[v] = 0.5 * a * m.vertices[static_cast<size_t>(v)].squaredNorm();

  w.faceGrad.resize(static_cast<size_t>(m.nF()));
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    Eigen::Vector3d bary = (m.vertices[static_cast<size_t>(t[0])] +
                            m.vertices[static_cast<size_t>(t[1])] +
                            m.vertices[static_cast<size_t>(t[2])]) /
                           3.0;
    Eigen::Vector3d nrm = (m.vertices[static_cast<size_t>(t[1])] -
                           m.vertices[static_cast<size_t>(t[0])])
                              .cross(m.vertices[static_cast<size_t>(t[2])] -
                                     m.vertices[static_cast<size_t>(t[0])])
                              .normalized();
    w.faceGrad[static_cast<size_t>(f)] = a * (bary - bary.dot(nrm) * nrm);
  }

  w.gradNorm2.resize(nv);
  w.lapF.resize(nv);
  w.hess.resize(static_cast<size_t>(nv));
  w.hessNumeric.resize(static_cast<size_t>(nv));
  w.gradFrame.resize(static_cast<size_t>(nv));
  for (int v = 0; v < nv; ++v) {
    const Eigen::Vector3d& X = m.vertices[static_cast<size_t>(v)];
    double xn = X.dot(c.normal[static_cast<size_t>(v)]);
    w.gradNorm2[v] = a * a * (X.squaredNorm() - xn * xn);
    w.lapF[v] = a * (-2.0 + 2.0 * c.H[v] * xn);
    w.hess[static_cast<size_t>(v)] =
        a * (Eigen::Matrix2d::Identity() - xn * c.shape[static_cast<size_t>(v)]);
    w.gradFrame[static_cast<size_t>(v)] =
        a * (c.frame[static_cast<size_t>(v)].transpose() * X);
    w.hessNumeric[static_cast<size_t>(v)] = fit_scalar_jet(c, w.f, v).hess;
  }
  return w;
}

WeightField custom_weight(const SurfaceMesh& m, const CurvatureField& c,
                          const Eigen::VectorXd& samples) {
  if (samples.size() != m.nV())
    throw WeightError("custom weight sample count mismatch");
  if (!samples.allFinite())
    throw WeightError("custom weight has non-finite samples");
  WeightField w;
  w.kind = WeightKind::Custom;
  w.f = samples;
  numeric_derived_fields(m, c, w);
  return w;
}

double comparison_Hl(double l, double r) {
  if (l > 0) {
    double s = std::sqrt(l);
    return s * std::cos(s * r) / std::sin(s * r);
  }
  if (l < 0) {
    double s = std::sqrt(-l);
    return s / std::tanh(s * r);
  }
  return 1.0 / r;
}

std::pair<WeightField, ComparisonData> distance_weight(
    const SurfaceMesh& m, const CurvatureField& c, int basePoint, double a,
    const CurvatureBounds& bounds) {
  if (!(a > 0)) throw WeightError("distance weight needs a > 0");
  if (basePoint < 0 || basePoint >= m.nV())
    throw WeightError("base point out of range");

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(m.nV(), inf);
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[basePoint] = 0;
  heap.emplace(0.0, basePoint);
  while (!heap.empty()) {
    auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    for (int e : m.vertexEdges[static_cast<size_t>(v)]) {
      const auto& ev = m.edges[static_cast<size_t>(e)];
      int u = ev[0] == v ? ev[1] : ev[0];
      double len = (m.vertices[static_cast<size_t>(u)] -
                    m.vertices[static_cast<size_t>(v)])
                       .norm();
      if (dist[v] + len < dist[u]) {
        dist[u] = dist[v] + len;
        heap.emplace(dist[u], u);
      }
    }
  }
  if (!dist.allFinite())
    throw WeightError("mesh is disconnected from the base point");

  WeightField w;
  w.kind = WeightKind::Distance;
  w.a = a;
  w.f = 0.5 * a * dist.cwiseProduct(dist);
  numeric_derived_fields(m, c, w);

  ComparisonData cd;
  cd.basePoint = basePoint;
  cd.a = a;
  cd.bounds = bounds;
  cd.dist = dist;
  auto eval = [&](double l) {
    Eigen::VectorXd out(m.nV());
    for (int v = 0; v < m.nV(); ++v)
      out[v] = dist[v] < 1e-12 ? 1.0 : dist[v] * comparison_Hl(l, dist[v]);
    return out;
  };
  cd.dHl_ricci = eval(bounds.l);
  cd.dHl_sec1 = eval(bounds.l1);
  cd.dHl_sec2 = eval(bounds.l2);
  cd.singular.assign(static_cast<size_t>(m.nV()), 0);
  double lmax = bounds.sectional ? std::max(bounds.l1, bounds.l2) : bounds.l;
  if (lmax > 0) {
    double rlim = std::numbers::pi / std::sqrt(lmax);
    for (int v = 0; v < m.nV(); ++v)
      if (dist[v] >= rlim - 1e-9) {
        cd.singular[static_cast<size_t>(v)] = 1;
        ++cd.numSingular;
      }
  }
  double minAngle = std::numbers::pi;
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e1 = m.vertices[static_cast<size_t>(t[(k + 1) % 3])] -
                           m.vertices[static_cast<size_t>(t[k])];
      Eigen::Vector3d e2 = m.vertices[static_cast<size_t>(t[(k + 2) % 3])] -
                           m.vertices[static_cast<size_t>(t[k])];
      minAngle =
          std::min(minAngle, std::atan2(e1.cross(e2).norm(), e1.dot(e2)));
    }
  }
  cd.stretchBound = 1.0 / std::sin(minAngle);
  return {std::move(w), std::move(cd)};
}

std::vector<FormEndo> t_f_on_forms(const WeightField& w, int p) {
  std::vector<FormEndo> out;
  out.reserve(w.hess.size());
  for (const auto& h : w.hess) out.push_back(extend_endo(h, p));
  if (w.kind == WeightKind::Radial && !w.hessNumeric.empty()) {
    // The stored Hessian is the closed form a(Id + II_{X^N}); the refit of
    // the sampled f must reproduce it, otherwise the curvature estimates
    // and the weight disagree about the geometry. Coarse meshes put large
    // but converging errors on their worst vertices, while a formula or
    // sign mistake shifts every vertex by order one, so the guard compares
    // the mean deviation (plus a loose per-vertex cap for garbage values).
    double devSum = 0;
    for (size_t v = 0; v < w.hess.size(); ++v) {
      FormEndo numeric = extend_endo(w.hessNumeric[v], p);
      double scale = std::max(w.a * std::max(p, 1),
                              out[v].cwiseAbs().maxCoeff());
      double dev = (numeric - out[v]).cwiseAbs().maxCoeff() / scale;
      if (dev > 2.0)
        throw WeightError(
            "radial Hessian closed form and numeric refit disagree at "
            "vertex " +
            std::to_string(v));
      devSum += dev;
    }
    if (devSum > 0.6 * static_cast<double>(w.hess.size()))
      throw WeightError(
          "radial Hessian closed form and numeric refit disagree across "
          "the mesh");
  }
  return out;
}

Eigen::VectorXd scal_f(const CurvatureField& c, const WeightField& w) {
  return c.scal - w.lapF;
}

Eigen::VectorXd load_weight_samples(const std::string& path, int nV) {
  std::ifstream in(path);
  if (!in) throw WeightError("cannot open weight file " + path);
  Eigen::VectorXd samples = Eigen::VectorXd::Zero(nV);
  std::vector<char> seen(static_cast<size_t>(nV), 0);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    long idx = 0;
    double value = 0;
    if (!(ls >> idx)) continue;  // blank or comment line
    if (!(ls >> value))
      throw WeightError("bad weight row at line " + std::to_string(lineno));
    if (idx < 0 || idx >= nV)
      throw WeightError("weight vertex index " + std::to_string(idx) +
                        " out of range at line " + std::to_string(lineno));
    samples[static_cast<int>(idx)] = value;
    seen[static_cast<size_t>(idx)] = 1;
  }
  if (std::count(seen.begin(), seen.end(), 1) != nV)
    throw WeightError("weight file does not cover every vertex");
  return samples;
}

}  // namespace sgt
