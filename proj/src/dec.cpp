#include "sgt/dec.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace sgt {

namespace {

void check_weight_magnitude(const WeightField& w) {
  double m = w.f.size() ? w.f.cwiseAbs().maxCoeff() : 0.0;
  if (m > 700.0)
    throw DecError("weight magnitude " + std::to_string(m) +
                   " overflows the exponential scalings; rescale f");
}

Eigen::VectorXd sample_on_edges(const SurfaceMesh& m,
                                const Eigen::VectorXd& f) {
  Eigen::VectorXd out(m.nE());
  for (int e = 0; e < m.nE(); ++e) {
    const auto& ev = m.edges[static_cast<size_t>(e)];
    out[e] = 0.5 * (f[ev[0]] + f[ev[1]]);
  }
  return out;
}

Eigen::VectorXd sample_on_faces(const SurfaceMesh& m,
                                const Eigen::VectorXd& f) {
  Eigen::VectorXd out(m.nF());
  for (int fc = 0; fc < m.nF(); ++fc) {
    const auto& t = m.faces[static_cast<size_t>(fc)];
    out[fc] = (f[t[0]] + f[t[1]] + f[t[2]]) / 3.0;
  }
  return out;
}

SpMat incidence_d0(const SurfaceMesh& m) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(2 * m.nE()));
  for (int e = 0; e < m.nE(); ++e) {
    const auto& ev = m.edges[static_cast<size_t>(e)];
    trips.emplace_back(e, ev[0], -1.0);
    trips.emplace_back(e, ev[1], 1.0);
  }
  SpMat d0(m.nE(), m.nV());
  d0.setFromTriplets(trips.begin(), trips.end());
  return d0;
}

SpMat incidence_d1(const SurfaceMesh& m) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(3 * m.nF()));
  for (int f = 0; f < m.nF(); ++f) {
    const auto& t = m.faces[static_cast<size_t>(f)];
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      trips.emplace_back(f, m.edgeIndex(a, b), a < b ? 1.0 : -1.0);
    }
  }
  SpMat d1(m.nF(), m.nE());
  d1.setFromTriplets(trips.begin(), trips.end());
  return d1;
}

SpMat diag_sparse(const Eigen::VectorXd& v) {
  SpMat d(v.size(), v.size());
  d.reserve(Eigen::VectorXi::Constant(static_cast<int>(v.size()), 1));
  for (int i = 0; i < v.size(); ++i) d.insert(i, i) = v[i];
  d.makeCompressed();
  return d;
}

void check_positive_stars(const std::array<Eigen::VectorXd, 3>& s,
                          const char* what) {
  for (int p = 0; p < 3; ++p)
    if (s[static_cast<size_t>(p)].size() &&
        s[static_cast<size_t>(p)].minCoeff() <= 0.0)
      throw DecError(std::string(what) + " has a non-positive entry at degree " +
                     std::to_string(p));
}

}  // namespace

DecOperators assemble(const SurfaceMesh& m, const DualVolumes& dv,
                      const WeightField& w) {
  check_weight_magnitude(w);
  DecOperators ops;
  ops.d0 = incidence_d0(m);
  ops.d1 = incidence_d1(m);

  ops.star[0] = dv.vertexArea;
  ops.star[1] = dv.edgeDualLength.cwiseQuotient(dv.edgePrimalLength);
  ops.star[2] = dv.faceArea.cwiseInverse();
  ops.fSimplex[0] = w.f;
  ops.fSimplex[1] = sample_on_edges(m, w.f);
  ops.fSimplex[2] = sample_on_faces(m, w.f);
  for (int p = 0; p < 3; ++p)
    ops.starF[static_cast<size_t>(p)] =
        ops.star[static_cast<size_t>(p)].cwiseProduct(
            (-ops.fSimplex[static_cast<size_t>(p)]).array().exp().matrix());
  check_positive_stars(ops.star, "unweighted star");
  check_positive_stars(ops.starF, "weighted star");

  SpMat Wf0 = diag_sparse(ops.starF[0]);
  SpMat Wf1 = diag_sparse(ops.starF[1]);
  SpMat Wf2 = diag_sparse(ops.starF[2]);
  SpMat Wf0i = diag_sparse(ops.starF[0].cwiseInverse());
  SpMat Wf1i = diag_sparse(ops.starF[1].cwiseInverse());

  ops.Lup[0] = ops.d0.transpose() * Wf1 * ops.d0;
  ops.Lup[1] = ops.d1.transpose() * Wf2 * ops.d1;
  ops.L[0] = ops.Lup[0];
  ops.L[1] = ops.Lup[1] +
             Wf1 * ops.d0 * Wf0i * ops.d0.transpose() * Wf1;
  ops.L[2] = Wf2 * ops.d1 * Wf1i * ops.d1.transpose() * Wf2;
  return ops;
}

Eigen::VectorXd differential(const DecOperators& ops, int p,
                             const Eigen::VectorXd& x) {
  if (p == 0) return ops.d0 * x;
  if (p == 1) return ops.d1 * x;
  throw DecError("differential defined for p = 0, 1");
}

Eigen::VectorXd codifferential(const DecOperators& ops, int p,
                               const Eigen::VectorXd& x) {
  if (p == 1)
    return (ops.d0.transpose() * ops.starF[1].cwiseProduct(x))
        .cwiseQuotient(ops.starF[0]);
  if (p == 2)
    return (ops.d1.transpose() * ops.starF[2].cwiseProduct(x))
        .cwiseQuotient(ops.starF[1]);
  throw DecError("codifferential defined for p = 1, 2");
}

TwistedOperators assemble_twisted(const SurfaceMesh& m, const DualVolumes& dv,
                                  const WeightField& w) {
  check_weight_magnitude(w);
  SpMat d0 = incidence_d0(m);
  SpMat d1 = incidence_d1(m);

  TwistedOperators tw;
  std::array<Eigen::VectorXd, 3> star{
      dv.vertexArea, dv.edgeDualLength.cwiseQuotient(dv.edgePrimalLength),
      dv.faceArea.cwiseInverse()};
  std::array<Eigen::VectorXd, 3> fS{Eigen::VectorXd(w.f),
                                    sample_on_edges(m, w.f),
                                    sample_on_faces(m, w.f)};
  for (int p = 0; p < 3; ++p) {
    tw.S[static_cast<size_t>(p)] =
        (0.5 * fS[static_cast<size_t>(p)]).array().exp().matrix();
    tw.starF[static_cast<size_t>(p)] = star[static_cast<size_t>(p)].cwiseProduct(
        (-fS[static_cast<size_t>(p)]).array().exp().matrix());
  }
  check_positive_stars(tw.starF, "weighted star");

  // dt_p = S_{p+1} d_p S_p^{-1}, realized by explicit row/column scaling.
  SpMat dt0 = diag_sparse(tw.S[1]) * d0 * diag_sparse(tw.S[0].cwiseInverse());
  SpMat dt1 = diag_sparse(tw.S[2]) * d1 * diag_sparse(tw.S[1].cwiseInverse());

  SpMat Wf1 = diag_sparse(tw.starF[1]);
  SpMat Wf2 = diag_sparse(tw.starF[2]);
  SpMat Wf0i = diag_sparse(tw.starF[0].cwiseInverse());
  SpMat Wf1i = diag_sparse(tw.starF[1].cwiseInverse());

  tw.L[0] = dt0.transpose() * Wf1 * dt0;
  tw.L[1] = dt1.transpose() * Wf2 * dt1 +
            Wf1 * dt0 * Wf0i * dt0.transpose() * Wf1;
  tw.L[2] = Wf2 * dt1 * Wf1i * dt1.transpose() * Wf2;
  return tw;
}

OperatorPair full_pair(const DecOperators& ops, int p) {
  OperatorPair pair;
  pair.L = ops.L[static_cast<size_t>(p)];
  pair.W = ops.starF[static_cast<size_t>(p)];
  pair.dofs.resize(static_cast<size_t>(pair.W.size()));
  for (size_t i = 0; i < pair.dofs.size(); ++i)
    pair.dofs[i] = static_cast<int>(i);
  return pair;
}

OperatorPair twisted_pair(const TwistedOperators& ops, int p) {
  OperatorPair pair;
  pair.L = ops.L[static_cast<size_t>(p)];
  pair.W = ops.starF[static_cast<size_t>(p)];
  pair.dofs.resize(static_cast<size_t>(pair.W.size()));
  for (size_t i = 0; i < pair.dofs.size(); ++i)
    pair.dofs[i] = static_cast<int>(i);
  return pair;
}

OperatorPair dirichlet_restrict(const DecOperators& ops, const DomainMesh& dom,
                                int p) {
  const std::vector<int>* keep = nullptr;
  if (p == 0) keep = &dom.interiorVertices;
  else if (p == 1) keep = &dom.interiorEdges;
  else if (p == 2) keep = &dom.interiorFaces;
  else throw DecError("degree out of range");
  if (keep->empty())
    throw DecError("domain has no interior simplices of degree " +
                   std::to_string(p));

  const SpMat& L = ops.L[static_cast<size_t>(p)];
  std::vector<int> newIndex(static_cast<size_t>(L.rows()), -1);
  for (size_t i = 0; i < keep->size(); ++i)
    newIndex[static_cast<size_t>((*keep)[i])] = static_cast<int>(i);

  OperatorPair pair;
  pair.dofs = *keep;
  pair.W.resize(static_cast<int>(keep->size()));
  for (size_t i = 0; i < keep->size(); ++i)
    pair.W[static_cast<int>(i)] = ops.starF[static_cast<size_t>(p)][(*keep)[i]];

  std::vector<Eigen::Triplet<double>> trips;
  for (int col = 0; col < L.outerSize(); ++col) {
    int nc = newIndex[static_cast<size_t>(col)];
    if (nc < 0) continue;
    for (SpMat::InnerIterator it(L, col); it; ++it) {
      int nr = newIndex[static_cast<size_t>(it.row())];
      if (nr >= 0) trips.emplace_back(nr, nc, it.value());
    }
  }
  pair.L.resize(static_cast<int>(keep->size()),
                static_cast<int>(keep->size()));
  pair.L.setFromTriplets(trips.begin(), trips.end());
  return pair;
}

}  // namespace sgt
