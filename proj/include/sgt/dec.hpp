#pragma once

#include <Eigen/Sparse>

#include "sgt/mesh.hpp"
#include "sgt/weights.hpp"

#include <array>

namespace sgt {

struct DecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using SpMat = Eigen::SparseMatrix<double>;

// Discrete weighted exterior calculus on a triangulated surface. The
// codifferential is defined as the exact adjoint of d in the weighted
// inner products, so every Laplacian here is symmetric positive
// semidefinite by construction; the continuum identity delta_f = delta +
// df contraction is a convergence property checked in tests, not an
// assembly-time definition.
struct DecOperators {
  SpMat d0;  // E x V signed incidence, -1 at the lower vertex index
  SpMat d1;  // F x E, +1 where the face traverses the edge low-to-high

  std::array<Eigen::VectorXd, 3> star;      // unweighted diagonal stars
  std::array<Eigen::VectorXd, 3> starF;     // e^{-f} weighted stars
  std::array<Eigen::VectorXd, 3> fSimplex;  // f sampled per p-simplex

  // Weighted Laplacian stiffness per degree, against mass starF[p]:
  //   L0 = d0^T Wf1 d0
  //   L1 = d1^T Wf2 d1 + Wf1 d0 Wf0^{-1} d0^T Wf1
  //   L2 = Wf2 d1 Wf1^{-1} d1^T Wf2
  std::array<SpMat, 3> L;
  // Up (exterior-derivative) parts alone: Lup[p] = d_p^T Wf_{p+1} d_p.
  std::array<SpMat, 2> Lup;

  int dim(int p) const { return static_cast<int>(starF[static_cast<size_t>(p)].size()); }
};

DecOperators assemble(const SurfaceMesh& m, const DualVolumes& dv,
                      const WeightField& w);

// d applied to p-form coefficients (p = 0 or 1).
Eigen::VectorXd differential(const DecOperators& ops, int p,
                             const Eigen::VectorXd& x);
// delta_f applied to p-form coefficients (p = 1 or 2).
Eigen::VectorXd codifferential(const DecOperators& ops, int p,
                               const Eigen::VectorXd& x);

// Gauge-transformed calculus: dt_p = S_{p+1} d_p S_p^{-1} with
// S_p = diag(e^{f_p/2}). The assembled twisted Laplacians satisfy
// Lt_p = S_p^{-1} L_p(f=0) S_p^{-1} exactly, which makes the pair
// (Lt_p, starF[p]) isospectral to the unweighted pair by congruence.
struct TwistedOperators {
  std::array<Eigen::VectorXd, 3> S;
  std::array<Eigen::VectorXd, 3> starF;
  std::array<SpMat, 3> L;
};

TwistedOperators assemble_twisted(const SurfaceMesh& m, const DualVolumes& dv,
                                  const WeightField& w);

// A symmetric stiffness/mass pair over an explicit simplex subset.
struct OperatorPair {
  SpMat L;
  Eigen::VectorXd W;
  std::vector<int> dofs;  // original p-simplex index per row

  int dim() const { return static_cast<int>(W.size()); }
};

OperatorPair full_pair(const DecOperators& ops, int p);
OperatorPair twisted_pair(const TwistedOperators& ops, int p);

// Rows and columns restricted to the domain's interior p-simplices,
// imposing the homogeneous Dirichlet condition on the rim.
OperatorPair dirichlet_restrict(const DecOperators& ops, const DomainMesh& dom,
                                int p);

}  // namespace sgt
