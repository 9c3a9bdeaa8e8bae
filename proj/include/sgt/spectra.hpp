#pragma once

#include "sgt/dec.hpp"

#include <string>
#include <vector>

namespace sgt {

struct SpectraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolveMethod { Auto, Lanczos, Dense };

enum class FormClass { Harmonic, Exact, CoExact, Mixed };

const char* to_string(FormClass c);

struct SpectrumResult {
  int p = -1;
  Eigen::VectorXd eigenvalues;   // ascending, with multiplicity
  Eigen::MatrixXd eigenvectors;  // columns, orthonormal in the W inner product
  Eigen::VectorXd solveResidual; // ||Lx - lambda Wx|| / scale, per pair

  // Filled by classify():
  std::vector<FormClass> tags;
  Eigen::VectorXd residualD;      // ||d w||_Wf
  Eigen::VectorXd residualDelta;  // ||delta_f w||_Wf

  int kernelDim = 0;
  double kernelTol = 0;
  std::string method;
  double shift = 0;

  int k() const { return static_cast<int>(eigenvalues.size()); }
};

// k smallest eigenpairs of the symmetric pair (L, W), W positive diagonal.
// Dense is the brute-force oracle (dimension capped at 2000); Lanczos is
// shift-invert with a sparse factorization, full reorthogonalization, and
// a deterministic seeded start. Auto picks dense for small pairs.
SpectrumResult solve(const OperatorPair& pair, int k,
                     SolveMethod method = SolveMethod::Auto,
                     unsigned seed = 12345u);

// Tags each eigenvector harmonic/exact/co-exact/mixed using the residuals
// of d and delta_f, after rotating each degenerate eigenvalue cluster to
// diagonalize the ||d w||^2 form (which makes the split deterministic).
// The pair must come from ops at degree p (restricted pairs welcome; the
// vectors are extended by zero onto the full complex).
void classify(SpectrumResult& res, const DecOperators& ops,
              const OperatorPair& pair, int p, double tol = 1e-6);

// Smallest positive eigenvalue among exact p-eigenforms, computed on the
// side of the complex where the kernel is small: the function Laplacian
// for p = 1, the top-degree (pure d delta_f) Laplacian for p = 2.
double first_exact_eigenvalue(const DecOperators& ops, const DomainMesh& dom,
                              int p, SolveMethod method = SolveMethod::Auto,
                              unsigned seed = 12345u);

// Kernel dimension of (L_p, W_p^f) with a scale-free tolerance; errors if
// the spectral gap above the kernel is too weak to trust the count.
int f_betti(const DecOperators& ops, int p,
            SolveMethod method = SolveMethod::Auto, unsigned seed = 12345u);

// Signed inertia: the number of eigenvalues of the pencil (A, W) below
// zero, by Sylvester's law via a sparse LDLT of A. Exact integer output.
int negative_inertia(const SpMat& A, const Eigen::VectorXd& W);

}  // namespace sgt
