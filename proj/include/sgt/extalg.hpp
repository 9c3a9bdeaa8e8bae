#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace sgt {

// Pointwise exterior algebra over an n-dimensional inner product space.
// A p-form is a coefficient vector against the basis of increasing
// multi-indices, ordered lexicographically: for n=4, p=2 the basis is
// e12, e13, e14, e23, e24, e34. Indices in error messages are 1-based to
// match that naming; internally bitmasks over 0..n-1 are used.
//
// n is capped at 8: the fibers needed here are tiny (surfaces have n=2,
// ambient frames n=3) and C(n,p) growth past that is never exercised.

inline constexpr int kMaxDim = 8;

long binomial(int n, int k);

struct ExtAlgError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Basis bookkeeping for (n,p): the list of index masks in lexicographic
// order and the inverse lookup mask -> position.
class FormBasis {
 public:
  FormBasis(int n, int p);

  int n() const { return n_; }
  int p() const { return p_; }
  int dim() const { return static_cast<int>(masks_.size()); }
  unsigned mask(int i) const { return masks_[static_cast<size_t>(i)]; }
  int position(unsigned mask) const { return lookup_[mask]; }

 private:
  int n_ = 0, p_ = 0;
  std::vector<unsigned> masks_;
  std::vector<int> lookup_;  // size 2^n, -1 where popcount != p
};

struct PForm {
  PForm(int n, int p);
  static PForm basisForm(int n, int p, int position);

  int n = 0;
  int p = 0;
  Eigen::VectorXd c;  // length C(n,p)

  double norm2() const { return c.squaredNorm(); }
};

// Symmetric n x n endomorphism of the underlying space (shape operators,
// Hessians) and its action lifted to p-form coefficients.
using SymEndo = Eigen::MatrixXd;
using FormEndo = Eigen::MatrixXd;

// Exterior product with multi-index sign bookkeeping.
PForm wedge(const PForm& a, const PForm& b);

// Contraction v ⌟ a in the first slot; adjoint of wedging with the metric
// dual of v.
PForm interior(const Eigen::VectorXd& v, const PForm& a);

// Derivation extension A^[p] of a symmetric endomorphism:
//   (A^[p] w)(X_1,...,X_p) = sum_k w(X_1,...,A X_k,...,X_p).
// Its eigenvalues are the sums of p distinct eigenvalues of A.
FormEndo extend_endo(const SymEndo& A, int p);

// Evaluation of a p-form on p vectors (minor determinants); used by tests
// and by the frame-sum checks below.
double evaluate(const PForm& a, const std::vector<Eigen::VectorXd>& args);

// Combinatorial frame identities for a Parseval frame {u_i}: a family of
// vectors in R^n with sum_i u_i u_i^T = Id (e.g. tangential projections of
// the ambient coordinate basis on an embedded surface). Checks
//   sum over tuples |u_{i_1} ^ ... ^ u_{i_p}|^2        = p! C(n,p)
//   sum over tuples |X ⌟ (u_{i_1} ^ ... ^ u_{i_p})|^2  = p! C(n-1,p-1) |X|^2
// where tuples run over all ordered p-tuples of frame indices.
struct FrameSumReport {
  double wedge_sum = 0;
  double wedge_predicted = 0;
  double interior_sum = 0;
  double interior_predicted = 0;
  double gram_deviation = 0;  // max-norm of (sum u_i u_i^T - Id)
};

FrameSumReport frame_sum_checks(int n, int p,
                                const std::vector<Eigen::VectorXd>& frame,
                                const Eigen::VectorXd& X,
                                double gram_tolerance = 1e-8);

}  // namespace sgt
