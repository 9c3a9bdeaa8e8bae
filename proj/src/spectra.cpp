#include "sgt/spectra.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace sgt {

namespace {

constexpr int kDenseCap = 2000;
constexpr int kAutoDenseMax = 800;

double inf_norm(const SpMat& A) {
  Eigen::VectorXd rowsum = Eigen::VectorXd::Zero(A.rows());
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  return rowsum.size() == 0 ? 0.0 : rowsum.maxCoeff();
}

SpMat shifted_matrix(const OperatorPair& pair, double sigma) {
  if (sigma == 0.0) return pair.L;
  const int n = pair.dim();
  SpMat D(n, n);
  D.reserve(Eigen::VectorXi::Constant(n, 1));
  for (int i = 0; i < n; ++i) D.insert(i, i) = sigma * pair.W[i];
  D.makeCompressed();
  return SpMat(pair.L - D);
}

int count_negative(const Eigen::VectorXd& d) {
  const double dmax = d.size() > 0 ? d.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-12 * dmax;
  int neg = 0;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] < -tol) ++neg;
  return neg;
}

// Number of pencil eigenvalues of (L, W) strictly below t, read off the
// inertia of L - tW. Returns -1 when the unpivoted factorization is not
// trustworthy at this t.
int inertia_below(const OperatorPair& pair, double t) {
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted_matrix(pair, t));
  if (ldlt.info() != Eigen::Success) return -1;
  Eigen::VectorXd d = ldlt.vectorD();
  if (!d.allFinite()) return -1;
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0) || d.cwiseAbs().minCoeff() <= 1e-12 * dmax) return -1;
  return count_negative(d);
}

void finalize_kernel(SpectrumResult& r, double lambdaBound) {
  const double rawFloor = 1e-12 * std::max(lambdaBound, 1e-300);
  double sum = 0.0;
  int cnt = 0;
  for (int i = 0; i < r.k() && cnt < 5; ++i) {
    if (r.eigenvalues[i] > rawFloor) {
      sum += r.eigenvalues[i];
      ++cnt;
    }
  }
  r.kernelTol = cnt > 0 ? 1e-8 * (sum / cnt) : rawFloor;
  r.kernelDim = 0;
  while (r.kernelDim < r.k() && r.eigenvalues[r.kernelDim] <= r.kernelTol)
    ++r.kernelDim;
}

SpectrumResult dense_solve(const OperatorPair& pair, int k, double normL,
                           double wMax) {
  const int n = pair.dim();
  Eigen::MatrixXd A(pair.L);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  B.diagonal() = pair.W;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  if (es.info() != Eigen::Success)
    throw SpectraError("dense generalized eigensolver did not converge");
  SpectrumResult r;
  r.eigenvalues = es.eigenvalues().head(k);
  r.eigenvectors = es.eigenvectors().leftCols(k);
  r.method = "dense";
  r.shift = 0.0;
  r.solveResidual.resize(k);
  for (int i = 0; i < k; ++i) {
    const double l = r.eigenvalues[i];
    Eigen::VectorXd u = r.eigenvectors.col(i);
    const double res = (pair.L * u - l * pair.W.cwiseProduct(u)).norm();
    r.solveResidual[i] = res / (normL + std::abs(l) * wMax);
  }
  return r;
}

// Shift-invert Lanczos on B = W^{1/2} (L - sigma W)^{-1} W^{1/2} with full
// reorthogonalization and a deterministic seeded start. Convergence is
// judged on true pencil residuals, and the count below the k-th value is
// certified by an inertia check so degenerate copies cannot be silently
// skipped. Returns false when the factorization breaks down or the basis
// budget runs out, in which case the caller moves to the next shift.
bool lanczos_attempt(const OperatorPair& pair, int k, double sigma,
                     unsigned seed, double normL, double wMax, double wMin,
                     SpectrumResult& out) {
  const int n = pair.dim();
  Eigen::SimplicialLDLT<SpMat> ldlt(shifted_matrix(pair, sigma));
  if (ldlt.info() != Eigen::Success) return false;
  {
    Eigen::VectorXd d = ldlt.vectorD();
    if (!d.allFinite()) return false;
    const double dmax = d.cwiseAbs().maxCoeff();
    if (!(dmax > 0) || d.minCoeff() <= 1e-12 * dmax) return false;
  }

  const Eigen::VectorXd ws = pair.W.cwiseSqrt();
  const Eigen::VectorXd wis = ws.cwiseInverse();

  const int kk = std::min(n, k + 10);  // converge a buffer past k
  const int mMax = std::min(n, std::max(500, 8 * kk + 80));
  Eigen::MatrixXd V(n, mMax);
  std::vector<double> alpha, beta;
  alpha.reserve(mMax);
  beta.reserve(mMax);

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto random_vec = [&]() {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = unif(rng);
    return v;
  };
  auto reorthogonalize = [&](Eigen::VectorXd& w, int cols) {
    for (int pass = 0; pass < 2; ++pass)
      w.noalias() -= V.leftCols(cols) * (V.leftCols(cols).transpose() * w);
  };

  {
    Eigen::VectorXd v0 = random_vec();
    V.col(0) = v0 / v0.norm();
  }

  const double resCoeff =
      1e-11 + 100.0 * std::numeric_limits<double>::epsilon() * std::sqrt(double(n));
  const double lamBound = wMin > 0 ? normL / wMin : normL;
  double tScale = 0.0;
  bool exhausted = false;

  for (int j = 0; j < mMax; ++j) {
    Eigen::VectorXd w = ws.cwiseProduct(ldlt.solve(ws.cwiseProduct(V.col(j))));
    if (!w.allFinite()) return false;
    const double a = V.col(j).dot(w);
    alpha.push_back(a);
    const int m = j + 1;
    double lastBeta = 0.0;
    if (m < mMax) {
      w -= a * V.col(j);
      if (j > 0 && beta[static_cast<size_t>(j) - 1] != 0.0)
        w -= beta[static_cast<size_t>(j) - 1] * V.col(j - 1);
      reorthogonalize(w, m);
      const double b = w.norm();
      tScale = std::max({tScale, std::abs(a), b});
      if (b > 1e-13 * std::max(tScale, 1e-300)) {
        beta.push_back(b);
        V.col(m) = w / b;
        lastBeta = b;
      } else {
        // Invariant subspace. Deflate and continue in a fresh direction so
        // remaining eigenvalue copies can still be found.
        Eigen::VectorXd nv = random_vec();
        reorthogonalize(nv, m);
        const double nn = nv.norm();
        if (nn > 1e-6) {
          beta.push_back(0.0);
          V.col(m) = nv / nn;
        } else {
          exhausted = true;
        }
      }
    }

    const bool finalStep = (m == mMax) || exhausted;
    const int interval = m > 150 ? 25 : 10;
    const bool timeToCheck =
        finalStep || (m >= std::max(kk + 2, 20) && m % interval == 0);
    if (!timeToCheck || m < kk) {
      if (finalStep) break;
      continue;
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[static_cast<size_t>(i)];
      if (i + 1 < m) {
        T(i, i + 1) = beta[static_cast<size_t>(i)];
        T(i + 1, i) = beta[static_cast<size_t>(i)];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tes(T);

    // Cheap screen before forming Ritz vectors: the classical bound
    // ||B x - nu x|| = beta_m |s_m| for each candidate.
    bool screened = true;
    for (int i = 0; i < kk && screened; ++i) {
      const int col = m - 1 - i;
      const double nu = tes.eigenvalues()[col];
      if (!(nu > 0)) screened = false;
      if (screened && lastBeta > 0) {
        const double est = lastBeta * std::abs(tes.eigenvectors()(m - 1, col));
        if (est > 1e-8 * std::abs(tes.eigenvalues()[m - 1])) screened = false;
      }
    }
    if (!screened) {
      if (finalStep) break;
      continue;
    }

    Eigen::VectorXd lam(kk);
    Eigen::MatrixXd U(n, kk);
    Eigen::VectorXd rres(kk);
    bool good = true;
    for (int i = 0; i < kk && good; ++i) {
      const int col = m - 1 - i;
      const double nu = tes.eigenvalues()[col];
      const double l = sigma + 1.0 / nu;
      Eigen::VectorXd x = V.leftCols(m) * tes.eigenvectors().col(col);
      Eigen::VectorXd u = wis.cwiseProduct(x) / x.norm();
      const double scale = normL + std::abs(l) * wMax;
      const double res = (pair.L * u - l * pair.W.cwiseProduct(u)).norm();
      if (res > resCoeff * scale) {
        good = false;
        break;
      }
      lam[i] = l;
      U.col(i) = u;
      rres[i] = res / scale;
    }
    if (!good) {
      if (finalStep) break;
      continue;
    }

    // Certify that nothing below the k-th value was missed: find a spectral
    // gap at or past k and compare the pencil inertia at its midpoint with
    // the number of converged pairs below it.
    bool certified = true;
    for (int j2 = k; j2 < kk; ++j2) {
      const double a2 = lam[j2 - 1], b2 = lam[j2];
      const double gap = b2 - a2;
      if (gap > 1e-7 * std::max({std::abs(a2), std::abs(b2), 1e-9 * lamBound})) {
        const int cnt = inertia_below(pair, 0.5 * (a2 + b2));
        if (cnt >= 0 && cnt != j2) certified = false;
        break;
      }
    }
    if (!certified) {
      if (finalStep) break;
      continue;
    }

    out.eigenvalues = lam.head(k);
    out.eigenvectors = U.leftCols(k);
    out.solveResidual = rres.head(k);
    out.method = "lanczos";
    out.shift = sigma;
    return true;
  }
  return false;
}

Eigen::VectorXd scatter_full(const OperatorPair& pair, int fullDim,
                             const Eigen::VectorXd& u) {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(fullDim);
  for (int i = 0; i < u.size(); ++i) full[pair.dofs[static_cast<size_t>(i)]] = u[i];
  return full;
}

double wf_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& mass) {
  return std::sqrt(std::max(0.0, v.dot(mass.cwiseProduct(v))));
}

// Smallest eigenvalue above the numerical kernel, growing k until one shows.
double first_positive(const OperatorPair& pr, SolveMethod method,
                      unsigned seed) {
  const int n = pr.dim();
  int k = std::min(n, 8);
  for (;;) {
    SpectrumResult r = solve(pr, k, method, seed);
    if (r.kernelDim < r.k()) return r.eigenvalues[r.kernelDim];
    if (k == n)
      throw SpectraError("operator has no positive eigenvalues");
    k = std::min(n, 2 * k + 8);
  }
}

}  // namespace

const char* to_string(FormClass c) {
  switch (c) {
    case FormClass::Harmonic: return "harmonic";
    case FormClass::Exact: return "exact";
    case FormClass::CoExact: return "coexact";
    case FormClass::Mixed: return "mixed";
  }
  return "unknown";
}

SpectrumResult solve(const OperatorPair& pair, int k, SolveMethod method,
                     unsigned seed) {
  const int n = pair.dim();
  if (pair.L.rows() != n || pair.L.cols() != n)
    throw SpectraError("stiffness and mass dimensions disagree");
  if (n == 0) throw SpectraError("empty operator pair");
  if (pair.W.minCoeff() <= 0)
    throw SpectraError("mass diagonal must be positive");
  if (k < 1) throw SpectraError("at least one eigenpair must be requested");
  if (k > n) {
    std::ostringstream msg;
    msg << "requested " << k << " eigenpairs of a dimension-" << n
        << " operator";
    throw SpectraError(msg.str());
  }

  const double normL = inf_norm(pair.L);
  const double wMax = pair.W.maxCoeff();
  const double wMin = pair.W.minCoeff();

  bool dense = false;
  if (method == SolveMethod::Dense) {
    if (n > kDenseCap) {
      std::ostringstream msg;
      msg << "dense solver is capped at dimension " << kDenseCap << ", got "
          << n;
      throw SpectraError(msg.str());
    }
    dense = true;
  } else if (method == SolveMethod::Auto) {
    dense = n <= kAutoDenseMax;
  }

  SpectrumResult r;
  if (dense) {
    r = dense_solve(pair, k, normL, wMax);
  } else {
    const double lamScale = normL > 0 ? normL / wMax : 1.0;
    const double shifts[3] = {0.0, -1e-6 * lamScale, -1e-5 * lamScale};
    bool ok = false;
    for (int attempt = 0; attempt < 3 && !ok; ++attempt) {
      ok = lanczos_attempt(pair, k, shifts[attempt],
                           seed + 1000003u * static_cast<unsigned>(attempt),
                           normL, wMax, wMin, r);
    }
    if (!ok)
      throw SpectraError(
          "iterative eigensolver failed after 3 shifted factorization "
          "attempts");
  }
  finalize_kernel(r, normL > 0 ? normL / wMin : 1.0);
  return r;
}

void classify(SpectrumResult& res, const DecOperators& ops,
              const OperatorPair& pair, int p, double tol) {
  if (p < 0 || p > 2) throw SpectraError("form degree must be 0, 1, or 2");
  const int k = res.k();
  if (res.eigenvectors.cols() != k || res.eigenvectors.rows() != pair.dim())
    throw SpectraError("spectrum does not match the operator pair");
  res.p = p;
  const int fullDim = ops.dim(p);

  std::vector<int> clusterStart;
  for (int i = 0; i < k; ++i) {
    if (i == 0) {
      clusterStart.push_back(0);
      continue;
    }
    const double a = res.eigenvalues[i - 1], b = res.eigenvalues[i];
    if (b - a > 1e-6 * std::max({std::abs(a), std::abs(b), res.kernelTol}))
      clusterStart.push_back(i);
  }
  clusterStart.push_back(k);

  // The image that separates members of a degenerate cluster: d below the
  // top degree, delta_f at the top.
  auto image_vec = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd full = scatter_full(pair, fullDim, u);
    return p < 2 ? differential(ops, p, full) : codifferential(ops, 2, full);
  };
  const Eigen::VectorXd& imgMass = p < 2 ? ops.starF[static_cast<size_t>(p) + 1]
                                         : ops.starF[1];

  // Rotate each degenerate cluster to diagonalize the Gram matrix of the
  // images; this splits the eigenspace into its d-kernel part and its
  // complement, making the classification below deterministic.
  for (size_t c = 0; c + 1 < clusterStart.size(); ++c) {
    const int b0 = clusterStart[c], b1 = clusterStart[c + 1];
    const int sz = b1 - b0;
    if (sz < 2) continue;
    if (res.eigenvalues[b1 - 1] <= res.kernelTol) continue;
    Eigen::MatrixXd img(imgMass.size(), sz);
    for (int i = 0; i < sz; ++i)
      img.col(i) = image_vec(res.eigenvectors.col(b0 + i));
    Eigen::MatrixXd G = img.transpose() * imgMass.asDiagonal() * img;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ges(
        Eigen::MatrixXd(0.5 * (G + G.transpose())));
    res.eigenvectors.middleCols(b0, sz) =
        (res.eigenvectors.middleCols(b0, sz) * ges.eigenvectors()).eval();
  }

  res.tags.assign(static_cast<size_t>(k), FormClass::Mixed);
  res.residualD.resize(k);
  res.residualDelta.resize(k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd full = scatter_full(pair, fullDim, res.eigenvectors.col(i));
    double rd = 0.0, rdel = 0.0;
    if (p < 2)
      rd = wf_norm(differential(ops, p, full), ops.starF[static_cast<size_t>(p) + 1]);
    if (p > 0)
      rdel = wf_norm(codifferential(ops, p, full),
                     ops.starF[static_cast<size_t>(p) - 1]);
    res.residualD[i] = rd;
    res.residualDelta[i] = rdel;
    const double lam = res.eigenvalues[i];
    if (lam <= res.kernelTol) {
      res.tags[static_cast<size_t>(i)] = FormClass::Harmonic;
      continue;
    }
    const double thr = tol * std::sqrt(lam);
    const bool zd = rd <= thr, zdel = rdel <= thr;
    if (zd && !zdel)
      res.tags[static_cast<size_t>(i)] = FormClass::Exact;
    else if (zdel && !zd)
      res.tags[static_cast<size_t>(i)] = FormClass::CoExact;
    else
      res.tags[static_cast<size_t>(i)] = FormClass::Mixed;
  }
}

double first_exact_eigenvalue(const DecOperators& ops, const DomainMesh& dom,
                              int p, SolveMethod method, unsigned seed) {
  if (p == 0)
    throw SpectraError(
        "exact 0-forms would be differentials of forms of negative degree; "
        "there are none");
  if (p > 2)
    throw SpectraError("a surface carries no forms of degree above 2");
  // The positive spectrum on exact p-forms equals the positive spectrum of
  // the weighted pair on the side where the kernel is small: degree 0 for
  // p = 1 (functions), degree 2 for p = 2 (both are the nonzero singular
  // values of the same weighted differential).
  const int q = p == 1 ? 0 : 2;
  OperatorPair pr =
      dom.wholeSurface() ? full_pair(ops, q) : dirichlet_restrict(ops, dom, q);
  return first_positive(pr, method, seed);
}

int f_betti(const DecOperators& ops, int p, SolveMethod method,
            unsigned seed) {
  if (p < 0 || p > 2) throw SpectraError("form degree must be 0, 1, or 2");
  OperatorPair pr = full_pair(ops, p);
  const int n = pr.dim();
  int k = std::min(n, 12);
  for (;;) {
    SpectrumResult r = solve(pr, k, method, seed);
    if (r.kernelDim == n) return n;
    if (r.kernelDim < r.k()) {
      const double firstPos = r.eigenvalues[r.kernelDim];
      if (r.kernelDim > 0) {
        const double lastKer = std::max(r.eigenvalues[r.kernelDim - 1], 0.0);
        if (lastKer > 0 && firstPos < 10.0 * lastKer) {
          std::ostringstream msg;
          msg << "harmonic count is not certifiable: last kernel candidate "
              << lastKer << " is too close to the first positive eigenvalue "
              << firstPos;
          throw SpectraError(msg.str());
        }
      }
      return r.kernelDim;
    }
    k = std::min(n, 2 * k + 8);
  }
}

int negative_inertia(const SpMat& A, const Eigen::VectorXd& W) {
  if (W.size() != A.rows() || W.minCoeff() <= 0)
    throw SpectraError("mass diagonal must be positive");
  // Sylvester's law: W is positive, so the pencil (A, W) has as many
  // negative eigenvalues as A itself has.
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() == Eigen::Success) {
    Eigen::VectorXd d = ldlt.vectorD();
    if (d.allFinite()) {
      const double dmax = d.cwiseAbs().maxCoeff();
      if (dmax > 0 && d.cwiseAbs().minCoeff() > 1e-12 * dmax)
        return count_negative(d);
    }
  }
  // Ambiguous pivot: fall back to a pivoted dense factorization.
  Eigen::MatrixXd Ad(A);
  Eigen::LDLT<Eigen::MatrixXd> dl(Ad);
  return count_negative(dl.vectorD());
}

}  // namespace sgt
