#include "sgt/extalg.hpp"

#include <bit>
#include <string>

namespace sgt {

namespace {

void check_dim(int n) {
  if (n < 1 || n > kMaxDim)
    throw ExtAlgError("dimension " + std::to_string(n) + " out of range [1," +
                      std::to_string(kMaxDim) + "]");
}

void check_degree(int n, int p) {
  if (p < 0 || p > n)
    throw ExtAlgError("form degree " + std::to_string(p) +
                      " out of range [0," + std::to_string(n) + "]");
}

// Sign of sorting the concatenation of two disjoint increasing masks:
// (-1)^inversions where inversions counts pairs a in A, b in B with a > b.
int merge_sign(unsigned a, unsigned b) {
  int inv = 0;
  for (unsigned bb = b; bb; bb &= bb - 1) {
    unsigned bit = bb & ~(bb - 1);
    inv += std::popcount(a & ~(bit | (bit - 1)));
  }
  return (inv & 1) ? -1 : 1;
}

}  // namespace

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

FormBasis::FormBasis(int n, int p) : n_(n), p_(p) {
  check_dim(n);
  check_degree(n, p);
  masks_.reserve(static_cast<size_t>(binomial(n, p)));
  lookup_.assign(1u << n, -1);
  // Lexicographic order on increasing index tuples. This differs from
  // ascending bitmask order (e13 < e23 lexicographically but 5 > 6 as
  // masks), so enumerate tuples explicitly.
  std::vector<int> idx(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) idx[static_cast<size_t>(i)] = i;
  while (true) {
    unsigned m = 0;
    for (int i : idx) m |= 1u << i;
    lookup_[m] = static_cast<int>(masks_.size());
    masks_.push_back(m);
    if (p == 0) break;
    int k = p - 1;
    while (k >= 0 && idx[static_cast<size_t>(k)] == n - p + k) --k;
    if (k < 0) break;
    ++idx[static_cast<size_t>(k)];
    for (int i = k + 1; i < p; ++i)
      idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
  }
}

PForm::PForm(int n_, int p_) : n(n_), p(p_) {
  check_dim(n);
  check_degree(n, p);
  c = Eigen::VectorXd::Zero(binomial(n, p));
}

PForm PForm::basisForm(int n, int p, int position) {
  PForm w(n, p);
  if (position < 0 || position >= w.c.size())
    throw ExtAlgError("basis position out of range");
  w.c[position] = 1.0;
  return w;
}

PForm wedge(const PForm& a, const PForm& b) {
  if (a.n != b.n) throw ExtAlgError("wedge of forms over different spaces");
  check_degree(a.n, a.p + b.p);
  FormBasis ba(a.n, a.p), bb(b.n, b.p), bc(a.n, a.p + b.p);
  PForm out(a.n, a.p + b.p);
  for (int i = 0; i < ba.dim(); ++i) {
    if (a.c[i] == 0.0) continue;
    unsigned ma = ba.mask(i);
    for (int j = 0; j < bb.dim(); ++j) {
      if (b.c[j] == 0.0) continue;
      unsigned mb = bb.mask(j);
      if (ma & mb) continue;
      out.c[bc.position(ma | mb)] += merge_sign(ma, mb) * a.c[i] * b.c[j];
    }
  }
  return out;
}

PForm interior(const Eigen::VectorXd& v, const PForm& a) {
  if (v.size() != a.n)
    throw ExtAlgError("contraction vector has wrong dimension");
  if (a.p == 0) throw ExtAlgError("cannot contract a 0-form");
  FormBasis ba(a.n, a.p), bo(a.n, a.p - 1);
  PForm out(a.n, a.p - 1);
  for (int i = 0; i < ba.dim(); ++i) {
    if (a.c[i] == 0.0) continue;
    unsigned m = ba.mask(i);
    int pos = 0;  // slot of the removed index within the tuple
    for (unsigned mm = m; mm; mm &= mm - 1, ++pos) {
      unsigned bit = mm & ~(mm - 1);
      int idx = std::countr_zero(bit);
      double s = (pos & 1) ? -1.0 : 1.0;
      out.c[bo.position(m & ~bit)] += s * v[idx] * a.c[i];
    }
  }
  return out;
}

FormEndo extend_endo(const SymEndo& A, int p) {
  int n = static_cast<int>(A.rows());
  check_dim(n);
  check_degree(n, p);
  if (A.cols() != n) throw ExtAlgError("endomorphism must be square");
  FormBasis basis(n, p);
  FormEndo M = FormEndo::Zero(basis.dim(), basis.dim());
  // Act on each basis form: replacing slot index j_k by i contributes
  // A(i, j_k) times the resorting sign. Terms with i already present in
  // the remaining tuple vanish.
  for (int col = 0; col < basis.dim(); ++col) {
    unsigned m = basis.mask(col);
    int pos = 0;
    for (unsigned mm = m; mm; mm &= mm - 1, ++pos) {
      unsigned bit = mm & ~(mm - 1);
      int jk = std::countr_zero(bit);
      unsigned rest = m & ~bit;
      double srem = (pos & 1) ? -1.0 : 1.0;  // e^J = srem * e^{jk} ^ e^rest
      for (int i = 0; i < n; ++i) {
        if (rest & (1u << i)) continue;
        double sins =
            (std::popcount(rest & ((1u << i) - 1)) & 1) ? -1.0 : 1.0;
        M(basis.position(rest | (1u << i)), col) += srem * sins * A(i, jk);
      }
    }
  }
  return M;
}

double evaluate(const PForm& a, const std::vector<Eigen::VectorXd>& args) {
  if (static_cast<int>(args.size()) != a.p)
    throw ExtAlgError("evaluation needs exactly p vectors");
  for (const auto& v : args)
    if (v.size() != a.n)
      throw ExtAlgError("evaluation vector has wrong dimension");
  if (a.p == 0) return a.c[0];
  FormBasis basis(a.n, a.p);
  Eigen::MatrixXd cols(a.n, a.p);
  for (int j = 0; j < a.p; ++j) cols.col(j) = args[static_cast<size_t>(j)];
  double total = 0;
  Eigen::MatrixXd minor(a.p, a.p);
  for (int i = 0; i < basis.dim(); ++i) {
    if (a.c[i] == 0.0) continue;
    unsigned m = basis.mask(i);
    int r = 0;
    for (unsigned mm = m; mm; mm &= mm - 1, ++r)
      minor.row(r) = cols.row(std::countr_zero(mm & ~(mm - 1)));
    total += a.c[i] * minor.determinant();
  }
  return total;
}

FrameSumReport frame_sum_checks(int n, int p,
                                const std::vector<Eigen::VectorXd>& frame,
                                const Eigen::VectorXd& X,
                                double gram_tolerance) {
  check_dim(n);
  check_degree(n, p);
  if (p < 1) throw ExtAlgError("frame sums need p >= 1");
  if (X.size() != n) throw ExtAlgError("frame sum vector has wrong dimension");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (const auto& u : frame) {
    if (u.size() != n) throw ExtAlgError("frame vector has wrong dimension");
    gram += u * u.transpose();
  }
  FrameSumReport rep;
  rep.gram_deviation =
      (gram - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  if (rep.gram_deviation > gram_tolerance)
    throw ExtAlgError("frame is not Parseval: Gram deviation " +
                      std::to_string(rep.gram_deviation));

  int m = static_cast<int>(frame.size());
  // All ordered p-tuples of frame indices, repeats included (the repeats
  // contribute zero wedges but belong to the stated sums).
  std::vector<int> tuple(static_cast<size_t>(p), 0);
  while (true) {
    PForm w = PForm::basisForm(n, 0, 0);
    for (int s = 0; s < p; ++s) {
      PForm u1(n, 1);
      u1.c = frame[static_cast<size_t>(tuple[static_cast<size_t>(s)])];
      w = wedge(w, u1);
    }
    rep.wedge_sum += w.norm2();
    rep.interior_sum += interior(X, w).norm2();
    int k = p - 1;
    while (k >= 0 && tuple[static_cast<size_t>(k)] == m - 1) --k;
    if (k < 0) break;
    ++tuple[static_cast<size_t>(k)];
    for (int i = k + 1; i < p; ++i) tuple[static_cast<size_t>(i)] = 0;
  }

  double pf = 1;
  for (int i = 2; i <= p; ++i) pf *= i;
  rep.wedge_predicted = pf * static_cast<double>(binomial(n, p));
  rep.interior_predicted =
      pf * static_cast<double>(binomial(n - 1, p - 1)) * X.squaredNorm();
  return rep;
}

}  // namespace sgt
