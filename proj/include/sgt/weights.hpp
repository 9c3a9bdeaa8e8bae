#pragma once

#include "sgt/geometry.hpp"

namespace sgt {

struct WeightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class WeightKind { Zero, Radial, Distance, Custom };

// A weight f with every derived field the estimates need. Laplacians are
// in the geometer sign convention (delta d, the positive semidefinite
// one), so on the plane f = |X|^2/2 has lapF = -2.
struct WeightField {
  WeightKind kind = WeightKind::Zero;
  double a = 0;  // radial / distance coefficient

  Eigen::VectorXd f;                       // per vertex
  std::vector<Eigen::Vector3d> faceGrad;   // per face, tangent to the face
  Eigen::VectorXd gradNorm2;               // per vertex |df|^2
  Eigen::VectorXd lapF;                    // per vertex
  std::vector<Eigen::Matrix2d> hess;       // per vertex, curvature frame
  std::vector<Eigen::Vector2d> gradFrame;  // per vertex df in the frame

  // Radial only: Hessian refit numerically from the sampled f, kept so
  // t_f_on_forms can cross-check the closed form against the estimator.
  std::vector<Eigen::Matrix2d> hessNumeric;
};

// (n-1) sqrt(l) cot(sqrt(l) r), continued through l = 0 (gives (n-1)/r)
// and l < 0 (coth). Surfaces here, so n = 2.
double comparison_Hl(double l, double r);

struct CurvatureBounds {
  bool sectional = false;  // false: Ricci >= (n-1) l; true: l1 <= sec <= l2
  double l = 0;
  double l1 = 0, l2 = 0;
};

// Geodesic-distance data for the comparison-theorem estimates. dHl fields
// hold d * H_l(d) per vertex with the r -> 0 limit (n-1) filled in at the
// base point; consumers drop vertices flagged singular (sqrt(l) d >= pi).
struct ComparisonData {
  int basePoint = -1;
  double a = 0;
  CurvatureBounds bounds;
  Eigen::VectorXd dist;
  Eigen::VectorXd dHl_ricci;
  Eigen::VectorXd dHl_sec1;
  Eigen::VectorXd dHl_sec2;
  std::vector<char> singular;
  int numSingular = 0;
  // Crude multiplicative bound on how far the edge-graph metric can
  // overestimate geodesic distance, from the worst triangle angle.
  double stretchBound = 1;
};

WeightField zero_weight(const SurfaceMesh& m, const CurvatureField& c);

// f = a |X|^2 / 2 with every derived field from the closed forms:
// df = a X^T, |df|^2 = a^2 (|X|^2 - <X,nu>^2), lap f = a(-n + n H <X,nu>),
// Hess f = a (I - <X,nu> shape).
WeightField radial_weight(const SurfaceMesh& m, const CurvatureField& c,
                          double a);

// f = a d^2 / 2 with d the Dijkstra distance from the base vertex;
// derived fields go through the numeric (custom) path.
std::pair<WeightField, ComparisonData> distance_weight(
    const SurfaceMesh& m, const CurvatureField& c, int basePoint, double a,
    const CurvatureBounds& bounds);

// Arbitrary vertex samples: df per face from the linear interpolant,
// lap f from the cotangent operator, Hess f from the scalar-jet fit.
WeightField custom_weight(const SurfaceMesh& m, const CurvatureField& c,
                          const Eigen::VectorXd& samples);

// T_f^[p] = extend_endo(Hess f, p), one endomorphism per vertex. For the
// radial kind the closed form a(p Id + II^[p]_{X^N}) is what the stored
// Hessian encodes; the numeric refit must agree with it or this throws
// (estimator inconsistency guard).
std::vector<FormEndo> t_f_on_forms(const WeightField& w, int p);

// Scal_f = Scal - lap f, per vertex.
Eigen::VectorXd scal_f(const CurvatureField& c, const WeightField& w);

// Two-column CSV (vertex index, value) for custom weights.
Eigen::VectorXd load_weight_samples(const std::string& path, int nV);

}  // namespace sgt
