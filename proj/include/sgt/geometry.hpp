#pragma once

#include "sgt/extalg.hpp"
#include "sgt/mesh.hpp"

namespace sgt {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Per-vertex extrinsic and intrinsic curvature data of the immersion.
//
// Sign conventions, fixed once for the whole library:
//  - normals are induced by the face orientation (outward on the closed
//    fixtures, +z on the flat disk);
//  - shape = the Weingarten map dν expressed in the orthonormal tangent
//    frame, so the unit sphere has shape = +Identity;
//  - the mean curvature vector is n·H⃗ = −n·H·ν (inward for convex
//    surfaces), which is what makes the radial-weight Laplacian formula
//    Δf = a(−n − n⟨X, H⃗⟩) vanish on centered spheres.
struct CurvatureField {
  std::vector<Eigen::Matrix<double, 3, 2>> frame;  // orthonormal columns
  std::vector<Eigen::Vector3d> normal;
  std::vector<Eigen::Matrix2d> shape;
  Eigen::VectorXd k1, k2;  // principal curvatures, k1 >= k2
  Eigen::VectorXd H;       // (k1 + k2) / 2 from the fit
  Eigen::VectorXd Hcot;    // cotangent cross-check; equals H on the rim
  Eigen::VectorXd K;       // angle defect / dual area
  Eigen::VectorXd scal;    // 2K
  Eigen::VectorXd sff2;    // |II|^2 = k1^2 + k2^2

  // Fit context kept for scalar jets: tangent-plane coordinates of the
  // neighborhood used per vertex, plus the fitted height jet.
  std::vector<std::vector<int>> fitNeighborhood;
  std::vector<Eigen::MatrixX2d> fitCoords;
  std::vector<Eigen::Vector2d> surfGrad;   // height gradient at the vertex
  std::vector<Eigen::Matrix2d> surfHess;   // height Hessian at the vertex

  Eigen::Vector3d meanCurvatureVector(int v) const {
    return -2.0 * H[v] * normal[static_cast<size_t>(v)];
  }
};

// Least-squares quadric fit over the 2-ring in the estimated tangent
// plane, refitted once in the refined frame; falls back to the 3-ring on
// rank deficiency and throws naming the vertex if that is still deficient.
// H is cross-checked against the cotangent Laplacian of the positions
// (Hcot); K comes from angle defects, so Gauss-Bonnet holds to roundoff.
CurvatureField estimate_curvature(const SurfaceMesh& m);

// Sampled sup of the products of distinct principal curvatures. For a
// surface that is max(k1*k2); the angle-defect route is folded in at
// interior vertices so the reported value dominates every K sample.
double gamma_m(const SurfaceMesh& m, const CurvatureField& c);

// Shape operator lifted to p-form coefficients, one endomorphism per
// vertex. p = 0 gives zero.
std::vector<FormEndo> sff_on_forms(const CurvatureField& c, int p);

// Curvature term of the Bochner formula for a hypersurface in flat
// ambient space: 2H * shape^[p] - (shape^[p])^2. For p = 1 this is the
// Ricci endomorphism by the Gauss equation; on surfaces p = 2 gives zero.
std::vector<FormEndo> bochner_ext(const CurvatureField& c, int p);

// Quadratic jet of a vertex-sampled scalar at v, in the same neighborhood
// and frame as the curvature fit. Gradient and Hessian are the covariant
// (surface-intrinsic) ones, expressed in the orthonormal tangent frame.
struct ScalarJet {
  Eigen::Vector2d grad;
  Eigen::Matrix2d hess;
};

ScalarJet fit_scalar_jet(const CurvatureField& c,
                         const Eigen::VectorXd& samples, int v);

}  // namespace sgt
