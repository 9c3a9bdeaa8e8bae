#pragma once

#include "sgt/spectra.hpp"
#include "sgt/weights.hpp"

#include <optional>
#include <utility>

namespace sgt {

struct InequalityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything an estimate needs about one configuration: the (possibly
// restricted) mesh, its curvature data, the weight, and the assembled
// weighted operators. Distance weights also carry the comparison data.
struct Scene {
  DomainMesh dom;
  DualVolumes dv;
  CurvatureField curv;
  WeightField weight;
  DecOperators ops;

  bool hasComparison = false;
  ComparisonData comparison;

  const SurfaceMesh& mesh() const { return dom.mesh; }
  bool closed() const { return dom.wholeSurface() && dom.mesh.closed(); }
};

// Weight selector used when building a scene (and by the CLI parser).
struct WeightSpec {
  WeightKind kind = WeightKind::Zero;
  double a = 1.0;                // radial / distance coefficient
  int basePoint = 0;             // distance weights: source vertex
  CurvatureBounds bounds;        // distance weights: curvature hypothesis
  Eigen::VectorXd samples;       // custom weights: per-vertex values
};

Scene make_scene(DomainMesh dom, const WeightSpec& spec);

// Which way a verified estimate points. Slack is always the satisfied
// margin: right - left for LeftLeqRight, left - right for LeftGeqRight,
// so pass means slack >= -tolerance in both cases.
enum class Direction { LeftLeqRight, LeftGeqRight };

struct InequalityReport {
  std::string id;      // stable machine name of the estimate
  std::string inputs;  // human summary: mesh, weight, degree, parameters

  Direction direction = Direction::LeftLeqRight;
  double left = 0;
  double right = 0;
  double slack = 0;
  double tolerance = 0;
  bool pass = false;

  // False when a hypothesis failed and the conclusion was not tested;
  // such reports pass vacuously and say why in the note.
  bool evaluated = true;
  std::string note;

  // Named intermediate quantities, in a fixed order for stable output.
  std::vector<std::pair<std::string, double>> details;
};

// Weighted Bochner curvature term of degree p and its variants, one
// matrix per vertex acting on frame components of p-forms.
struct PointwiseRicci {
  int p = 0;
  double N = 0;            // dimension parameter; 0 when not applicable
  std::vector<FormEndo> ric;    // curvature term plus weight Hessian term
  std::vector<FormEndo> sffSq;  // squared extended shape operator
  std::vector<FormEndo> ricN;   // ric minus the rank-one df correction
};

PointwiseRicci pointwise_ricci(const Scene& s, int p, double N);

// Shared eigendata for the recursion-type estimates: eigenpairs of the
// weighted p-form Laplacian on the scene's domain together with vertex
// frame components and quadrature masses of each mode.
struct ModeSet {
  int p = 0;
  OperatorPair pair;
  SpectrumResult spec;
  // comp[i] is nV x C(2,p); row v holds mode i's components at vertex v
  // in the curvature frame. Restricted modes are extended by zero.
  std::vector<Eigen::MatrixXd> comp;
  Eigen::VectorXd quadNorm;  // per mode: integral of |omega|^2 d(mu_f)

  int count() const { return static_cast<int>(spec.eigenvalues.size()); }
};

ModeSet compute_modes(const Scene& s, int p, int count,
                      SolveMethod method = SolveMethod::Auto,
                      unsigned seed = 12345u);

// Vertex frame components of one discrete p-form (p = 0, 1, 2), averaged
// from the Whitney interpolant over the dual cell. Used by the quadrature
// behind every integral estimate; exposed for tests.
Eigen::MatrixXd vertex_components(const Scene& s, int p,
                                  const Eigen::VectorXd& full);

// Lower bound for the spectral gap between consecutive form degrees and
// the companion integral upper bound for the first exact eigenvalue.
InequalityReport first_eigenvalue_gap(const Scene& s, int p,
                                      bool includeZeroModes = false,
                                      SolveMethod method = SolveMethod::Auto,
                                      unsigned seed = 12345u);

InequalityReport exact_eigenvalue_upper(const Scene& s, int p,
                                        SolveMethod method = SolveMethod::Auto,
                                        unsigned seed = 12345u);

// Weighted Gallot-Meyer estimate with dimension parameter N. Admissible
// N lie outside [0, n-p+1]; anything else throws.
InequalityReport gallot_meyer_f(const Scene& s, int p, double N, double gamma,
                                SolveMethod method = SolveMethod::Auto,
                                unsigned seed = 12345u);

// Pointwise positivity criterion forcing the degree-p harmonic space to
// vanish; checks the computed harmonic dimension against it.
InequalityReport vanishing_check(const Scene& s, int p,
                                 SolveMethod method = SolveMethod::Auto,
                                 unsigned seed = 12345u);

// Recursion bounds relating the first k eigenvalues to the (k+1)-st. The
// mode set must hold at least k+1 modes of the scene's degree-p operator.
InequalityReport yang_recursion(const Scene& s, const ModeSet& modes, int k,
                                double alpha);

InequalityReport extremal_recursion(const Scene& s, const ModeSet& modes, int k,
                                 double alpha);

// Closed-form (k+1)-st eigenvalue bound obtained by iterating the
// recursion; needs the ambient closed surface alongside the domain.
InequalityReport kth_eigenvalue_bound(const Scene& closedScene, const Scene& s,
                             const ModeSet& modes, int k);

// Recursion specialized to quadratic radial weights (self-shrinker form).
InequalityReport radial_recursion(const Scene& s, const ModeSet& modes, int k,
                              double alpha);

// Recursion with the bracket controlled only through distance-comparison
// bounds; requires a distance weight with comparison data and no vertex
// past the comparison singularity.
InequalityReport distance_weight_bounds(const Scene& s, const ModeSet& modes,
                                        int k, double alpha);

// Stability (weighted Jacobi) analysis for radial weights. The pencil is
// the weighted scalar Laplacian minus the potential a + |II|^2, definite
// mass given by the weighted vertex areas.
struct JacobiResult {
  SpMat pencil;                 // stiffness part, potential included
  Eigen::VectorXd mass;         // weighted vertex areas
  Eigen::VectorXd potential;    // per vertex: a + |II|^2
  Eigen::VectorXd hF;           // weighted mean curvature per vertex
  double hFsup = 0;             // max |hF|; ~0 on an actual f-minimal surface
  bool fMinimal = false;
  double a = 0;
  double gammaM = 0;            // curvature pinching constant of the surface
  std::vector<int> dTable;      // comparison index d(l) for l = 1..maxL
  Eigen::VectorXd spectrum;     // lowest Jacobi eigenvalues, ascending
  int index = 0;                // number of negative Jacobi eigenvalues
};

std::pair<JacobiResult, std::vector<InequalityReport>> jacobi_stability(
    const Scene& s, int p, int maxL,
    SolveMethod method = SolveMethod::Auto, unsigned seed = 12345u);

}  // namespace sgt
