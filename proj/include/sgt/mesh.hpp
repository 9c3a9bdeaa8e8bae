#pragma once

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgt {

// Triangulated surface in R^3 with validated combinatorics. Edges are
// stored as sorted vertex pairs in lexicographic order; faces keep their
// given orientation, which validation checks is globally consistent.

enum class MeshErrorCode {
  IoFailure,
  ParseFailure,
  NonTriangleFace,
  IndexOutOfRange,
  DuplicateFace,
  IsolatedVertex,
  NonManifoldEdge,
  NotOrientable,
  DegenerateFace,
  EmptyInterior,
};

struct MeshError : std::runtime_error {
  MeshError(MeshErrorCode c, const std::string& msg)
      : std::runtime_error(msg), code(c) {}
  MeshErrorCode code;
};

struct SurfaceMesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> faces;  // oriented vertex triples
  std::vector<std::array<int, 2>> edges;  // sorted pairs, lexicographic

  std::vector<std::array<int, 2>> edgeFaces;  // incident faces, -1 if none
  std::vector<std::vector<int>> vertexEdges;
  std::vector<std::vector<int>> vertexFaces;
  std::vector<std::vector<int>> vertexNeighbors;  // sorted
  std::vector<char> boundaryVertex;
  std::vector<char> boundaryEdge;

  int nV() const { return static_cast<int>(vertices.size()); }
  int nE() const { return static_cast<int>(edges.size()); }
  int nF() const { return static_cast<int>(faces.size()); }
  int eulerCharacteristic() const { return nV() - nE() + nF(); }
  bool closed() const;

  // Index of the edge {a,b}, or -1 if absent.
  int edgeIndex(int a, int b) const;
  // Edges of face f in traversal order (v0,v1), (v1,v2), (v2,v0).
  std::array<int, 3> faceEdgeIndices(int f) const;
  // Vertices at graph distance 1..k from v, sorted.
  std::vector<int> ring(int v, int k) const;
  std::vector<int> boundaryVertexList() const;
};

// Validates and indexes a raw vertex/face soup. Throws MeshError with the
// code identifying the first violation found.
SurfaceMesh build_surface(std::vector<Eigen::Vector3d> vertices,
                          std::vector<std::array<int, 3>> faces);

enum class MeshFormat { OFF, OBJ };

SurfaceMesh load_mesh(const std::string& path, MeshFormat format);
SurfaceMesh parse_off(std::istream& in);
SurfaceMesh parse_obj(std::istream& in);

// OFF writer; positions printed with enough digits to round-trip doubles
// bit-exactly.
void write_off(const SurfaceMesh& m, std::ostream& out);
void write_off(const SurfaceMesh& m, const std::string& path);

// Barycentric-lumped dual volumes: vertex cells take one third of each
// incident face, edge dual lengths sum the barycenter-to-midpoint segments
// of the adjacent faces. Positive on any non-degenerate mesh, which is why
// this split is used instead of circumcentric duals.
struct DualVolumes {
  Eigen::VectorXd vertexArea;
  Eigen::VectorXd edgePrimalLength;
  Eigen::VectorXd edgeDualLength;
  Eigen::VectorXd faceArea;
  double totalArea = 0;
};

DualVolumes dual_volumes(const SurfaceMesh& m);

// A mesh together with the simplices of an interior region. A p-simplex is
// interior iff all of its vertices are kept; solving with the operator
// restricted to interior simplices imposes the homogeneous Dirichlet
// condition on the rim.
struct DomainMesh {
  SurfaceMesh mesh;
  std::vector<char> vertexKept;
  std::vector<int> interiorVertices;
  std::vector<int> interiorEdges;
  std::vector<int> interiorFaces;

  bool wholeSurface() const {
    return static_cast<int>(interiorVertices.size()) == mesh.nV();
  }
};

DomainMesh extract_domain(const SurfaceMesh& m,
                          const std::vector<char>& keepVertex);
DomainMesh whole_surface(SurfaceMesh m);

// Test fixtures with analytically known limit spectra.

// Icosahedral subdivision sphere: 10*4^level + 2 vertices, projected to the
// given radius, faces oriented outward.
SurfaceMesh make_sphere(double radius, int level);

// Structured-grid torus, tube radius r around a circle of radius R in the
// xy-plane; nu sections around the circle, nv around the tube. Faces are
// oriented with outward tube normals. nu, nv >= 3 for a valid complex.
SurfaceMesh make_torus(double R, double r, int nu, int nv);

// Flat unit-speed disk of the given radius: 2^level concentric rings, ring
// k holding 6k vertices, interior relaxed to the harmonic (Tutte) position
// for the fixed circular boundary. Returned with the boundary ring
// excluded from the interior sets.
DomainMesh make_disk(double radius, int level);

}  // namespace sgt
