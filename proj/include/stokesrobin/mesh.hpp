#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokesrobin {

using Vec2 = Eigen::Vector2d;

enum class BoundaryTag { GammaE, Gamma0 };

struct AnnulusSpec {
  double inner_radius = 0.5;   // R0
  double outer_radius = 1.0;   // R1
  double target_edge_length = 0.1;

  void validate() const;
};

/// Quadrature rule on the reference triangle (barycentric points, weights
/// summing to one; multiply by the physical triangle area).
struct TriangleQuadrature {
  std::array<std::array<double, 3>, 6> bary;
  std::array<double, 6> weights;
};

/// Gauss rule on [-1,1] for boundary edges, degree 5.
struct EdgeQuadrature {
  std::array<double, 3> points;
  std::array<double, 3> weights;
};

const TriangleQuadrature& triangle_quadrature();
const EdgeQuadrature& edge_quadrature();

struct BoundaryEdge {
  int v0 = -1, v1 = -1;     // oriented so the domain lies on the left
  int edge = -1;            // global edge id
  int tri = -1;             // the unique adjacent triangle
  BoundaryTag tag = BoundaryTag::GammaE;
  Vec2 normal;              // outward unit normal of the chord
  Vec2 tangent;             // unit tangent, (n, tau) right-handed
  double length = 0.0;
};

class Mesh {
 public:
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;        // CCW
  std::vector<std::array<int, 2>> edges;            // unique, v0 < v1
  std::vector<std::array<int, 3>> tri_edges;        // local edge e = (v_e, v_{e+1})
  std::vector<BoundaryEdge> boundary_edges;
  double inner_radius = 0.0;
  double outer_radius = 0.0;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  double triangle_area(int t) const;
  Vec2 barycentric_to_point(int t, const std::array<double, 3>& b) const;
  int euler_characteristic() const;
  double total_area() const;
  double boundary_length(BoundaryTag tag) const;

  /// Local index (0..2) of the boundary edge inside its adjacent triangle.
  int local_edge_index(const BoundaryEdge& be) const;

  void check_invariants() const;
};

Mesh build_annulus(const AnnulusSpec& spec);
Mesh refine(const Mesh& mesh);

struct MeshError : std::runtime_error {
  explicit MeshError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace stokesrobin
