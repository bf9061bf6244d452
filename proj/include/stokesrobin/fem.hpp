#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <optional>

#include "stokesrobin/mesh.hpp"

namespace stokesrobin {

using SparseMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct FemError : std::runtime_error {
  explicit FemError(const std::string& what) : std::runtime_error(what) {}
};

/// P2 scalar basis on the reference triangle: values and barycentric-gradient
/// coefficients for the 6 local nodes (3 vertices, 3 edge midpoints; local
/// edge e joins vertices e and e+1 mod 3).
struct P2Basis {
  static constexpr int kNodes = 6;
  static std::array<double, 6> values(const std::array<double, 3>& b);
  /// Gradients w.r.t. (lambda1, lambda2) with lambda0 eliminated.
  static std::array<Eigen::Vector2d, 6> ref_gradients(const std::array<double, 3>& b);
};

/// Taylor-Hood dof layout: scalar P2 node n -> velocity dofs (2n, 2n+1),
/// pressure dof = vertex index.
class DofSpace {
 public:
  explicit DofSpace(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int scalar_node_count() const { return scalar_nodes_; }
  int velocity_dof_count() const { return 2 * scalar_nodes_; }
  int pressure_dof_count() const { return mesh_->vertex_count(); }

  /// Global scalar node of local P2 node l (0..5) in triangle t.
  int node(int t, int l) const;
  int edge_node(int edge) const { return mesh_->vertex_count() + edge; }
  Vec2 node_position(int n) const;

  /// Scalar P2 nodes lying on the given boundary part (each exactly once).
  const std::vector<int>& boundary_nodes(BoundaryTag tag) const;
  /// Velocity dofs on Gamma0, i.e. the Robin dof list.
  std::vector<int> robin_velocity_dofs() const;

  /// The three local P2 nodes on local edge e of a triangle, in edge order
  /// (endpoint, midpoint, endpoint).
  static std::array<int, 3> edge_local_nodes(int e);

 private:
  const Mesh* mesh_;
  int scalar_nodes_;
  std::vector<int> gamma_e_nodes_, gamma_0_nodes_;
};

enum class FieldKind { Velocity, Pressure, Scalar };

struct DiscreteField {
  const DofSpace* space = nullptr;
  FieldKind kind = FieldKind::Velocity;
  Vector coefficients;

  DiscreteField() = default;
  DiscreteField(const DofSpace& s, FieldKind k);
  void check() const;

  /// Value at barycentric point b of triangle t (vector fields: 2 components
  /// padded with zero in y for scalar/pressure callers use the scalar overloads).
  Vec2 velocity_value(int t, const std::array<double, 3>& b) const;
  Eigen::Matrix2d velocity_gradient(int t, const std::array<double, 3>& b) const;
  double scalar_value(int t, const std::array<double, 3>& b) const;   // P2 scalar
  Vec2 scalar_gradient(int t, const std::array<double, 3>& b) const;
  double pressure_value(int t, const std::array<double, 3>& b) const; // P1
  Vec2 pressure_gradient(int t) const;                                // constant per element
};

/// Robin coefficient q: piecewise linear on Gamma0, stored at Gamma0 vertices.
class RobinField {
 public:
  RobinField(const Mesh& mesh, double constant_value, double alpha);
  RobinField(const Mesh& mesh, std::function<double(const Vec2&)> values, double alpha);

  double alpha() const { return alpha_; }
  double at_vertex(int v) const;
  /// Linear interpolation along a Gamma0 boundary edge, s in [0,1] from v0 to v1.
  double on_edge(const BoundaryEdge& be, double s) const;
  void check() const;  // all nodal values >= alpha

  std::optional<double> norm_bound;  // M2, experiment metadata

 private:
  const Mesh* mesh_;
  double alpha_;
  std::vector<double> vertex_values_;  // indexed by vertex id, NaN off Gamma0
};

SparseMat assemble_stiffness(const DofSpace& space);
SparseMat assemble_robin_mass(const DofSpace& space, const RobinField& q);
SparseMat assemble_divergence(const DofSpace& space);  // pressure x velocity
SparseMat assemble_velocity_mass(const DofSpace& space);
Vector assemble_neumann_load(const DofSpace& space,
                             const std::function<Vec2(const Vec2&)>& g);
Vector assemble_body_load(const DofSpace& space,
                          const std::function<Vec2(const Vec2&)>& f);
/// Nonhomogeneous Robin right-hand side on Gamma0 (manufactured solutions).
Vector assemble_robin_load(const DofSpace& space,
                           const std::function<Vec2(const Vec2&)>& rho0);
/// Load for Neumann data colinear to the outward normal, g = kappa * n.
Vector assemble_normal_flux_load(const DofSpace& space,
                                 const std::function<double(const Vec2&)>& kappa);

/// Scalar P2 Laplace machinery, shared by the harmonic lifting and the
/// Carleman weights.
SparseMat assemble_scalar_stiffness(const DofSpace& space);
Vector assemble_scalar_body_load(const DofSpace& space,
                                 const std::function<double(const Vec2&)>& f);
/// Solve -Laplace(u) = f with Dirichlet data on the whole boundary
/// (value per boundary node position).
DiscreteField solve_scalar_dirichlet(const DofSpace& space,
                                     const std::function<double(const Vec2&)>& f,
                                     const std::function<double(const Vec2&)>& gamma_e_value,
                                     const std::function<double(const Vec2&)>& gamma_0_value);

// Quadrature-based norms of discrete fields.
double l2_norm(const DiscreteField& f);
double h1_seminorm(const DiscreteField& f);
double l2_error(const DiscreteField& f, const std::function<Vec2(const Vec2&)>& exact);
double h1_seminorm_error(const DiscreteField& f,
                         const std::function<Eigen::Matrix2d(const Vec2&)>& exact_grad);
double pressure_l2_norm(const DiscreteField& p);
double pressure_l2_error(const DiscreteField& p, const std::function<double(const Vec2&)>& exact);

void write_matrix_market(const SparseMat& m, const std::string& path);

}  // namespace stokesrobin
