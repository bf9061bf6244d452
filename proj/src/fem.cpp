#include "stokesrobin/fem.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

namespace stokesrobin {

namespace {

// 1D traces of the P2 basis on an edge, s in [0,1]: endpoint, midpoint, endpoint.
inline std::array<double, 3> edge_p2_values(double s) {
  return {(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s), s * (2.0 * s - 1.0)};
}

inline Eigen::Matrix2d jacobian(const Mesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix2d J;
  J.col(0) = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
  J.col(1) = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
  return J;
}

// Physical gradients of the 6 local P2 basis functions at a quadrature point.
inline std::array<Vec2, 6> physical_gradients(const Eigen::Matrix2d& Jinv_t,
                                              const std::array<double, 3>& b) {
  auto ref = P2Basis::ref_gradients(b);
  std::array<Vec2, 6> out;
  for (int l = 0; l < 6; ++l) out[l] = Jinv_t * ref[l];
  return out;
}

}  // namespace

std::array<double, 6> P2Basis::values(const std::array<double, 3>& b) {
  std::array<double, 6> v;
  for (int i = 0; i < 3; ++i) v[i] = b[i] * (2.0 * b[i] - 1.0);
  for (int e = 0; e < 3; ++e) v[3 + e] = 4.0 * b[e] * b[(e + 1) % 3];
  return v;
}

std::array<Eigen::Vector2d, 6> P2Basis::ref_gradients(const std::array<double, 3>& b) {
  const Eigen::Vector2d dl[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::array<Eigen::Vector2d, 6> g;
  for (int i = 0; i < 3; ++i) g[i] = (4.0 * b[i] - 1.0) * dl[i];
  for (int e = 0; e < 3; ++e)
    g[3 + e] = 4.0 * (b[(e + 1) % 3] * dl[e] + b[e] * dl[(e + 1) % 3]);
  return g;
}

DofSpace::DofSpace(const Mesh& mesh)
    : mesh_(&mesh), scalar_nodes_(mesh.vertex_count() + mesh.edge_count()) {
  std::unordered_set<int> seen_e, seen_0;
  for (const auto& be : mesh.boundary_edges) {
    auto& seen = (be.tag == BoundaryTag::GammaE) ? seen_e : seen_0;
    auto& list = (be.tag == BoundaryTag::GammaE) ? gamma_e_nodes_ : gamma_0_nodes_;
    for (int n : {be.v0, be.v1, edge_node(be.edge)})
      if (seen.insert(n).second) list.push_back(n);
  }
}

int DofSpace::node(int t, int l) const {
  return l < 3 ? mesh_->triangles[t][l]
               : mesh_->vertex_count() + mesh_->tri_edges[t][l - 3];
}

Vec2 DofSpace::node_position(int n) const {
  if (n < mesh_->vertex_count()) return mesh_->vertices[n];
  const auto& e = mesh_->edges[n - mesh_->vertex_count()];
  return 0.5 * (mesh_->vertices[e[0]] + mesh_->vertices[e[1]]);
}

const std::vector<int>& DofSpace::boundary_nodes(BoundaryTag tag) const {
  return tag == BoundaryTag::GammaE ? gamma_e_nodes_ : gamma_0_nodes_;
}

std::vector<int> DofSpace::robin_velocity_dofs() const {
  std::vector<int> dofs;
  for (int n : gamma_0_nodes_) {
    dofs.push_back(2 * n);
    dofs.push_back(2 * n + 1);
  }
  return dofs;
}

std::array<int, 3> DofSpace::edge_local_nodes(int e) {
  return {e, 3 + e, (e + 1) % 3};
}

DiscreteField::DiscreteField(const DofSpace& s, FieldKind k) : space(&s), kind(k) {
  int n = (k == FieldKind::Velocity) ? s.velocity_dof_count()
          : (k == FieldKind::Pressure) ? s.pressure_dof_count()
                                       : s.scalar_node_count();
  coefficients = Vector::Zero(n);
}

void DiscreteField::check() const {
  if (!space) throw FemError("field has no space");
  int expect = (kind == FieldKind::Velocity) ? space->velocity_dof_count()
               : (kind == FieldKind::Pressure) ? space->pressure_dof_count()
                                               : space->scalar_node_count();
  if (coefficients.size() != expect)
    throw FemError("coefficient length does not match space and kind");
}

Vec2 DiscreteField::velocity_value(int t, const std::array<double, 3>& b) const {
  auto N = P2Basis::values(b);
  Vec2 v = Vec2::Zero();
  for (int l = 0; l < 6; ++l) {
    int n = space->node(t, l);
    v.x() += coefficients[2 * n] * N[l];
    v.y() += coefficients[2 * n + 1] * N[l];
  }
  return v;
}

Eigen::Matrix2d DiscreteField::velocity_gradient(int t, const std::array<double, 3>& b) const {
  Eigen::Matrix2d Jinv_t = jacobian(space->mesh(), t).inverse().transpose();
  auto G = physical_gradients(Jinv_t, b);
  Eigen::Matrix2d grad = Eigen::Matrix2d::Zero();  // grad(i,j) = d u_i / d x_j
  for (int l = 0; l < 6; ++l) {
    int n = space->node(t, l);
    grad.row(0) += coefficients[2 * n] * G[l].transpose();
    grad.row(1) += coefficients[2 * n + 1] * G[l].transpose();
  }
  return grad;
}

double DiscreteField::scalar_value(int t, const std::array<double, 3>& b) const {
  auto N = P2Basis::values(b);
  double v = 0.0;
  for (int l = 0; l < 6; ++l) v += coefficients[space->node(t, l)] * N[l];
  return v;
}

Vec2 DiscreteField::scalar_gradient(int t, const std::array<double, 3>& b) const {
  Eigen::Matrix2d Jinv_t = jacobian(space->mesh(), t).inverse().transpose();
  auto G = physical_gradients(Jinv_t, b);
  Vec2 g = Vec2::Zero();
  for (int l = 0; l < 6; ++l) g += coefficients[space->node(t, l)] * G[l];
  return g;
}

double DiscreteField::pressure_value(int t, const std::array<double, 3>& b) const {
  const auto& tri = space->mesh().triangles[t];
  return b[0] * coefficients[tri[0]] + b[1] * coefficients[tri[1]] +
         b[2] * coefficients[tri[2]];
}

Vec2 DiscreteField::pressure_gradient(int t) const {
  const Mesh& mesh = space->mesh();
  Eigen::Matrix2d Jinv_t = jacobian(mesh, t).inverse().transpose();
  const Eigen::Vector2d dl[3] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  Vec2 g = Vec2::Zero();
  for (int i = 0; i < 3; ++i)
    g += coefficients[mesh.triangles[t][i]] * (Jinv_t * dl[i]);
  return g;
}

RobinField::RobinField(const Mesh& mesh, double constant_value, double alpha)
    : RobinField(mesh, [constant_value](const Vec2&) { return constant_value; }, alpha) {}

RobinField::RobinField(const Mesh& mesh, std::function<double(const Vec2&)> values,
                       double alpha)
    : mesh_(&mesh), alpha_(alpha) {
  if (!(alpha > 0.0)) throw FemError("Robin lower bound alpha must be positive");
  vertex_values_.assign(mesh.vertex_count(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::Gamma0) continue;
    for (int v : {be.v0, be.v1})
      vertex_values_[v] = values(mesh.vertices[v]);
  }
}

double RobinField::at_vertex(int v) const {
  double q = vertex_values_[v];
  if (std::isnan(q)) throw FemError("vertex is not on Gamma0");
  return q;
}

double RobinField::on_edge(const BoundaryEdge& be, double s) const {
  return (1.0 - s) * at_vertex(be.v0) + s * at_vertex(be.v1);
}

void RobinField::check() const {
  for (const auto& be : mesh_->boundary_edges) {
    if (be.tag != BoundaryTag::Gamma0) continue;
    for (int v : {be.v0, be.v1})
      if (at_vertex(v) < alpha_)
        throw FemError("Robin coefficient below its lower bound alpha");
  }
}

SparseMat assemble_stiffness(const DofSpace& space) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    Eigen::Matrix2d Jinv_t = jacobian(mesh, t).inverse().transpose();
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      auto G = physical_gradients(Jinv_t, quad.bary[qp]);
      double w = quad.weights[qp] * area;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) ke(i, j) += w * G[i].dot(G[j]);
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        int ni = space.node(t, i), nj = space.node(t, j);
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * ni + c, 2 * nj + c, ke(i, j));
      }
  }
  SparseMat A(space.velocity_dof_count(), space.velocity_dof_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

SparseMat assemble_robin_mass(const DofSpace& space, const RobinField& q) {
  q.check();
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::Gamma0) continue;
    int nodes[3] = {be.v0, space.edge_node(be.edge), be.v1};
    Eigen::Matrix3d me = Eigen::Matrix3d::Zero();
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double w = 0.5 * quad.weights[qp] * be.length * q.on_edge(be, s);
      auto N = edge_p2_values(s);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) me(i, j) += w * N[i] * N[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * nodes[i] + c, 2 * nodes[j] + c, me(i, j));
  }
  SparseMat R(space.velocity_dof_count(), space.velocity_dof_count());
  R.setFromTriplets(trip.begin(), trip.end());
  return R;
}

SparseMat assemble_divergence(const DofSpace& space) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    Eigen::Matrix2d Jinv_t = jacobian(mesh, t).inverse().transpose();
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      const auto& b = quad.bary[qp];
      auto G = physical_gradients(Jinv_t, b);
      double w = quad.weights[qp] * area;
      for (int r = 0; r < 3; ++r) {
        int pr = mesh.triangles[t][r];
        for (int l = 0; l < 6; ++l) {
          int n = space.node(t, l);
          trip.emplace_back(pr, 2 * n, w * b[r] * G[l].x());
          trip.emplace_back(pr, 2 * n + 1, w * b[r] * G[l].y());
        }
      }
    }
  }
  SparseMat D(space.pressure_dof_count(), space.velocity_dof_count());
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

SparseMat assemble_velocity_mass(const DofSpace& space) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      auto N = P2Basis::values(quad.bary[qp]);
      double w = quad.weights[qp] * area;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) me(i, j) += w * N[i] * N[j];
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        int ni = space.node(t, i), nj = space.node(t, j);
        for (int c = 0; c < 2; ++c)
          trip.emplace_back(2 * ni + c, 2 * nj + c, me(i, j));
      }
  }
  SparseMat M(space.velocity_dof_count(), space.velocity_dof_count());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

namespace {

Vector boundary_load(const DofSpace& space, BoundaryTag tag,
                     const std::function<Vec2(const Vec2&)>& g) {
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  Vector load = Vector::Zero(space.velocity_dof_count());
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    int nodes[3] = {be.v0, space.edge_node(be.edge), be.v1};
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double w = 0.5 * quad.weights[qp] * be.length;
      Vec2 x = (1.0 - s) * mesh.vertices[be.v0] + s * mesh.vertices[be.v1];
      Vec2 gv = g(x);
      auto N = edge_p2_values(s);
      for (int i = 0; i < 3; ++i) {
        load[2 * nodes[i]] += w * N[i] * gv.x();
        load[2 * nodes[i] + 1] += w * N[i] * gv.y();
      }
    }
  }
  return load;
}

}  // namespace

Vector assemble_neumann_load(const DofSpace& space,
                             const std::function<Vec2(const Vec2&)>& g) {
  return boundary_load(space, BoundaryTag::GammaE, g);
}

Vector assemble_robin_load(const DofSpace& space,
                           const std::function<Vec2(const Vec2&)>& rho0) {
  return boundary_load(space, BoundaryTag::Gamma0, rho0);
}

Vector assemble_normal_flux_load(const DofSpace& space,
                                 const std::function<double(const Vec2&)>& kappa) {
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  Vector load = Vector::Zero(space.velocity_dof_count());
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::GammaE) continue;
    int nodes[3] = {be.v0, space.edge_node(be.edge), be.v1};
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      Vec2 x = (1.0 - s) * mesh.vertices[be.v0] + s * mesh.vertices[be.v1];
      double w = 0.5 * quad.weights[qp] * be.length * kappa(x);
      auto N = edge_p2_values(s);
      for (int i = 0; i < 3; ++i) {
        load[2 * nodes[i]] += w * N[i] * be.normal.x();
        load[2 * nodes[i] + 1] += w * N[i] * be.normal.y();
      }
    }
  }
  return load;
}

Vector assemble_body_load(const DofSpace& space,
                          const std::function<Vec2(const Vec2&)>& f) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  Vector load = Vector::Zero(space.velocity_dof_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, quad.bary[qp]);
      Vec2 fv = f(x);
      auto N = P2Basis::values(quad.bary[qp]);
      double w = quad.weights[qp] * area;
      for (int l = 0; l < 6; ++l) {
        int n = space.node(t, l);
        load[2 * n] += w * N[l] * fv.x();
        load[2 * n + 1] += w * N[l] * fv.y();
      }
    }
  }
  return load;
}

SparseMat assemble_scalar_stiffness(const DofSpace& space) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  std::vector<Eigen::Triplet<double>> trip;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    Eigen::Matrix2d Jinv_t = jacobian(mesh, t).inverse().transpose();
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      auto G = physical_gradients(Jinv_t, quad.bary[qp]);
      double w = quad.weights[qp] * area;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          trip.emplace_back(space.node(t, i), space.node(t, j), w * G[i].dot(G[j]));
    }
  }
  SparseMat A(space.scalar_node_count(), space.scalar_node_count());
  A.setFromTriplets(trip.begin(), trip.end());
  return A;
}

Vector assemble_scalar_body_load(const DofSpace& space,
                                 const std::function<double(const Vec2&)>& f) {
  const Mesh& mesh = space.mesh();
  const auto& quad = triangle_quadrature();
  Vector load = Vector::Zero(space.scalar_node_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, quad.bary[qp]);
      auto N = P2Basis::values(quad.bary[qp]);
      double w = quad.weights[qp] * area * f(x);
      for (int l = 0; l < 6; ++l) load[space.node(t, l)] += w * N[l];
    }
  }
  return load;
}

DiscreteField solve_scalar_dirichlet(const DofSpace& space,
                                     const std::function<double(const Vec2&)>& f,
                                     const std::function<double(const Vec2&)>& gamma_e_value,
                                     const std::function<double(const Vec2&)>& gamma_0_value) {
  SparseMat K = assemble_scalar_stiffness(space);
  Vector F = assemble_scalar_body_load(space, f);

  DiscreteField u(space, FieldKind::Scalar);
  std::vector<bool> fixed(space.scalar_node_count(), false);
  for (int n : space.boundary_nodes(BoundaryTag::GammaE)) {
    u.coefficients[n] = gamma_e_value(space.node_position(n));
    fixed[n] = true;
  }
  for (int n : space.boundary_nodes(BoundaryTag::Gamma0)) {
    u.coefficients[n] = gamma_0_value(space.node_position(n));
    fixed[n] = true;
  }

  std::vector<int> reduced(space.scalar_node_count(), -1);
  int nfree = 0;
  for (int n = 0; n < space.scalar_node_count(); ++n)
    if (!fixed[n]) reduced[n] = nfree++;

  std::vector<Eigen::Triplet<double>> trip;
  Vector rhs = Vector::Zero(nfree);
  for (int n = 0; n < space.scalar_node_count(); ++n) {
    if (fixed[n]) continue;
    rhs[reduced[n]] = F[n];
  }
  for (int col = 0; col < K.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(K, col); it; ++it) {
      int i = static_cast<int>(it.row()), j = static_cast<int>(it.col());
      if (fixed[i]) continue;
      if (fixed[j])
        rhs[reduced[i]] -= it.value() * u.coefficients[j];
      else
        trip.emplace_back(reduced[i], reduced[j], it.value());
    }
  }
  SparseMat Kr(nfree, nfree);
  Kr.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SparseMat> solver(Kr);
  if (solver.info() != Eigen::Success)
    throw FemError("scalar Dirichlet factorization failed");
  Vector ui = solver.solve(rhs);
  for (int n = 0; n < space.scalar_node_count(); ++n)
    if (!fixed[n]) u.coefficients[n] = ui[reduced[n]];
  return u;
}

double l2_norm(const DiscreteField& f) {
  const Mesh& mesh = f.space->mesh();
  const auto& quad = triangle_quadrature();
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      double w = quad.weights[qp] * area;
      if (f.kind == FieldKind::Velocity)
        s += w * f.velocity_value(t, quad.bary[qp]).squaredNorm();
      else if (f.kind == FieldKind::Scalar)
        s += w * f.scalar_value(t, quad.bary[qp]) * f.scalar_value(t, quad.bary[qp]);
      else
        s += w * f.pressure_value(t, quad.bary[qp]) * f.pressure_value(t, quad.bary[qp]);
    }
  }
  return std::sqrt(s);
}

double h1_seminorm(const DiscreteField& f) {
  const Mesh& mesh = f.space->mesh();
  const auto& quad = triangle_quadrature();
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      double w = quad.weights[qp] * area;
      if (f.kind == FieldKind::Velocity)
        s += w * f.velocity_gradient(t, quad.bary[qp]).squaredNorm();
      else
        s += w * f.scalar_gradient(t, quad.bary[qp]).squaredNorm();
    }
  }
  return std::sqrt(s);
}

double l2_error(const DiscreteField& f, const std::function<Vec2(const Vec2&)>& exact) {
  const Mesh& mesh = f.space->mesh();
  const auto& quad = triangle_quadrature();
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, quad.bary[qp]);
      s += quad.weights[qp] * area *
           (f.velocity_value(t, quad.bary[qp]) - exact(x)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

double h1_seminorm_error(const DiscreteField& f,
                         const std::function<Eigen::Matrix2d(const Vec2&)>& exact_grad) {
  const Mesh& mesh = f.space->mesh();
  const auto& quad = triangle_quadrature();
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, quad.bary[qp]);
      s += quad.weights[qp] * area *
           (f.velocity_gradient(t, quad.bary[qp]) - exact_grad(x)).squaredNorm();
    }
  }
  return std::sqrt(s);
}

double pressure_l2_norm(const DiscreteField& p) {
  return l2_norm(p);
}

double pressure_l2_error(const DiscreteField& p,
                         const std::function<double(const Vec2&)>& exact) {
  const Mesh& mesh = p.space->mesh();
  const auto& quad = triangle_quadrature();
  double s = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < quad.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, quad.bary[qp]);
      double d = p.pressure_value(t, quad.bary[qp]) - exact(x);
      s += quad.weights[qp] * area * d * d;
    }
  }
  return std::sqrt(s);
}

void write_matrix_market(const SparseMat& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FemError("cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
  out.precision(17);
  for (int col = 0; col < m.outerSize(); ++col)
    for (SparseMat::InnerIterator it(m, col); it; ++it)
      out << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace stokesrobin
