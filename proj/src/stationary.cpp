#include "stokesrobin/stationary.hpp"

#include <cmath>

namespace stokesrobin {

void StationaryProblem::validate() const {
  if (!space || !q) throw SolverError("stationary problem missing space or q");
  q->check();
}

SaddleSolver::SaddleSolver(const DofSpace& space, const RobinField& q, double mass_shift)
    : nv_(space.velocity_dof_count()), np_(space.pressure_dof_count()), shift_(mass_shift) {
  A_ = assemble_stiffness(space);
  R_ = assemble_robin_mass(space, q);
  D_ = assemble_divergence(space);
  M_ = assemble_velocity_mass(space);

  SparseMat Avv = A_ + R_;
  if (mass_shift != 0.0) Avv += mass_shift * M_;

  // symmetric block system; the multiplier is the negated pressure
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(Avv.nonZeros() + 2 * D_.nonZeros());
  for (int col = 0; col < Avv.outerSize(); ++col)
    for (SparseMat::InnerIterator it(Avv, col); it; ++it)
      trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int col = 0; col < D_.outerSize(); ++col)
    for (SparseMat::InnerIterator it(D_, col); it; ++it) {
      int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
      trip.emplace_back(nv_ + r, c, it.value());
      trip.emplace_back(c, nv_ + r, it.value());
    }
  K_ = SparseMat(nv_ + np_, nv_ + np_);
  K_.setFromTriplets(trip.begin(), trip.end());
  lu_.compute(K_);
  if (lu_.info() != Eigen::Success)
    throw SolverError("saddle-point factorization failed (singular system; check q >= alpha)");
}

std::pair<Vector, Vector> SaddleSolver::solve(const Vector& velocity_rhs) const {
  Vector rhs = Vector::Zero(nv_ + np_);
  rhs.head(nv_) = velocity_rhs;
  Vector sol = lu_.solve(rhs);
  if (lu_.info() != Eigen::Success) throw SolverError("saddle-point solve failed");
  return {sol.head(nv_), -sol.tail(np_)};
}

double SaddleSolver::relative_residual(const Vector& velocity_rhs, const Vector& u,
                                       const Vector& p) const {
  Vector ru = (A_ + R_) * u - D_.transpose() * p - velocity_rhs;
  if (shift_ != 0.0) ru += shift_ * (M_ * u);
  Vector rp = D_ * u;
  double scale = velocity_rhs.norm();
  if (scale == 0.0) scale = 1.0;
  return std::sqrt(ru.squaredNorm() + rp.squaredNorm()) / scale;
}

StationarySolution solve_stationary(const StationaryProblem& problem, double tol) {
  problem.validate();
  if (!(tol > 0.0)) throw SolverError("tolerance must be positive");
  const DofSpace& space = *problem.space;

  Vector load = Vector::Zero(space.velocity_dof_count());
  if (problem.g) load += assemble_neumann_load(space, problem.g);
  if (problem.f) load += assemble_body_load(space, problem.f);
  if (problem.rho0) load += assemble_robin_load(space, problem.rho0);

  SaddleSolver solver(space, *problem.q);
  auto [u, p] = solver.solve(load);

  StationarySolution sol;
  sol.u = DiscreteField(space, FieldKind::Velocity);
  sol.u.coefficients = u;
  sol.p = DiscreteField(space, FieldKind::Pressure);
  sol.p.coefficients = p;
  sol.residual = solver.relative_residual(load, u, p);
  if (sol.residual > tol)
    throw SolverError("stationary solve did not reach tolerance, residual " +
                      std::to_string(sol.residual));
  sol.energy = u.dot((solver.stiffness() + solver.robin_mass()) * u);

  // energy identity a_q(u,u) = <load, u>
  double rhs_energy = load.dot(u);
  double scale = std::max(std::abs(sol.energy), std::abs(rhs_energy));
  if (scale > 0.0 && std::abs(sol.energy - rhs_energy) > 1e-8 * scale)
    throw SolverError("energy identity violated");
  return sol;
}

double boundary_l2_norm(const DofSpace& space, BoundaryTag tag, const BoundaryFn& g) {
  if (!g) return 0.0;
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  double s2 = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      Vec2 x = (1.0 - s) * mesh.vertices[be.v0] + s * mesh.vertices[be.v1];
      s2 += 0.5 * quad.weights[qp] * be.length * g(x).squaredNorm();
    }
  }
  return std::sqrt(s2);
}

EnergyReport energy_estimate_check(const StationarySolution& sol,
                                   const StationaryProblem& problem) {
  EnergyReport rep;
  double h1 = std::sqrt(std::pow(l2_norm(sol.u), 2) + std::pow(h1_seminorm(sol.u), 2));
  double gnorm = boundary_l2_norm(*problem.space, BoundaryTag::GammaE, problem.g);
  double fnorm = 0.0;
  if (problem.f) {
    const Mesh& mesh = problem.space->mesh();
    const auto& quad = triangle_quadrature();
    double s2 = 0.0;
    for (int t = 0; t < mesh.triangle_count(); ++t)
      for (size_t qp = 0; qp < quad.bary.size(); ++qp)
        s2 += quad.weights[qp] * mesh.triangle_area(t) *
              problem.f(mesh.barycentric_to_point(t, quad.bary[qp])).squaredNorm();
    fnorm = std::sqrt(s2);
  }
  rep.velocity_h1 = h1;
  rep.data_norm = gnorm + fnorm;
  rep.ratio = (rep.data_norm > 0.0) ? h1 / rep.data_norm : 0.0;
  return rep;
}

std::vector<BoundaryTracePoint> extract_traces(const DiscreteField& u,
                                               const DiscreteField& p,
                                               BoundaryTag tag) {
  const DofSpace& space = *u.space;
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  std::vector<BoundaryTracePoint> out;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    int t = be.tri;
    int le = mesh.local_edge_index(be);
    bool forward = (mesh.triangles[t][le] == be.v0);
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double sl = forward ? s : 1.0 - s;  // coordinate along the local edge
      std::array<double, 3> b = {0.0, 0.0, 0.0};
      b[le] = 1.0 - sl;
      b[(le + 1) % 3] = sl;
      BoundaryTracePoint pt;
      pt.x = (1.0 - s) * mesh.vertices[be.v0] + s * mesh.vertices[be.v1];
      pt.weight = 0.5 * quad.weights[qp] * be.length;
      pt.normal = be.normal;
      pt.u = u.velocity_value(t, b);
      pt.dudn = u.velocity_gradient(t, b) * be.normal;
      pt.p = p.pressure_value(t, b);
      pt.dpdn = p.pressure_gradient(t).dot(be.normal);
      out.push_back(pt);
    }
  }
  return out;
}

double boundary_flux(const DiscreteField& u, BoundaryTag tag) {
  const DofSpace& space = *u.space;
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  double flux = 0.0;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != tag) continue;
    int t = be.tri;
    int le = mesh.local_edge_index(be);
    bool forward = (mesh.triangles[t][le] == be.v0);
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double sl = forward ? s : 1.0 - s;
      std::array<double, 3> b = {0.0, 0.0, 0.0};
      b[le] = 1.0 - sl;
      b[(le + 1) % 3] = sl;
      flux += 0.5 * quad.weights[qp] * be.length * u.velocity_value(t, b).dot(be.normal);
    }
  }
  return flux;
}

double trace_data_norm(const DiscreteField& u, const DiscreteField& p) {
  auto traces = extract_traces(u, p, BoundaryTag::GammaE);
  double su = 0.0, sp = 0.0, sdu = 0.0, sdp = 0.0;
  for (const auto& pt : traces) {
    su += pt.weight * pt.u.squaredNorm();
    sp += pt.weight * pt.p * pt.p;
    sdu += pt.weight * pt.dudn.squaredNorm();
    sdp += pt.weight * pt.dpdn * pt.dpdn;
  }
  return std::sqrt(su) + std::sqrt(sp) + std::sqrt(sdu) + std::sqrt(sdp);
}

}  // namespace stokesrobin
