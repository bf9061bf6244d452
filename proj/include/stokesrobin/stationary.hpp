#pragma once

#include <Eigen/SparseLU>
#include <memory>

#include "stokesrobin/fem.hpp"

namespace stokesrobin {

struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

using BoundaryFn = std::function<Vec2(const Vec2&)>;

struct StationaryProblem {
  const DofSpace* space = nullptr;
  const RobinField* q = nullptr;
  BoundaryFn g;             // Neumann data on Gamma_e
  BoundaryFn f;             // body force, may be null
  BoundaryFn rho0;          // nonhomogeneous Robin data on Gamma_0, may be null

  void validate() const;
};

struct StationarySolution {
  DiscreteField u;          // velocity
  DiscreteField p;          // pressure
  double residual = 0.0;    // relative saddle-point residual
  double energy = 0.0;      // a_q(u,u)
};

/// Factorization of the saddle-point block system
/// [sigma*M + A + R(q), D^T; D, 0] for reuse across right-hand sides.
class SaddleSolver {
 public:
  SaddleSolver(const DofSpace& space, const RobinField& q, double mass_shift = 0.0);

  /// Solve for velocity rhs b (constraint rhs zero); returns (u, p).
  std::pair<Vector, Vector> solve(const Vector& velocity_rhs) const;
  double relative_residual(const Vector& velocity_rhs, const Vector& u,
                           const Vector& p) const;

  const SparseMat& stiffness() const { return A_; }
  const SparseMat& robin_mass() const { return R_; }
  const SparseMat& divergence() const { return D_; }
  const SparseMat& velocity_mass() const { return M_; }
  int velocity_dofs() const { return nv_; }

 private:
  int nv_, np_;
  double shift_ = 0.0;
  SparseMat A_, R_, D_, M_, K_;
  Eigen::SparseLU<SparseMat> lu_;
};

StationarySolution solve_stationary(const StationaryProblem& problem, double tol = 1e-10);

struct EnergyReport {
  double ratio = 0.0;       // |u|_H1 / (|g|_L2(Gamma_e) + |f|_L2)
  double velocity_h1 = 0.0;
  double data_norm = 0.0;
};

EnergyReport energy_estimate_check(const StationarySolution& sol,
                                   const StationaryProblem& problem);

double boundary_l2_norm(const DofSpace& space, BoundaryTag tag, const BoundaryFn& g);

/// One boundary quadrature point with the traces needed downstream.
struct BoundaryTracePoint {
  Vec2 x;
  double weight = 0.0;      // edge-length-weighted quadrature weight
  Vec2 normal;
  Vec2 u;
  Vec2 dudn;
  double p = 0.0;
  double dpdn = 0.0;
};

std::vector<BoundaryTracePoint> extract_traces(const DiscreteField& u,
                                               const DiscreteField& p,
                                               BoundaryTag tag);

/// Net flux through the whole boundary component.
double boundary_flux(const DiscreteField& u, BoundaryTag tag);

/// Aggregate Gamma_e data norm
/// B = |u| + |p| + |du/dn| + |dp/dn|, each in L2(Gamma_e).
double trace_data_norm(const DiscreteField& u, const DiscreteField& p);

}  // namespace stokesrobin
