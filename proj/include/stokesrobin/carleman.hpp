#pragma once

#include "stokesrobin/stationary.hpp"

namespace stokesrobin {

/// Closed-form field with exact partial derivatives up to order 3.
/// deriv(c, jx, jy, x) = d^{jx+jy} u_c / dx^jx dy^jy, jx + jy <= 3.
struct AnalyticField {
  std::string id;
  int components = 2;
  std::function<double(int c, int jx, int jy, const Vec2&)> deriv;

  Vec2 value(const Vec2& x) const;
  Eigen::Matrix2d gradient(const Vec2& x) const;  // (i,j) = d u_i / d x_j
  Vec2 laplacian(const Vec2& x) const;
  /// d/dtau of |grad u|^2 along the unit tangent.
  double grad_sq_tangential(const Vec2& x, const Vec2& tau) const;
  /// Max relative disagreement between deriv and centered finite differences
  /// over orders 1..3 at the given point.
  double finite_difference_check(const Vec2& x, double h = 1e-5) const;
};

// The analytic test suite used for the Carleman sweep.
AnalyticField constant_field(const Vec2& c);
AnalyticField rigid_rotation_field();
/// Components of the holomorphic z^m (harmonic for any integer m; m=-1 gives
/// the (x/r^2, -y/r^2) pair).
AnalyticField holomorphic_power_field(int m);
AnalyticField trig_field(double a, double b);
std::vector<AnalyticField> analytic_suite();

struct CarlemanWeight {
  const DofSpace* space = nullptr;
  DiscreteField psi0;   // harmonic, Dirichlet chi on Gamma_e, 0 on Gamma_0
  DiscreteField psi1;   // Laplace(psi1) = lambda, zero Dirichlet
  double s = 1.0;
  double lambda = 2.0;
  double k = 0.0;       // max of psi0 over Gamma_e
  double theta = 0.0;   // min of |dn psi0| over Gamma_0 quadrature points

  double psi(int t, const std::array<double, 3>& b) const;       // psi1 + s psi0
  Vec2 grad_psi(int t, const std::array<double, 3>& b) const;
};

CarlemanWeight build_weights(const DofSpace& space, double lambda, double s,
                             const std::function<double(const Vec2&)>& chi);

/// Both sides of the weighted inequality:
/// lhs = int (lambda |u|^2 + (lambda - 1)|grad u|^2) e^psi,
/// rhs = int |Lap u|^2 e^psi
///     + int_bdry dn(psi) (|u|^2 + |grad u|^2 + 2|dtau |grad u|^2|) e^psi.
std::pair<double, double> carleman_functionals(const CarlemanWeight& w,
                                               const AnalyticField& u);

struct TraceQuantities {
  double A = 0.0;  // |u|_H3 + |p|_H3
  double B = 0.0;  // four Gamma_e trace norms
  bool surrogate = false;
};

TraceQuantities trace_quantities(const DofSpace& space, const AnalyticField& u,
                                 const AnalyticField& p);
/// Discrete variant: A is a gradient-recovery surrogate, flagged as such.
TraceQuantities trace_quantities(const StationarySolution& sol);

/// min over s > 0 of exp(k s) sqrt(B) + dtilde sqrt(A) / s.
double theoretical_bound(double A, double B, double k, double dtilde);

struct CarlemanRecord {
  std::string field_id;
  double lambda = 0.0, s = 0.0, lhs = 0.0, rhs = 0.0;
  double margin() const { return rhs - lhs; }
};

void write_carleman_csv(const std::vector<CarlemanRecord>& records,
                        const std::string& path, const std::string& header_comment);

}  // namespace stokesrobin
