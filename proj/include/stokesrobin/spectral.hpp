#pragma once

#include "stokesrobin/stationary.hpp"

namespace stokesrobin {

/// Leading eigenpairs of the Stokes operator on the discretely
/// divergence-free subspace, M-orthonormal.
struct EigenSystem {
  const DofSpace* space = nullptr;
  Vector eigenvalues;                 // ascending
  std::vector<Vector> eigenvectors;   // velocity coefficient vectors
  double mu = 0.0;                    // smallest eigenvalue with q == alpha
  double ortho_error = 0.0;
  double rayleigh_error = 0.0;
  SparseMat mass;                     // velocity mass matrix
  SparseMat a_q;                      // stiffness + Robin mass

  int count() const { return static_cast<int>(eigenvectors.size()); }
  double inner(const Vector& f, int l) const { return eigenvectors[l].dot(mass * f); }
  void check_invariants() const;
};

struct EigenOptions {
  int max_iterations = 500;
  double tolerance = 1e-12;    // relative eigenvalue change between sweeps
  int guard_vectors = 8;
  unsigned seed = 20260823;
};

EigenSystem build_eigensystem(const DofSpace& space, const RobinField& q, int count,
                              const EigenOptions& opts = {});

DiscreteField semigroup_apply(const EigenSystem& es, const DiscreteField& f, double t);

/// Sum over modes of lambda^eta exp(-t lambda) (phi, f) phi.
DiscreteField fractional_power_apply(const EigenSystem& es, const DiscreteField& f,
                                     double t, double eta);

struct IsometryReport {
  double max_relative_deviation = 0.0;  // of a_q(phi,phi) vs lambda |phi|_M^2
};

IsometryReport isometry_check(const EigenSystem& es);

}  // namespace stokesrobin
