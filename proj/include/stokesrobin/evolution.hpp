#pragma once

#include "stokesrobin/spectral.hpp"

namespace stokesrobin {

/// Time-dependent Neumann flux colinear to the normal,
/// kappa(t,x) = limit(x) + amplitude(t) * profile(x).
struct TimeFlux {
  std::function<double(const Vec2&)> limit;      // h, the t -> infinity flux
  std::function<double(const Vec2&)> profile;    // spatial shape of the transient
  std::function<double(double)> amplitude;       // omega(t)
  std::function<double(double)> amplitude_rate;  // omega'(t)
};

struct EvolutionProblem {
  const DofSpace* space = nullptr;
  const RobinField* q = nullptr;
  DiscreteField u0;                  // discretely divergence-free initial velocity
  BoundaryFn g;                      // constant Neumann data (used when !kappa)
  std::optional<TimeFlux> kappa;     // time-dependent normal flux, takes precedence
  double horizon = 1.0;
  double dt = 1e-2;
  int max_samples = 200;

  void validate() const;
};

struct TrajectorySample {
  double t = 0.0;
  DiscreteField u;
  DiscreteField p;
  double boundary_b = 0.0;  // Gamma_e data norm of (u, p)
};

struct Trajectory {
  const DofSpace* space = nullptr;
  std::vector<TrajectorySample> samples;
  /// sup_n |u^n|^2_M + sum dt a_q(u^n, u^n), the discrete energy functional
  /// (implicit Euler only; zero for spectral trajectories).
  double energy_functional = 0.0;
  bool truncation_warning = false;  // spectral: u0 - v poorly captured by the basis

  void check_invariants() const;  // sample times strictly increasing, in [0, T]
};

Trajectory step_implicit_euler(const EvolutionProblem& problem);

/// Steady-state decomposition + semigroup, with a Duhamel term in the
/// time-dependent flux case. Sample times follow a geometric grid.
Trajectory propagate_spectral(const EvolutionProblem& problem, const EigenSystem& es);

/// Harmonic lifting: Laplace(w) = 0, w = data on Gamma_e, w = 0 on Gamma_0.
DiscreteField lifting_solve(const DofSpace& space,
                            const std::function<double(const Vec2&)>& gamma_e_data);

struct DecayReport {
  double slope = 0.0;    // least-squares slope of ln|u(t)-v| over the tail
  double mu = 0.0;
  double lambda1 = 0.0;
};

DecayReport measure_decay_rate(const Trajectory& traj, const StationarySolution& v,
                               const EigenSystem& es);

void write_trajectory_csv(const Trajectory& traj, const StationarySolution& v,
                          const std::string& path, const std::string& header_comment);

}  // namespace stokesrobin
