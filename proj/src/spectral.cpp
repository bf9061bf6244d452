#include "stokesrobin/spectral.hpp"

#include <cmath>
#include <random>

namespace stokesrobin {

namespace {

// Leading part of the spectrum by subspace iteration on K^{-1} M, where K is
// the saddle-point factorization (the pressure block keeps iterates
// discretely divergence-free). Rayleigh-Ritz in the a_q form.
struct RawEigen {
  Vector values;
  std::vector<Vector> vectors;
};

RawEigen leading_eigenpairs(const DofSpace& space, const RobinField& q, int count,
                            const EigenOptions& opts, const SaddleSolver& solver) {
  const SparseMat& M = solver.velocity_mass();
  SparseMat Aq = solver.stiffness() + solver.robin_mass();
  const int nv = space.velocity_dof_count();
  const int m = std::min(count + opts.guard_vectors, nv / 2);
  if (m < count) throw SolverError("mesh too coarse for requested eigen count");

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  std::vector<Vector> X(m, Vector(nv));
  for (auto& x : X)
    for (int i = 0; i < nv; ++i) x[i] = normal(rng);

  Vector prev = Vector::Zero(count);
  Vector theta;
  for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
    // apply the shift-inverted operator and re-orthonormalize in M
    std::vector<Vector> Y(m);
    for (int i = 0; i < m; ++i) Y[i] = solver.solve(M * X[i]).first;
    for (int i = 0; i < m; ++i) {
      for (int rep = 0; rep < 2; ++rep)
        for (int j = 0; j < i; ++j) Y[i] -= Y[j].dot(M * Y[i]) * Y[j];
      double nrm = std::sqrt(Y[i].dot(M * Y[i]));
      if (!(nrm > 0.0)) throw SolverError("eigen-iteration basis collapse");
      Y[i] /= nrm;
    }
    Eigen::MatrixXd H(m, m);
    for (int i = 0; i < m; ++i) {
      Vector Ayi = Aq * Y[i];
      for (int j = 0; j <= i; ++j) {
        H(i, j) = Y[j].dot(Ayi);
        H(j, i) = H(i, j);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    theta = eig.eigenvalues();
    for (int i = 0; i < m; ++i) {
      X[i] = Vector::Zero(nv);
      for (int j = 0; j < m; ++j) X[i] += eig.eigenvectors()(j, i) * Y[j];
    }
    double change = (theta.head(count) - prev).cwiseAbs().maxCoeff() /
                    theta.head(count).cwiseAbs().maxCoeff();
    prev = theta.head(count);
    if (sweep > 0 && change < opts.tolerance) {
      RawEigen out;
      out.values = theta.head(count);
      out.vectors.assign(X.begin(), X.begin() + count);
      return out;
    }
  }
  throw SolverError("eigen-iteration did not converge; last relative change above tolerance");
}

}  // namespace

void EigenSystem::check_invariants() const {
  if (count() == 0) throw SolverError("empty eigensystem");
  if (!(mu > 0.0) || !(mu <= eigenvalues[0] * (1.0 + 1e-10)))
    throw SolverError("spectral lower bound mu violated");
  for (int l = 1; l < count(); ++l)
    if (eigenvalues[l] < eigenvalues[l - 1]) throw SolverError("eigenvalues not sorted");
  if (ortho_error > 1e-8) throw SolverError("eigenfields not mass-orthonormal");
  if (rayleigh_error > 1e-8) throw SolverError("Rayleigh identity violated");
}

EigenSystem build_eigensystem(const DofSpace& space, const RobinField& q, int count,
                              const EigenOptions& opts) {
  if (count < 1) throw SolverError("eigen count must be >= 1");
  q.check();
  SaddleSolver solver(space, q);
  RawEigen raw = leading_eigenpairs(space, q, count, opts, solver);

  EigenSystem es;
  es.space = &space;
  es.eigenvalues = raw.values;
  es.eigenvectors = std::move(raw.vectors);
  es.mass = solver.velocity_mass();
  es.a_q = solver.stiffness() + solver.robin_mass();

  // mu = smallest eigenvalue of the operator with q replaced by constant alpha
  RobinField q_alpha(space.mesh(), q.alpha(), q.alpha());
  SaddleSolver alpha_solver(space, q_alpha);
  es.mu = leading_eigenpairs(space, q_alpha, 1, opts, alpha_solver).values[0];

  for (int i = 0; i < es.count(); ++i) {
    Vector Mi = es.mass * es.eigenvectors[i];
    for (int j = 0; j <= i; ++j) {
      double g = es.eigenvectors[j].dot(Mi);
      double target = (i == j) ? 1.0 : 0.0;
      es.ortho_error = std::max(es.ortho_error, std::abs(g - target));
    }
    double a = es.eigenvectors[i].dot(es.a_q * es.eigenvectors[i]);
    es.rayleigh_error = std::max(es.rayleigh_error,
                                 std::abs(a - es.eigenvalues[i]) / es.eigenvalues[i]);
  }
  es.check_invariants();
  return es;
}

DiscreteField semigroup_apply(const EigenSystem& es, const DiscreteField& f, double t) {
  return fractional_power_apply(es, f, t, 0.0);
}

DiscreteField fractional_power_apply(const EigenSystem& es, const DiscreteField& f,
                                     double t, double eta) {
  if (t < 0.0) throw SolverError("negative time");
  if (t == 0.0 && eta > 0.0)
    throw SolverError("fractional power requires t > 0");
  DiscreteField out(*es.space, FieldKind::Velocity);
  Vector Mf = es.mass * f.coefficients;
  for (int l = 0; l < es.count(); ++l) {
    double lam = es.eigenvalues[l];
    double factor = std::pow(lam, eta) * std::exp(-t * lam);
    out.coefficients += factor * es.eigenvectors[l].dot(Mf) * es.eigenvectors[l];
  }
  return out;
}

IsometryReport isometry_check(const EigenSystem& es) {
  IsometryReport rep;
  for (int l = 0; l < es.count(); ++l) {
    double a = es.eigenvectors[l].dot(es.a_q * es.eigenvectors[l]);
    double halfpow = es.eigenvalues[l] *
                     es.eigenvectors[l].dot(es.mass * es.eigenvectors[l]);
    rep.max_relative_deviation = std::max(
        rep.max_relative_deviation, std::abs(a - halfpow) / es.eigenvalues[l]);
  }
  return rep;
}

}  // namespace stokesrobin
