#include "stokesrobin/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

namespace stokesrobin {

namespace {

// Gauss-Legendre 4-point rule on [-1,1], for the Duhamel integral.
constexpr double kG4x[4] = {-0.8611363115940526, -0.3399810435848563,
                            0.3399810435848563, 0.8611363115940526};
constexpr double kG4w[4] = {0.3478548451375462, 0.6521451548625461,
                            0.6521451548625461, 0.3478548451375462};

Vector flux_load(const EvolutionProblem& problem, double t) {
  const DofSpace& space = *problem.space;
  if (problem.kappa) {
    const TimeFlux& tf = *problem.kappa;
    double w = tf.amplitude(t);
    return assemble_normal_flux_load(space, [&](const Vec2& x) {
      return tf.limit(x) + w * tf.profile(x);
    });
  }
  if (problem.g) return assemble_neumann_load(space, problem.g);
  return Vector::Zero(space.velocity_dof_count());
}

// int_0^t exp(-lam (t-s)) rate(s) ds, composite Gauss with ~dt intervals.
double duhamel_integral(double lam, double t, double dt,
                        const std::function<double(double)>& rate) {
  if (t == 0.0) return 0.0;
  int n = std::max(1, static_cast<int>(std::ceil(t / dt)));
  double h = t / n, acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double a = i * h;
    for (int k = 0; k < 4; ++k) {
      double s = a + 0.5 * h * (kG4x[k] + 1.0);
      acc += 0.5 * h * kG4w[k] * std::exp(-lam * (t - s)) * rate(s);
    }
  }
  return acc;
}

std::vector<double> geometric_times(double dt, double T, int count) {
  std::vector<double> times = {0.0};
  int n = std::max(2, count - 1);
  if (T <= dt * (1.0 + 1e-12)) {
    times.push_back(T);
    return times;
  }
  double ratio = std::pow(T / dt, 1.0 / (n - 1));
  double t = dt;
  for (int j = 0; j < n; ++j) {
    times.push_back(std::min(t, T));
    t *= ratio;
  }
  times.back() = T;
  return times;
}

}  // namespace

void EvolutionProblem::validate() const {
  if (!space || !q) throw SolverError("evolution problem missing space or q");
  q->check();
  if (!(dt > 0.0)) throw SolverError("time step must be positive");
  if (horizon < dt) throw SolverError("horizon shorter than one step");
  u0.check();
  SparseMat D = assemble_divergence(*space);
  double div = (D * u0.coefficients).norm();
  if (div > 1e-10 * std::max(1.0, u0.coefficients.norm()))
    throw SolverError("initial velocity violates the divergence constraint");
}

void Trajectory::check_invariants() const {
  for (size_t i = 1; i < samples.size(); ++i)
    if (!(samples[i].t > samples[i - 1].t))
      throw SolverError("trajectory sample times not strictly increasing");
  if (!samples.empty() && samples.front().t < 0.0)
    throw SolverError("trajectory sample before t=0");
}

Trajectory step_implicit_euler(const EvolutionProblem& problem) {
  problem.validate();
  const DofSpace& space = *problem.space;
  const double dt = problem.dt;
  const int nsteps = static_cast<int>(std::llround(problem.horizon / dt));

  SaddleSolver solver(space, *problem.q, 1.0 / dt);
  const SparseMat& M = solver.velocity_mass();
  SparseMat Aq = solver.stiffness() + solver.robin_mass();

  const bool constant_flux = !problem.kappa;
  Vector load = flux_load(problem, 0.0);

  Trajectory traj;
  traj.space = &space;
  int stride = std::max(1, (nsteps + 1 + problem.max_samples - 1) / problem.max_samples);

  Vector u = problem.u0.coefficients;
  double sup_mass = u.dot(M * u), dissipation = 0.0;

  auto record = [&](double t, const Vector& uv, const Vector& pv) {
    TrajectorySample sample;
    sample.t = t;
    sample.u = DiscreteField(space, FieldKind::Velocity);
    sample.u.coefficients = uv;
    sample.p = DiscreteField(space, FieldKind::Pressure);
    sample.p.coefficients = pv;
    sample.boundary_b = trace_data_norm(sample.u, sample.p);
    traj.samples.push_back(std::move(sample));
  };
  record(0.0, u, Vector::Zero(space.pressure_dof_count()));

  for (int n = 1; n <= nsteps; ++n) {
    double t = n * dt;
    if (!constant_flux) load = flux_load(problem, t);
    Vector rhs = (1.0 / dt) * (M * u) + load;
    auto [unew, pnew] = solver.solve(rhs);
    double res = solver.relative_residual(rhs, unew, pnew);
    if (res > 1e-8)
      throw SolverError("implicit Euler step " + std::to_string(n) +
                        " failed, residual " + std::to_string(res));
    u = unew;
    sup_mass = std::max(sup_mass, u.dot(M * u));
    dissipation += dt * u.dot(Aq * u);
    if (n % stride == 0 || n == nsteps) record(t, u, pnew);
  }
  traj.energy_functional = sup_mass + dissipation;
  traj.check_invariants();
  return traj;
}

Trajectory propagate_spectral(const EvolutionProblem& problem, const EigenSystem& es) {
  problem.validate();
  const DofSpace& space = *problem.space;
  if (es.space != &space) throw SolverError("eigensystem built on a different space");

  SaddleSolver solver(space, *problem.q);
  const SparseMat& M = solver.velocity_mass();

  // limit stationary state v
  Vector load_h = problem.kappa
                      ? assemble_normal_flux_load(space, problem.kappa->limit)
                      : flux_load(problem, 0.0);
  auto [v, pv] = solver.solve(load_h);
  if (solver.relative_residual(load_h, v, pv) > 1e-8)
    throw SolverError("stationary limit solve failed");

  // transient lifting Y (stationary response to the transient flux profile)
  Vector Y = Vector::Zero(v.size()), pY = Vector::Zero(pv.size());
  double omega0 = 0.0;
  if (problem.kappa) {
    Vector load_rho = assemble_normal_flux_load(space, problem.kappa->profile);
    std::tie(Y, pY) = solver.solve(load_rho);
    omega0 = problem.kappa->amplitude(0.0);
  }

  // eigenmode pressures: A_q phi - D^T pi = lambda M phi
  const int L = es.count();
  std::vector<Vector> mode_p(L);
  for (int l = 0; l < L; ++l)
    mode_p[l] = solver.solve(es.eigenvalues[l] * (M * es.eigenvectors[l])).second;

  Vector w0 = problem.u0.coefficients - v - omega0 * Y;
  Vector c(L), b(L);
  Vector Mw0 = M * w0, MY = M * Y;
  Vector recon = Vector::Zero(w0.size());
  for (int l = 0; l < L; ++l) {
    c[l] = es.eigenvectors[l].dot(Mw0);
    b[l] = es.eigenvectors[l].dot(MY);
    recon += c[l] * es.eigenvectors[l];
  }
  Trajectory traj;
  traj.space = &space;
  double w0n = std::sqrt(w0.dot(Mw0));
  if (w0n > 0.0) {
    Vector resid = w0 - recon;
    if (std::sqrt(resid.dot(M * resid)) > 0.01 * w0n) traj.truncation_warning = true;
  }

  for (double t : geometric_times(problem.dt, problem.horizon, problem.max_samples)) {
    double omega = problem.kappa ? problem.kappa->amplitude(t) : 0.0;
    Vector u = v + omega * Y;
    Vector p = pv + omega * pY;
    for (int l = 0; l < L; ++l) {
      double d = std::exp(-es.eigenvalues[l] * t) * c[l];
      if (problem.kappa)
        d -= b[l] * duhamel_integral(es.eigenvalues[l], t, problem.dt,
                                     problem.kappa->amplitude_rate);
      u += d * es.eigenvectors[l];
      p += d * mode_p[l];
    }
    TrajectorySample sample;
    sample.t = t;
    sample.u = DiscreteField(space, FieldKind::Velocity);
    sample.u.coefficients = u;
    sample.p = DiscreteField(space, FieldKind::Pressure);
    sample.p.coefficients = p;
    sample.boundary_b = trace_data_norm(sample.u, sample.p);
    traj.samples.push_back(std::move(sample));
  }
  traj.check_invariants();
  return traj;
}

DiscreteField lifting_solve(const DofSpace& space,
                            const std::function<double(const Vec2&)>& gamma_e_data) {
  return solve_scalar_dirichlet(
      space, [](const Vec2&) { return 0.0; }, gamma_e_data,
      [](const Vec2&) { return 0.0; });
}

DecayReport measure_decay_rate(const Trajectory& traj, const StationarySolution& v,
                               const EigenSystem& es) {
  if (traj.samples.size() < 4) throw SolverError("trajectory too short for a decay fit");
  const SparseMat& M = es.mass;
  std::vector<double> ts, ds;
  for (const auto& sample : traj.samples) {
    Vector w = sample.u.coefficients - v.u.coefficients;
    ts.push_back(sample.t);
    ds.push_back(std::sqrt(w.dot(M * w)));
  }
  double dmax = *std::max_element(ds.begin(), ds.end());
  double vscale = std::max(1.0, v.u.coefficients.norm());
  if (dmax < 1e-12 * vscale)
    throw SolverError("insufficient decay: trajectory stays at the equilibrium");

  double floor = dmax * 1e-12;
  std::vector<size_t> usable;
  for (size_t i = 0; i < ds.size(); ++i)
    if (ds[i] > floor) usable.push_back(i);
  double dmin = dmax;
  for (size_t i : usable) dmin = std::min(dmin, ds[i]);
  if (dmin * 100.0 > dmax)
    throw SolverError("insufficient decay: dynamic range below two decades");

  // fit on the tail half of the usable time range
  double tmax = ts[usable.back()];
  std::vector<size_t> tail;
  for (size_t i : usable)
    if (ts[i] >= 0.5 * tmax && ts[i] > 0.0) tail.push_back(i);
  if (tail.size() < 3)
    tail.assign(usable.end() - std::min<size_t>(3, usable.size()), usable.end());

  double st = 0, sy = 0, stt = 0, sty = 0;
  for (size_t i : tail) {
    double y = std::log(ds[i]);
    st += ts[i];
    sy += y;
    stt += ts[i] * ts[i];
    sty += ts[i] * y;
  }
  double n = static_cast<double>(tail.size());
  DecayReport rep;
  rep.slope = (n * sty - st * sy) / (n * stt - st * st);
  rep.mu = es.mu;
  rep.lambda1 = es.eigenvalues[0];
  return rep;
}

void write_trajectory_csv(const Trajectory& traj, const StationarySolution& v,
                          const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "t,l2_dist_to_stationary,energy,boundary_B\n";
  char buf[160];
  for (const auto& sample : traj.samples) {
    DiscreteField diff = sample.u;
    diff.coefficients -= v.u.coefficients;
    double d = l2_norm(diff);
    double e = l2_norm(sample.u);
    std::snprintf(buf, sizeof(buf), "%.12e,%.12e,%.12e,%.12e\n", sample.t, d,
                  e * e, sample.boundary_b);
    out << buf;
  }
}

}  // namespace stokesrobin
