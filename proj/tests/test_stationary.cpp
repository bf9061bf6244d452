#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stokesrobin/stationary.hpp"

using namespace stokesrobin;

namespace {

Vec2 rot(const Vec2& x) { return {-x.y(), x.x()}; }
Vec2 rot_g(const Vec2& x) { return {-x.y(), x.x()}; }  // R1 = 1

struct Bench {
  Mesh mesh;
  DofSpace space;
  RobinField q;
  Bench(double h, double qval = 2.0)
      : mesh(build_annulus({0.5, 1.0, h})), space(mesh), q(mesh, qval, 1.0) {}
};

// manufactured solution: u = curl(sin(pi x) sin(pi y)), p = cos(pi x) cos(pi y)
Vec2 mms_u(const Vec2& x) {
  return {M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()),
          -M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y())};
}
Eigen::Matrix2d mms_grad(const Vec2& x) {
  double c = std::cos(M_PI * x.x()), s = std::sin(M_PI * x.x());
  double cy = std::cos(M_PI * x.y()), sy = std::sin(M_PI * x.y());
  Eigen::Matrix2d g;
  g(0, 0) = M_PI * M_PI * c * cy;
  g(0, 1) = -M_PI * M_PI * s * sy;
  g(1, 0) = M_PI * M_PI * s * sy;
  g(1, 1) = -M_PI * M_PI * c * cy;
  return g;
}
double mms_p(const Vec2& x) { return std::cos(M_PI * x.x()) * std::cos(M_PI * x.y()); }
Vec2 mms_grad_p(const Vec2& x) {
  return {-M_PI * std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()),
          -M_PI * std::cos(M_PI * x.x()) * std::sin(M_PI * x.y())};
}
Vec2 mms_f(const Vec2& x) {
  // -Lap(u) + grad p with Lap(u) = -2 pi^2 u
  return 2.0 * M_PI * M_PI * mms_u(x) + mms_grad_p(x);
}

StationarySolution solve_mms(const Bench& b) {
  auto normal = [](const Vec2& x, bool outer) {
    Vec2 n = x.normalized();
    return outer ? n : Vec2(-n);
  };
  StationaryProblem problem;
  problem.space = &b.space;
  problem.q = &b.q;
  problem.f = mms_f;
  problem.g = [&](const Vec2& x) {
    Vec2 n = normal(x, true);
    return Vec2(mms_grad(x) * n - mms_p(x) * n);
  };
  problem.rho0 = [&](const Vec2& x) {
    Vec2 n = normal(x, false);
    return Vec2(mms_grad(x) * n - mms_p(x) * n + 2.0 * mms_u(x));
  };
  return solve_stationary(problem, 1e-9);
}

}  // namespace

TEST_CASE("zero data gives the zero solution") {
  Bench b(0.1);
  StationaryProblem problem{&b.space, &b.q, nullptr, nullptr, nullptr};
  StationarySolution sol = solve_stationary(problem);
  CHECK(sol.u.coefficients.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(sol.p.coefficients.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("rigid rotation equilibrium") {
  // [DERIVED] q = 1/R0 = 2, g = (-y,x)/R1 has the exact solution u=(-y,x), p=0
  Bench coarse(0.1);
  StationaryProblem problem{&coarse.space, &coarse.q, rot_g, nullptr, nullptr};
  StationarySolution sol = solve_stationary(problem);
  double e0 = l2_error(sol.u, rot);
  CHECK(e0 < 5e-3);
  CHECK(pressure_l2_norm(sol.p) < 5e-2);

  Bench fine(0.05);
  StationaryProblem pf{&fine.space, &fine.q, rot_g, nullptr, nullptr};
  double e1 = l2_error(solve_stationary(pf).u, rot);
  double order = std::log2(e0 / e1);
  CHECK(order > 1.5);
}

TEST_CASE("manufactured solution convergence") {
  Bench coarse(0.1);
  StationarySolution s0 = solve_mms(coarse);
  double l2_0 = l2_error(s0.u, mms_u);
  double h1_0 = h1_seminorm_error(s0.u, mms_grad);

  Bench fine(0.05);
  StationarySolution s1 = solve_mms(fine);
  double l2_1 = l2_error(s1.u, mms_u);
  double h1_1 = h1_seminorm_error(s1.u, mms_grad);

  CHECK(std::log2(l2_0 / l2_1) > 1.8);
  CHECK(std::log2(h1_0 / h1_1) > 1.5);
  CHECK(pressure_l2_error(s1.p, mms_p) < pressure_l2_error(s0.p, mms_p));
}

TEST_CASE("energy report") {
  Bench b(0.1);
  StationaryProblem problem{&b.space, &b.q, rot_g, nullptr, nullptr};
  StationarySolution sol = solve_stationary(problem);
  EnergyReport rep = energy_estimate_check(sol, problem);
  CHECK(rep.ratio > 0.0);

  StationaryProblem zero{&b.space, &b.q, nullptr, nullptr, nullptr};
  StationarySolution zsol = solve_stationary(zero);
  CHECK(energy_estimate_check(zsol, zero).ratio == 0.0);

  // linearity: doubling g doubles the solution
  StationaryProblem dbl{&b.space, &b.q,
                        [](const Vec2& x) { return Vec2(2.0 * rot_g(x)); }, nullptr,
                        nullptr};
  StationarySolution dsol = solve_stationary(dbl);
  CHECK((dsol.u.coefficients - 2.0 * sol.u.coefficients).norm() <
        1e-8 * sol.u.coefficients.norm());
}

TEST_CASE("flux balance and q-monotonicity") {
  Bench b(0.1);
  double prev = -1.0;
  for (double qv : {1.0, 2.0, 4.0, 8.0}) {
    RobinField q(b.mesh, qv, 1.0);
    StationaryProblem problem{&b.space, &q, rot_g, nullptr, nullptr};
    StationarySolution sol = solve_stationary(problem);
    double fe = boundary_flux(sol.u, BoundaryTag::GammaE);
    double f0 = boundary_flux(sol.u, BoundaryTag::Gamma0);
    CHECK(std::abs(fe + f0) < 1e-8 * std::max(1.0, l2_norm(sol.u)));

    double g0 = 0.0;
    for (const auto& pt : extract_traces(sol.u, sol.p, BoundaryTag::Gamma0))
      g0 += pt.weight * pt.u.squaredNorm();
    if (prev >= 0.0) CHECK(g0 < prev);
    prev = g0;
  }
}

TEST_CASE("traces of the rotation benchmark") {
  Bench b(0.05);
  StationaryProblem problem{&b.space, &b.q, rot_g, nullptr, nullptr};
  StationarySolution sol = solve_stationary(problem);
  for (const auto& pt : extract_traces(sol.u, sol.p, BoundaryTag::GammaE)) {
    CHECK(pt.u.norm() == doctest::Approx(1.0).epsilon(2e-2));
    CHECK(std::abs(pt.p) < 5e-2);
    // du/dn = e_theta on the outer circle
    Vec2 etheta(-pt.x.y(), pt.x.x());
    etheta.normalize();
    CHECK((pt.dudn - etheta).norm() < 0.1);
  }
  CHECK(trace_data_norm(sol.u, sol.p) > 0.0);
}

TEST_CASE("tolerance and coefficient preconditions") {
  Bench b(0.1);
  StationaryProblem problem{&b.space, &b.q, rot_g, nullptr, nullptr};
  CHECK_THROWS_AS(solve_stationary(problem, -1.0), SolverError);
  RobinField bad(b.mesh, 0.1, 1.0);
  StationaryProblem bp{&b.space, &bad, rot_g, nullptr, nullptr};
  CHECK_THROWS(solve_stationary(bp));
}
