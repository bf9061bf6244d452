#include "stokesrobin/carleman.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>

namespace stokesrobin {

Vec2 AnalyticField::value(const Vec2& x) const {
  return {deriv(0, 0, 0, x), components > 1 ? deriv(1, 0, 0, x) : 0.0};
}

Eigen::Matrix2d AnalyticField::gradient(const Vec2& x) const {
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  for (int c = 0; c < components; ++c) {
    g(c, 0) = deriv(c, 1, 0, x);
    g(c, 1) = deriv(c, 0, 1, x);
  }
  return g;
}

Vec2 AnalyticField::laplacian(const Vec2& x) const {
  Vec2 l = Vec2::Zero();
  for (int c = 0; c < components; ++c) l[c] = deriv(c, 2, 0, x) + deriv(c, 0, 2, x);
  return l;
}

double AnalyticField::grad_sq_tangential(const Vec2& x, const Vec2& tau) const {
  double acc = 0.0;
  for (int c = 0; c < components; ++c)
    for (int j = 0; j < 2; ++j) {
      int jx = (j == 0) ? 1 : 0, jy = 1 - jx;
      double first = deriv(c, jx, jy, x);
      acc += first * (tau.x() * deriv(c, jx + 1, jy, x) +
                      tau.y() * deriv(c, jx, jy + 1, x));
    }
  return 2.0 * acc;
}

double AnalyticField::finite_difference_check(const Vec2& x, double h) const {
  double worst = 0.0;
  for (int c = 0; c < components; ++c)
    for (int jx = 0; jx <= 3; ++jx)
      for (int jy = 0; jx + jy <= 3; ++jy) {
        if (jx + jy == 0) continue;
        // difference the next-lower derivative in one coordinate
        int px = jx, py = jy;
        double fd;
        if (jx > 0) {
          fd = (deriv(c, px - 1, py, {x.x() + h, x.y()}) -
                deriv(c, px - 1, py, {x.x() - h, x.y()})) / (2.0 * h);
        } else {
          fd = (deriv(c, px, py - 1, {x.x(), x.y() + h}) -
                deriv(c, px, py - 1, {x.x(), x.y() - h})) / (2.0 * h);
        }
        double exact = deriv(c, jx, jy, x);
        worst = std::max(worst, std::abs(fd - exact) / (1.0 + std::abs(exact)));
      }
  return worst;
}

AnalyticField constant_field(const Vec2& c) {
  AnalyticField f;
  f.id = "constant";
  f.deriv = [c](int comp, int jx, int jy, const Vec2&) {
    return (jx == 0 && jy == 0) ? c[comp] : 0.0;
  };
  return f;
}

AnalyticField rigid_rotation_field() {
  AnalyticField f;
  f.id = "rotation";
  f.deriv = [](int c, int jx, int jy, const Vec2& x) -> double {
    if (jx == 0 && jy == 0) return c == 0 ? -x.y() : x.x();
    if (jx + jy == 1) {
      if (c == 0 && jy == 1) return -1.0;
      if (c == 1 && jx == 1) return 1.0;
    }
    return 0.0;
  };
  return f;
}

AnalyticField holomorphic_power_field(int m) {
  AnalyticField f;
  f.id = "z^" + std::to_string(m);
  // d^jx d^jy (Re, Im) z^m from i^jy z^m-derivatives of the holomorphic power
  f.deriv = [m](int c, int jx, int jy, const Vec2& x) {
    std::complex<double> z(x.x(), x.y());
    int n = jx + jy;
    double coeff = 1.0;
    for (int j = 0; j < n; ++j) coeff *= static_cast<double>(m - j);
    std::complex<double> d = coeff * std::pow(z, m - n);
    std::complex<double> i_pow = std::pow(std::complex<double>(0.0, 1.0), jy);
    d *= i_pow;
    return c == 0 ? d.real() : d.imag();
  };
  return f;
}

AnalyticField trig_field(double a, double b) {
  AnalyticField f;
  f.id = "trig";
  f.deriv = [a, b](int c, int jx, int jy, const Vec2& x) {
    const double half_pi = 1.5707963267948966;
    double fx = std::pow(a, jx), fy = std::pow(b, jy);
    if (c == 0)
      return fx * fy * std::sin(a * x.x() + jx * half_pi) *
             std::sin(b * x.y() + jy * half_pi);
    return fx * fy * std::cos(a * x.x() + jx * half_pi) *
           std::cos(b * x.y() + jy * half_pi);
  };
  return f;
}

std::vector<AnalyticField> analytic_suite() {
  return {constant_field({1.0, -0.5}), rigid_rotation_field(),
          holomorphic_power_field(1), holomorphic_power_field(2),
          trig_field(M_PI, M_PI), trig_field(2.0, 1.0)};
}

double CarlemanWeight::psi(int t, const std::array<double, 3>& b) const {
  return psi1.scalar_value(t, b) + s * psi0.scalar_value(t, b);
}

Vec2 CarlemanWeight::grad_psi(int t, const std::array<double, 3>& b) const {
  return psi1.scalar_gradient(t, b) + s * psi0.scalar_gradient(t, b);
}

namespace {

struct EdgeQuadPoint {
  const BoundaryEdge* be;
  int tri;
  std::array<double, 3> bary;
  Vec2 x;
  double weight;
};

std::vector<EdgeQuadPoint> boundary_quad_points(const Mesh& mesh) {
  const auto& quad = edge_quadrature();
  std::vector<EdgeQuadPoint> pts;
  for (const auto& be : mesh.boundary_edges) {
    int t = be.tri;
    int le = mesh.local_edge_index(be);
    bool forward = (mesh.triangles[t][le] == be.v0);
    for (int qp = 0; qp < 3; ++qp) {
      double sc = 0.5 * (quad.points[qp] + 1.0);
      double sl = forward ? sc : 1.0 - sc;
      EdgeQuadPoint p;
      p.be = &be;
      p.tri = t;
      p.bary = {0.0, 0.0, 0.0};
      p.bary[le] = 1.0 - sl;
      p.bary[(le + 1) % 3] = sl;
      p.x = (1.0 - sc) * mesh.vertices[be.v0] + sc * mesh.vertices[be.v1];
      p.weight = 0.5 * quad.weights[qp] * be.length;
      pts.push_back(p);
    }
  }
  return pts;
}

std::string point_str(const Vec2& x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.6f, %.6f)", x.x(), x.y());
  return buf;
}

}  // namespace

CarlemanWeight build_weights(const DofSpace& space, double lambda, double s,
                             const std::function<double(const Vec2&)>& chi) {
  if (lambda < 2.0) throw SolverError("carleman weight requires lambda >= 2");
  if (!(s > 0.0)) throw SolverError("carleman parameter s must be positive");
  double chi_max = 0.0;
  for (int n : space.boundary_nodes(BoundaryTag::GammaE)) {
    double v = chi(space.node_position(n));
    if (v < 0.0) throw SolverError("boundary profile chi must be nonnegative");
    chi_max = std::max(chi_max, v);
  }
  if (chi_max == 0.0)
    throw SolverError("boundary profile chi is identically zero on Gamma_e");

  CarlemanWeight w;
  w.space = &space;
  w.lambda = lambda;
  w.s = s;
  auto zero = [](const Vec2&) { return 0.0; };
  w.psi0 = solve_scalar_dirichlet(space, zero, chi, zero);
  // our solver is for -Laplace(u) = f; the weight needs Laplace(psi1) = lambda
  w.psi1 = solve_scalar_dirichlet(space, [lambda](const Vec2&) { return -lambda; },
                                  zero, zero);

  const Mesh& mesh = space.mesh();
  const auto& tq = triangle_quadrature();
  for (int t = 0; t < mesh.triangle_count(); ++t)
    for (const auto& b : tq.bary) {
      Vec2 x = mesh.barycentric_to_point(t, b);
      if (!(w.psi0.scalar_value(t, b) > 0.0))
        throw SolverError("psi0 not positive at interior quadrature point " +
                          point_str(x) + " (mesh too coarse?)");
      if (!(w.psi1.scalar_value(t, b) < 0.0))
        throw SolverError("psi1 not negative at interior quadrature point " +
                          point_str(x) + " (mesh too coarse?)");
    }

  w.theta = std::numeric_limits<double>::infinity();
  for (const auto& p : boundary_quad_points(mesh)) {
    double dn1 = w.psi1.scalar_gradient(p.tri, p.bary).dot(p.be->normal);
    if (!(dn1 > 0.0))
      throw SolverError("dn(psi1) not positive at boundary quadrature point " +
                        point_str(p.x));
    if (p.be->tag == BoundaryTag::Gamma0) {
      double dn0 = w.psi0.scalar_gradient(p.tri, p.bary).dot(p.be->normal);
      if (!(dn0 < 0.0))
        throw SolverError("dn(psi0) not negative at Gamma_0 quadrature point " +
                          point_str(p.x));
      w.theta = std::min(w.theta, std::abs(dn0));
    }
  }

  w.k = 0.0;
  for (int n : space.boundary_nodes(BoundaryTag::GammaE))
    w.k = std::max(w.k, w.psi0.coefficients[n]);
  return w;
}

std::pair<double, double> carleman_functionals(const CarlemanWeight& w,
                                               const AnalyticField& u) {
  const DofSpace& space = *w.space;
  const Mesh& mesh = space.mesh();
  const auto& tq = triangle_quadrature();
  double lhs = 0.0, rhs = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < tq.bary.size(); ++qp) {
      const auto& b = tq.bary[qp];
      Vec2 x = mesh.barycentric_to_point(t, b);
      double e = std::exp(w.psi(t, b));
      double wq = tq.weights[qp] * area;
      double u2 = u.value(x).squaredNorm();
      double g2 = u.gradient(x).squaredNorm();
      lhs += wq * (w.lambda * u2 + (w.lambda - 1.0) * g2) * e;
      rhs += wq * u.laplacian(x).squaredNorm() * e;
    }
  }
  for (const auto& p : boundary_quad_points(mesh)) {
    double e = std::exp(w.psi(p.tri, p.bary));
    double dn = w.grad_psi(p.tri, p.bary).dot(p.be->normal);
    double u2 = u.value(p.x).squaredNorm();
    double g2 = u.gradient(p.x).squaredNorm();
    double tau3 = std::abs(u.grad_sq_tangential(p.x, p.be->tangent));
    rhs += p.weight * dn * (u2 + g2 + 2.0 * tau3) * e;
  }
  return {lhs, rhs};
}

namespace {

double h3_norm(const Mesh& mesh, const AnalyticField& f) {
  const auto& tq = triangle_quadrature();
  double acc = 0.0;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    double area = mesh.triangle_area(t);
    for (size_t qp = 0; qp < tq.bary.size(); ++qp) {
      Vec2 x = mesh.barycentric_to_point(t, tq.bary[qp]);
      double sum = 0.0;
      for (int c = 0; c < f.components; ++c)
        for (int jx = 0; jx <= 3; ++jx)
          for (int jy = 0; jx + jy <= 3; ++jy) {
            double d = f.deriv(c, jx, jy, x);
            sum += d * d;
          }
      acc += tq.weights[qp] * area * sum;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TraceQuantities trace_quantities(const DofSpace& space, const AnalyticField& u,
                                 const AnalyticField& p) {
  const Mesh& mesh = space.mesh();
  TraceQuantities out;
  out.A = h3_norm(mesh, u) + h3_norm(mesh, p);
  double su = 0.0, sp = 0.0, sdu = 0.0, sdp = 0.0;
  for (const auto& pt : boundary_quad_points(mesh)) {
    if (pt.be->tag != BoundaryTag::GammaE) continue;
    const Vec2& n = pt.be->normal;
    su += pt.weight * u.value(pt.x).squaredNorm();
    sdu += pt.weight * (u.gradient(pt.x) * n).squaredNorm();
    double pv = p.deriv(0, 0, 0, pt.x);
    sp += pt.weight * pv * pv;
    double dpdn = p.deriv(0, 1, 0, pt.x) * n.x() + p.deriv(0, 0, 1, pt.x) * n.y();
    sdp += pt.weight * dpdn * dpdn;
  }
  out.B = std::sqrt(su) + std::sqrt(sp) + std::sqrt(sdu) + std::sqrt(sdp);
  return out;
}

TraceQuantities trace_quantities(const StationarySolution& sol) {
  TraceQuantities out;
  out.surrogate = true;  // P2 fields cannot resolve third derivatives
  out.A = l2_norm(sol.u) + h1_seminorm(sol.u) + pressure_l2_norm(sol.p);
  out.B = trace_data_norm(sol.u, sol.p);
  return out;
}

double theoretical_bound(double A, double B, double k, double dtilde) {
  if (!(A > 0.0) || !(B > 0.0)) throw SolverError("trace quantities must be positive");
  if (!(k > 0.0) || dtilde < 1.0) throw SolverError("bad bound parameters");
  auto f = [&](double s) { return std::exp(k * s) * std::sqrt(B) + dtilde * std::sqrt(A) / s; };
  // bracket the minimizer, then golden-section
  double lo = 1e-10, hi = 1.0;
  while (k * hi * hi * std::exp(k * hi) * std::sqrt(B) < dtilde * std::sqrt(A) &&
         hi < 1e8)
    hi *= 2.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * (1.0 + b); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

void write_carleman_csv(const std::vector<CarlemanRecord>& records,
                        const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw SolverError("cannot open " + path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "field_id,lambda,s,lhs,rhs,margin\n";
  char buf[200];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%s,%.12e,%.12e,%.12e,%.12e,%.12e\n",
                  r.field_id.c_str(), r.lambda, r.s, r.lhs, r.rhs, r.margin());
    out << buf;
  }
}

}  // namespace stokesrobin
