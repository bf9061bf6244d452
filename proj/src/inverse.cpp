#include "stokesrobin/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

#include "stokesrobin/evolution.hpp"

namespace stokesrobin {

namespace {

double aggregate_b(const std::vector<BoundaryTracePoint>& traces) {
  double su = 0.0, sp = 0.0, sdu = 0.0, sdp = 0.0;
  for (const auto& pt : traces) {
    su += pt.weight * pt.u.squaredNorm();
    sp += pt.weight * pt.p * pt.p;
    sdu += pt.weight * pt.dudn.squaredNorm();
    sdp += pt.weight * pt.dpdn * pt.dpdn;
  }
  return std::sqrt(su) + std::sqrt(sp) + std::sqrt(sdu) + std::sqrt(sdp);
}

}  // namespace

void BoundaryMeasurement::check_invariants() const {
  double recomputed = aggregate_b(traces);
  if (std::abs(recomputed - B) > 1e-12 * std::max(1.0, B))
    throw SolverError("measurement aggregate B inconsistent with its traces");
}

BoundaryMeasurement extract_measurement(const DiscreteField& u, const DiscreteField& p,
                                        const std::string& acquisition) {
  BoundaryMeasurement meas;
  meas.traces = extract_traces(u, p, BoundaryTag::GammaE);
  meas.B = aggregate_b(meas.traces);
  meas.acquisition = acquisition;
  return meas;
}

CompactSubsetK select_K(const DiscreteField& u_ref, double m) {
  if (!(m > 0.0)) throw SolverError("K threshold m must be positive");
  const DofSpace& space = *u_ref.space;
  const Mesh& mesh = space.mesh();
  const auto& quad = edge_quadrature();
  CompactSubsetK K;
  K.m = m;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::Gamma0) continue;
    int t = be.tri;
    int le = mesh.local_edge_index(be);
    bool forward = (mesh.triangles[t][le] == be.v0);
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double sl = forward ? s : 1.0 - s;
      CompactSubsetK::Point pt;
      pt.tri = t;
      pt.bary = {0.0, 0.0, 0.0};
      pt.bary[le] = 1.0 - sl;
      pt.bary[(le + 1) % 3] = sl;
      pt.x = (1.0 - s) * mesh.vertices[be.v0] + s * mesh.vertices[be.v1];
      pt.weight = 0.5 * quad.weights[qp] * be.length;
      pt.be = &be;
      pt.s = s;
      if (u_ref.velocity_value(t, pt.bary).norm() >= m) {
        K.measure += pt.weight;
        K.points.push_back(pt);
      }
    }
  }
  if (K.points.empty())
    throw SolverError("compact set K is empty: |u_ref| < m everywhere on Gamma_0");
  return K;
}

Reconstruction reconstruct_q_difference(const StationarySolution& sol1,
                                        const StationarySolution& sol2,
                                        const RobinField& q2, const CompactSubsetK& K) {
  if (sol1.u.space != sol2.u.space)
    throw SolverError("twin solutions live on different meshes");
  Reconstruction rec;
  double acc = 0.0;
  for (const auto& pt : K.points) {
    Vec2 u1 = sol1.u.velocity_value(pt.tri, pt.bary);
    double u1n2 = u1.squaredNorm();
    if (u1n2 < K.m * K.m)
      throw SolverError("K contract violated: |u1| < m at an included point");
    Vec2 du = u1 - sol2.u.velocity_value(pt.tri, pt.bary);
    Vec2 ddn = sol1.u.velocity_gradient(pt.tri, pt.bary) * pt.be->normal -
               sol2.u.velocity_gradient(pt.tri, pt.bary) * pt.be->normal;
    double dp = sol1.p.pressure_value(pt.tri, pt.bary) -
                sol2.p.pressure_value(pt.tri, pt.bary);
    Vec2 r = q2.on_edge(*pt.be, pt.s) * du + ddn - dp * pt.be->normal;
    double val = r.dot(u1) / u1n2;
    rec.values.push_back(val);
    acc += pt.weight * val * val;
  }
  rec.l2_K = std::sqrt(acc);
  return rec;
}

double reconstruction_error(const Reconstruction& rec, const CompactSubsetK& K,
                            const RobinField& q1, const RobinField& q2) {
  if (rec.values.size() != K.points.size())
    throw SolverError("reconstruction does not match K");
  double acc = 0.0;
  for (size_t i = 0; i < K.points.size(); ++i) {
    const auto& pt = K.points[i];
    double truth = q2.on_edge(*pt.be, pt.s) - q1.on_edge(*pt.be, pt.s);
    double d = rec.values[i] - truth;
    acc += pt.weight * d * d;
  }
  return std::sqrt(acc);
}

double recover_constant_q(const StationarySolution& sol1,
                          const StationarySolution& sol2, double q2, double m1) {
  if (!(m1 > 0.0)) throw SolverError("flux lower bound m1 must be positive");
  double flux_e = boundary_flux(sol1.u, BoundaryTag::GammaE);
  if (std::abs(flux_e) < m1)
    throw SolverError("Gamma_e flux of the reference solution too small (|" +
                      std::to_string(flux_e) + "| < m1)");
  auto t1 = extract_traces(sol1.u, sol1.p, BoundaryTag::Gamma0);
  auto t2 = extract_traces(sol2.u, sol2.p, BoundaryTag::Gamma0);
  double int_du_n = 0.0, int_ddn_n = 0.0, int_dp = 0.0, int_u1_n = 0.0;
  for (size_t i = 0; i < t1.size(); ++i) {
    const auto& a = t1[i];
    const auto& b = t2[i];
    int_du_n += a.weight * (a.u - b.u).dot(a.normal);
    int_ddn_n += a.weight * (a.dudn - b.dudn).dot(a.normal);
    int_dp += a.weight * (a.p - b.p);
    int_u1_n += a.weight * a.u.dot(a.normal);
  }
  return q2 - (q2 * int_du_n + int_ddn_n - int_dp) / int_u1_n;
}

void StabilityCurve::check_invariants() const {
  for (size_t i = 1; i < records.size(); ++i)
    if (records[i].epsilon < records[i - 1].epsilon)
      throw SolverError("stability records not sorted by noise level");
  for (const auto& r : records)
    if (!(r.B > 0.0)) throw SolverError("stability record with nonpositive B");
}

double StabilityCurve::bound_at(double B_value) const {
  return C / std::sqrt(std::log(C1 / B_value));
}

DataCompletion::DataCompletion(const DofSpace& space, double alpha,
                               const Vector& base_load)
    : space_(&space) {
  const Mesh& mesh = space.mesh();
  RobinField q_alpha(mesh, alpha, alpha);
  SaddleSolver solver(space, q_alpha);
  auto [ub, pb] = solver.solve(base_load);
  base_.u = DiscreteField(space, FieldKind::Velocity);
  base_.u.coefficients = ub;
  base_.p = DiscreteField(space, FieldKind::Pressure);
  base_.p.coefficients = pb;
  d0_ = trace_vector(ub);

  phi_dofs_ = space.robin_velocity_dofs();
  RobinField ones(mesh, 1.0, 1.0);
  SparseMat B0 = assemble_robin_mass(space, ones);
  const int n = static_cast<int>(phi_dofs_.size());
  G_.resize(d0_.size(), n);
  basis_u_.resize(n);
  basis_p_.resize(n);
  for (int j = 0; j < n; ++j) {
    Vector load = B0.col(phi_dofs_[j]);
    auto [uj, pj] = solver.solve(load);
    basis_u_[j] = uj;
    basis_p_[j] = pj;
    G_.col(j) = trace_vector(uj);
  }
  svd_.compute(G_, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

Vector DataCompletion::trace_vector(const Vector& u) const {
  DiscreteField field(*space_, FieldKind::Velocity);
  field.coefficients = u;
  const Mesh& mesh = space_->mesh();
  const auto& quad = edge_quadrature();
  std::vector<double> entries;
  for (const auto& be : mesh.boundary_edges) {
    if (be.tag != BoundaryTag::GammaE) continue;
    int t = be.tri;
    int le = mesh.local_edge_index(be);
    bool forward = (mesh.triangles[t][le] == be.v0);
    for (int qp = 0; qp < 3; ++qp) {
      double s = 0.5 * (quad.points[qp] + 1.0);
      double sl = forward ? s : 1.0 - s;
      std::array<double, 3> b = {0.0, 0.0, 0.0};
      b[le] = 1.0 - sl;
      b[(le + 1) % 3] = sl;
      double w = std::sqrt(0.5 * quad.weights[qp] * be.length);
      Vec2 v = field.velocity_value(t, b);
      entries.push_back(w * v.x());
      entries.push_back(w * v.y());
    }
  }
  return Eigen::Map<Vector>(entries.data(), entries.size());
}

StationarySolution DataCompletion::complete(const Vector& d, double beta) const {
  Vector rhs = d - d0_;
  const auto& sv = svd_.singularValues();
  Vector proj = svd_.matrixU().transpose() * rhs;
  Vector phi_coeff(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    phi_coeff[i] = sv[i] / (sv[i] * sv[i] + beta) * proj[i];
  Vector phi = svd_.matrixV() * phi_coeff;

  StationarySolution sol;
  sol.u = base_.u;
  sol.p = base_.p;
  for (size_t j = 0; j < phi_dofs_.size(); ++j) {
    sol.u.coefficients += phi[j] * basis_u_[j];
    sol.p.coefficients += phi[j] * basis_p_[j];
  }
  return sol;
}

namespace {

struct TraceNoise {
  std::vector<Vec2> u, dudn;
  std::vector<double> p, dpdn;
};

struct TraceScales {
  double u = 0.0, p = 0.0, dudn = 0.0, dpdn = 0.0;
};

TraceScales rms_scales(const std::vector<BoundaryTracePoint>& traces) {
  TraceScales sc;
  double w = 0.0;
  for (const auto& pt : traces) {
    w += pt.weight;
    sc.u += pt.weight * pt.u.squaredNorm() / 2.0;
    sc.p += pt.weight * pt.p * pt.p;
    sc.dudn += pt.weight * pt.dudn.squaredNorm() / 2.0;
    sc.dpdn += pt.weight * pt.dpdn * pt.dpdn;
  }
  sc.u = std::sqrt(sc.u / w);
  sc.p = std::sqrt(sc.p / w);
  sc.dudn = std::sqrt(sc.dudn / w);
  sc.dpdn = std::sqrt(sc.dpdn / w);
  return sc;
}

TraceNoise draw_noise(std::mt19937_64& rng, size_t n, double eps,
                      const TraceScales& sc) {
  std::normal_distribution<double> normal;
  TraceNoise noise;
  noise.u.resize(n);
  noise.dudn.resize(n);
  noise.p.resize(n);
  noise.dpdn.resize(n);
  for (size_t i = 0; i < n; ++i) {
    noise.u[i] = eps * sc.u * Vec2(normal(rng), normal(rng));
    noise.dudn[i] = eps * sc.dudn * Vec2(normal(rng), normal(rng));
    noise.p[i] = eps * sc.p * normal(rng);
    noise.dpdn[i] = eps * sc.dpdn * normal(rng);
  }
  return noise;
}

// B of the (perturbed) difference of two trace sets.
double perturbed_b(const std::vector<BoundaryTracePoint>& t1,
                   const std::vector<BoundaryTracePoint>& t2,
                   const TraceNoise& noise) {
  double su = 0.0, sp = 0.0, sdu = 0.0, sdp = 0.0;
  for (size_t i = 0; i < t1.size(); ++i) {
    double w = t1[i].weight;
    su += w * (t1[i].u - t2[i].u - noise.u[i]).squaredNorm();
    sp += w * std::pow(t1[i].p - t2[i].p - noise.p[i], 2);
    sdu += w * (t1[i].dudn - t2[i].dudn - noise.dudn[i]).squaredNorm();
    sdp += w * std::pow(t1[i].dpdn - t2[i].dpdn - noise.dpdn[i], 2);
  }
  return std::sqrt(su) + std::sqrt(sp) + std::sqrt(sdu) + std::sqrt(sdp);
}

struct LogFit {
  double C = 0.0, C1 = 0.0, residual = 0.0, exponent = 0.0;
};

LogFit fit_log_law(const std::vector<StabilityRecord>& records) {
  double maxB = 0.0;
  for (const auto& r : records)
    if (!r.excluded) maxB = std::max(maxB, r.B);
  // profile the least-squares residual over C1 on a log grid
  LogFit best;
  double best_res = std::numeric_limits<double>::infinity();
  for (int g = 0; g <= 400; ++g) {
    double c1 = maxB * std::pow(10.0, 0.02 + 8.0 * g / 400.0);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : records) {
      if (r.excluded) continue;
      double x = 1.0 / std::sqrt(std::log(c1 / r.B));
      sxx += x * x;
      sxy += x * r.err;
    }
    double c = sxy / sxx;
    double res = 0.0;
    for (const auto& r : records) {
      if (r.excluded) continue;
      double x = 1.0 / std::sqrt(std::log(c1 / r.B));
      res += std::pow(r.err - c * x, 2);
    }
    if (res < best_res) {
      best_res = res;
      best.C1 = c1;
      best.residual = res;
    }
  }
  // lift C to the upper envelope so the bound covers every record
  best.C = 0.0;
  for (const auto& r : records)
    if (!r.excluded)
      best.C = std::max(best.C, r.err * std::sqrt(std::log(best.C1 / r.B)));

  // free-exponent sanity fit: ln err = ln c - p ln ln(C1/B)
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (const auto& r : records) {
    if (r.excluded || !(r.err > 0.0)) continue;
    double x = std::log(std::log(best.C1 / r.B));
    double y = std::log(r.err);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n >= 2) best.exponent = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  return best;
}

}  // namespace

StabilityCurve stability_sweep(const SweepConfig& cfg) {
  if (!cfg.space || !cfg.q1 || !cfg.q2 || !cfg.g)
    throw SolverError("stability sweep misses space, coefficients, or flux");
  if (cfg.noise_levels.empty()) throw SolverError("stability sweep with no noise levels");
  if (cfg.trials < 1) throw SolverError("stability sweep needs at least one trial");
  const DofSpace& space = *cfg.space;

  Vector load = assemble_neumann_load(space, cfg.g);
  SaddleSolver solver1(space, *cfg.q1), solver2(space, *cfg.q2);
  auto mk = [&](SaddleSolver& s) {
    auto [u, p] = s.solve(load);
    StationarySolution sol;
    sol.u = DiscreteField(space, FieldKind::Velocity);
    sol.u.coefficients = u;
    sol.p = DiscreteField(space, FieldKind::Pressure);
    sol.p.coefficients = p;
    return sol;
  };
  StationarySolution sol1 = mk(solver1), sol2 = mk(solver2);
  CompactSubsetK K = select_K(sol1.u, cfg.m);

  auto e1 = extract_traces(sol1.u, sol1.p, BoundaryTag::GammaE);
  auto e2 = extract_traces(sol2.u, sol2.p, BoundaryTag::GammaE);
  TraceScales scales = rms_scales(e2);
  DataCompletion completion(space, cfg.q2->alpha(), load);
  Vector d2 = completion.trace_vector(sol2.u.coefficients);

  // evolution variant: per-sample difference traces along the q2 trajectory
  // started from the q1 equilibrium (the q1 trajectory stays at sol1)
  std::vector<std::vector<BoundaryTracePoint>> sample_traces;
  if (cfg.horizon > 0.0) {
    if (!cfg.es) throw SolverError("evolution sweep needs an eigensystem");
    EvolutionProblem ep;
    ep.space = &space;
    ep.q = cfg.q2;
    ep.u0 = sol1.u;
    ep.g = cfg.g;
    ep.horizon = cfg.horizon;
    ep.dt = cfg.dt;
    ep.max_samples = 40;
    Trajectory traj = propagate_spectral(ep, *cfg.es);
    for (const auto& sample : traj.samples)
      sample_traces.push_back(extract_traces(sample.u, sample.p, BoundaryTag::GammaE));
  }

  StabilityCurve curve;
  curve.m = cfg.m;
  curve.M1 = cfg.M1;
  curve.M2 = cfg.M2;
  for (size_t lvl = 0; lvl < cfg.noise_levels.size(); ++lvl) {
    double eps = cfg.noise_levels[lvl];
    for (int trial = 0; trial < cfg.trials; ++trial) {
      std::seed_seq seq{static_cast<unsigned>(cfg.seed & 0xffffffffu),
                        static_cast<unsigned>(cfg.seed >> 32),
                        static_cast<unsigned>(lvl), static_cast<unsigned>(trial)};
      std::mt19937_64 rng(seq);
      TraceNoise noise = draw_noise(rng, e2.size(), eps, scales);

      double B;
      if (cfg.horizon > 0.0) {
        B = 0.0;
        for (const auto& st : sample_traces) {
          TraceNoise sample_noise = draw_noise(rng, st.size(), eps, scales);
          B = std::max(B, perturbed_b(e1, st, sample_noise));
        }
      } else {
        B = perturbed_b(e1, e2, noise);
      }

      // noisy measured trace of solution 2, then data completion
      Vector d = d2;
      for (size_t i = 0; i < e2.size(); ++i) {
        double w = std::sqrt(e2[i].weight);
        d[2 * i] += w * noise.u[i].x();
        d[2 * i + 1] += w * noise.u[i].y();
      }
      double beta = cfg.regularization_scale * std::pow(eps * scales.u, 2) + 1e-14;
      StationarySolution completed = completion.complete(d, beta);
      Reconstruction rec = reconstruct_q_difference(sol1, completed, *cfg.q2, K);

      StabilityRecord record;
      record.epsilon = eps;
      record.trial = trial;
      record.B = B;
      record.err = reconstruction_error(rec, K, *cfg.q1, *cfg.q2);
      curve.records.push_back(record);
    }
  }
  std::stable_sort(curve.records.begin(), curve.records.end(),
                   [](const StabilityRecord& a, const StabilityRecord& b) {
                     return a.epsilon < b.epsilon;
                   });

  // exclusion pass: records whose B reaches the fitted C1 have no valid bound
  LogFit fit = fit_log_law(curve.records);
  curve.excluded_count = 0;
  for (auto& r : curve.records)
    if (r.B >= fit.C1) {
      r.excluded = true;
      ++curve.excluded_count;
    }
  if (curve.excluded_count > 0) fit = fit_log_law(curve.records);
  curve.C = fit.C;
  curve.C1 = fit.C1;
  curve.fit_residual = fit.residual;
  curve.free_exponent = fit.exponent;
  curve.check_invariants();
  return curve;
}

void write_stability_csv(const StabilityCurve& curve, const std::string& csv_path,
                         const std::string& json_path,
                         const std::string& header_comment) {
  std::ofstream out(csv_path);
  if (!out) throw SolverError("cannot open " + csv_path);
  if (!header_comment.empty()) out << "# " << header_comment << "\n";
  out << "epsilon,trial,B,err_L2K,excluded\n";
  char buf[160];
  for (const auto& r : curve.records) {
    std::snprintf(buf, sizeof(buf), "%.12e,%d,%.12e,%.12e,%d\n", r.epsilon, r.trial,
                  r.B, r.err, r.excluded ? 1 : 0);
    out << buf;
  }
  out.close();

  std::ofstream js(json_path);
  if (!js) throw SolverError("cannot open " + json_path);
  char jbuf[512];
  std::snprintf(jbuf, sizeof(jbuf),
                "{\n  \"C\": %.12e,\n  \"C1\": %.12e,\n  \"fit_residual\": %.12e,\n"
                "  \"free_exponent\": %.12e,\n  \"excluded\": %d,\n  \"m\": %.12e,\n"
                "  \"M1\": %.12e,\n  \"M2\": %.12e,\n  \"records\": %d\n}\n",
                curve.C, curve.C1, curve.fit_residual, curve.free_exponent,
                curve.excluded_count, curve.m, curve.M1, curve.M2,
                static_cast<int>(curve.records.size()));
  js << jbuf;
}

}  // namespace stokesrobin
