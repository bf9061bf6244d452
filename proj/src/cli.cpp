#include "stokesrobin/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "stokesrobin/carleman.hpp"
#include "stokesrobin/evolution.hpp"
#include "stokesrobin/export.hpp"
#include "stokesrobin/inverse.hpp"

namespace stokesrobin::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  bool verbose = false;
};

// FNV-1a over the raw config bytes; stamped into every output header.
std::string hash_bytes(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct Experiment {
  json cfg;
  std::string config_hash;
  fs::path out_dir;
  std::uint64_t seed = 20260823;
  bool verbose = false;

  std::string stamp() const { return "config=" + config_hash + " seed=" + std::to_string(seed); }
  fs::path out(const std::string& name) const { return out_dir / name; }
};

double jget(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Experiment load_experiment(const Options& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot read config " + opt.config_path);
  std::stringstream ss;
  ss << in.rdbuf();
  Experiment exp;
  try {
    exp.cfg = json::parse(ss.str());
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  exp.config_hash = hash_bytes(ss.str());
  exp.verbose = opt.verbose;

  std::string out = exp.cfg.value("output_dir", "out");
  if (const char* env = std::getenv("STOKESROBIN_OUT")) out = env;
  if (!opt.out_override.empty()) out = opt.out_override;
  exp.out_dir = out;
  fs::create_directories(exp.out_dir);

  if (exp.cfg.contains("inverse") && exp.cfg["inverse"].contains("seed"))
    exp.seed = exp.cfg["inverse"]["seed"].get<std::uint64_t>();
  if (opt.seed_set) exp.seed = opt.seed;

  const json& g = exp.cfg.value("geometry", json::object());
  double r0 = jget(g, "R0", 0.5), r1 = jget(g, "R1", 1.0), h = jget(g, "h", 0.1);
  if (!(r0 > 0.0) || !(r1 > r0)) throw ConfigError("geometry requires 0 < R0 < R1");
  if (!(h > 0.0)) throw ConfigError("geometry requires h > 0");
  int refs = static_cast<int>(jget(g, "refinements", 0));
  if (refs < 0 || refs > 6) throw ConfigError("refinements out of range [0,6]");
  if (exp.cfg.contains("robin") && jget(exp.cfg["robin"], "alpha", 1.0) <= 0.0)
    throw ConfigError("robin alpha must be positive");
  if (exp.cfg.contains("solver") && jget(exp.cfg["solver"], "tolerance", 1e-10) <= 0.0)
    throw ConfigError("solver tolerance must be positive");
  return exp;
}

AnnulusSpec annulus_spec(const Experiment& exp) {
  const json& g = exp.cfg.value("geometry", json::object());
  AnnulusSpec spec;
  spec.inner_radius = jget(g, "R0", 0.5);
  spec.outer_radius = jget(g, "R1", 1.0);
  spec.target_edge_length = jget(g, "h", 0.1);
  return spec;
}

int refinements(const Experiment& exp) {
  return static_cast<int>(jget(exp.cfg.value("geometry", json::object()), "refinements", 0));
}

std::function<double(const Vec2&)> angular_interp(const std::vector<double>& vals) {
  return [vals](const Vec2& x) {
    double theta = std::atan2(x.y(), x.x());
    if (theta < 0.0) theta += 2.0 * M_PI;
    double pos = theta / (2.0 * M_PI) * vals.size();
    size_t i = static_cast<size_t>(pos) % vals.size();
    double frac = pos - std::floor(pos);
    return (1.0 - frac) * vals[i] + frac * vals[(i + 1) % vals.size()];
  };
}

RobinField make_robin(const Experiment& exp, const Mesh& mesh, const json& spec) {
  double alpha = jget(spec, "alpha", 1.0);
  std::string type = spec.value("type", "constant");
  if (type == "constant") return RobinField(mesh, jget(spec, "value", 2.0), alpha);
  if (type == "nodal") {
    std::vector<double> vals = spec.at("values").get<std::vector<double>>();
    if (vals.empty()) throw ConfigError("robin nodal values empty");
    return RobinField(mesh, angular_interp(vals), alpha);
  }
  throw ConfigError("unknown robin type " + type);
}

RobinField make_robin(const Experiment& exp, const Mesh& mesh) {
  return make_robin(exp, mesh, exp.cfg.value("robin", json::object()));
}

BoundaryFn make_flux(const Experiment& exp) {
  const json& f = exp.cfg.value("flux", json::object());
  std::string preset = f.value("preset", "rigid_rotation");
  double r1 = annulus_spec(exp).outer_radius;
  double mag = jget(f, "magnitude", 1.0);
  if (preset == "rigid_rotation")
    return [r1, mag](const Vec2& x) { return Vec2(-mag * x.y() / r1, mag * x.x() / r1); };
  if (preset == "radial")
    return [mag](const Vec2& x) { return Vec2(mag * x / x.norm()); };
  if (preset == "custom") {
    auto vx = angular_interp(f.at("values_x").get<std::vector<double>>());
    auto vy = angular_interp(f.at("values_y").get<std::vector<double>>());
    return [vx, vy](const Vec2& x) { return Vec2(vx(x), vy(x)); };
  }
  throw ConfigError("unknown flux preset " + preset);
}

std::optional<TimeFlux> make_time_flux(const Experiment& exp) {
  const json& f = exp.cfg.value("flux", json::object());
  if (!f.contains("time_dependent")) return std::nullopt;
  const json& td = f["time_dependent"];
  double h0 = jget(td, "limit", 1.0);
  double rho0 = jget(td, "transient", 1.0);
  double theta = jget(td, "rate", 1.0);
  TimeFlux tf;
  tf.limit = [h0](const Vec2&) { return h0; };
  tf.profile = [rho0](const Vec2&) { return rho0; };
  tf.amplitude = [theta](double t) { return std::exp(-theta * t); };
  tf.amplitude_rate = [theta](double t) { return -theta * std::exp(-theta * t); };
  return tf;
}

Mesh make_mesh(const Experiment& exp, int extra_refines = 0) {
  Mesh mesh = build_annulus(annulus_spec(exp));
  for (int r = 0; r < extra_refines; ++r) mesh = refine(mesh);
  mesh.check_invariants();
  return mesh;
}

// ---- subcommands -----------------------------------------------------------

int cmd_mesh(const Experiment& exp) {
  int refs = refinements(exp);
  std::vector<std::vector<double>> rows;
  for (int r = 0; r <= refs; ++r) {
    Mesh mesh = make_mesh(exp, r);
    write_mesh_vtk(mesh, exp.out("mesh_l" + std::to_string(r) + ".vtk").string(),
                   exp.stamp());
    rows.push_back({static_cast<double>(r), static_cast<double>(mesh.vertex_count()),
                    static_cast<double>(mesh.triangle_count()), mesh.total_area(),
                    mesh.boundary_length(BoundaryTag::GammaE),
                    mesh.boundary_length(BoundaryTag::Gamma0)});
  }
  write_csv(exp.out("mesh_stats.csv").string(), exp.stamp(),
            {"level", "vertices", "triangles", "area", "len_gamma_e", "len_gamma_0"},
            rows);
  return 0;
}

int cmd_solve_stationary(const Experiment& exp) {
  int refs = refinements(exp);
  BoundaryFn g = make_flux(exp);
  double tol = jget(exp.cfg.value("solver", json::object()), "tolerance", 1e-10);
  std::vector<std::vector<double>> rows;
  for (int r = 0; r <= refs; ++r) {
    Mesh mesh = make_mesh(exp, r);
    DofSpace space(mesh);
    RobinField q = make_robin(exp, mesh);
    StationaryProblem problem{&space, &q, g, nullptr, nullptr};
    StationarySolution sol = solve_stationary(problem, tol);
    write_solution_vtk(sol.u, sol.p,
                       exp.out("stationary_l" + std::to_string(r) + ".vtk").string(),
                       exp.stamp());
    double err = -1.0;
    if (exp.cfg.value("flux", json::object()).value("preset", "rigid_rotation") ==
        "rigid_rotation")
      err = l2_error(sol.u, [](const Vec2& x) { return Vec2(-x.y(), x.x()); });
    rows.push_back({static_cast<double>(r),
                    static_cast<double>(space.velocity_dof_count()), sol.residual,
                    sol.energy, err});
  }
  write_csv(exp.out("stationary_convergence.csv").string(), exp.stamp(),
            {"level", "velocity_dofs", "residual", "energy", "l2_error"}, rows);
  return 0;
}

int cmd_solve_evolution(const Experiment& exp) {
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  RobinField q = make_robin(exp, mesh);
  const json& tj = exp.cfg.value("time", json::object());

  EvolutionProblem problem;
  problem.space = &space;
  problem.q = &q;
  problem.u0 = DiscreteField(space, FieldKind::Velocity);
  problem.g = make_flux(exp);
  problem.kappa = make_time_flux(exp);
  problem.dt = jget(tj, "dt", 1e-2);
  problem.horizon = jget(tj, "T", 1.0);

  Trajectory traj = step_implicit_euler(problem);
  Vector load = problem.kappa
                    ? assemble_normal_flux_load(space, problem.kappa->limit)
                    : assemble_neumann_load(space, problem.g);
  SaddleSolver solver(space, q);
  auto [v, pv] = solver.solve(load);
  StationarySolution limit;
  limit.u = DiscreteField(space, FieldKind::Velocity);
  limit.u.coefficients = v;
  limit.p = DiscreteField(space, FieldKind::Pressure);
  limit.p.coefficients = pv;

  write_trajectory_csv(traj, limit, exp.out("trajectory.csv").string(), exp.stamp());
  const auto& last = traj.samples.back();
  write_solution_vtk(last.u, last.p, exp.out("evolution_final.vtk").string(),
                     exp.stamp());
  return 0;
}

int cmd_eigs(const Experiment& exp) {
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  RobinField q = make_robin(exp, mesh);
  int count = static_cast<int>(jget(exp.cfg.value("eigs", json::object()), "count", 5));
  EigenOptions opts;
  opts.seed = static_cast<unsigned>(exp.seed);
  EigenSystem es = build_eigensystem(space, q, count, opts);
  es.check_invariants();
  write_eigenvalue_csv(es, exp.out("eigenvalues.csv").string(),
                       exp.stamp() + " mu=" + std::to_string(es.mu));
  for (int l = 0; l < std::min(3, es.count()); ++l) {
    DiscreteField phi(space, FieldKind::Velocity);
    phi.coefficients = es.eigenvectors[l];
    DiscreteField zero_p(space, FieldKind::Pressure);
    write_solution_vtk(phi, zero_p,
                       exp.out("eigenfield_" + std::to_string(l + 1) + ".vtk").string(),
                       exp.stamp());
  }
  return 0;
}

int cmd_weights(const Experiment& exp) {
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  const json& cj = exp.cfg.value("carleman", json::object());
  double lambda = cj.contains("lambda") ? cj["lambda"][0].get<double>() : 2.0;
  double s = cj.contains("s") ? cj["s"][0].get<double>() : 1.0;
  CarlemanWeight w =
      build_weights(space, lambda, s, [](const Vec2&) { return 1.0; });
  write_solution_vtk(/*abuse: psi0 gradient-free scalar*/
                     [&] {
                       DiscreteField vel(space, FieldKind::Velocity);
                       for (int v = 0; v < mesh.vertex_count(); ++v)
                         vel.coefficients[2 * v] = w.psi0.coefficients[v];
                       return vel;
                     }(),
                     [&] {
                       DiscreteField p(space, FieldKind::Pressure);
                       for (int v = 0; v < mesh.vertex_count(); ++v)
                         p.coefficients[v] = w.psi1.coefficients[v];
                       return p;
                     }(),
                     exp.out("weights.vtk").string(), exp.stamp());
  write_csv(exp.out("weights.csv").string(), exp.stamp(),
            {"lambda", "s", "k", "theta"}, {{w.lambda, w.s, w.k, w.theta}});
  return 0;
}

int cmd_carleman_check(const Experiment& exp) {
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  const json& cj = exp.cfg.value("carleman", json::object());
  std::vector<double> lambdas = cj.contains("lambda")
                                    ? cj["lambda"].get<std::vector<double>>()
                                    : std::vector<double>{2.0, 4.0};
  std::vector<double> ss = cj.contains("s") ? cj["s"].get<std::vector<double>>()
                                            : std::vector<double>{1.0, 2.0, 4.0, 8.0};
  std::vector<CarlemanRecord> records;
  bool violated = false;
  for (double lambda : lambdas)
    for (double s : ss) {
      CarlemanWeight w = build_weights(space, lambda, s, [](const Vec2&) { return 1.0; });
      for (const auto& field : analytic_suite()) {
        auto [lhs, rhs] = carleman_functionals(w, field);
        records.push_back({field.id, lambda, s, lhs, rhs});
        if (rhs - lhs < -1e-8 * (std::abs(lhs) + std::abs(rhs))) violated = true;
      }
    }
  write_carleman_csv(records, exp.out("carleman.csv").string(), exp.stamp());
  if (violated)
    throw InvariantError("Carleman inequality violated beyond quadrature tolerance");
  return 0;
}

json inverse_cfg(const Experiment& exp) { return exp.cfg.value("inverse", json::object()); }

int cmd_invert(const Experiment& exp) {
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  RobinField q1 = make_robin(exp, mesh);
  json inv = inverse_cfg(exp);
  RobinField q2 = inv.contains("q2") ? make_robin(exp, mesh, inv["q2"])
                                     : RobinField(mesh, 2.1, q1.alpha());
  BoundaryFn g = make_flux(exp);
  double tol = jget(exp.cfg.value("solver", json::object()), "tolerance", 1e-10);
  StationaryProblem p1{&space, &q1, g, nullptr, nullptr};
  StationaryProblem p2{&space, &q2, g, nullptr, nullptr};
  StationarySolution sol1 = solve_stationary(p1, tol);
  StationarySolution sol2 = solve_stationary(p2, tol);
  CompactSubsetK K = select_K(sol1.u, jget(inv, "m", 0.1));
  Reconstruction rec = reconstruct_q_difference(sol1, sol2, q2, K);
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < K.points.size(); ++i) {
    const auto& pt = K.points[i];
    double theta = std::atan2(pt.x.y(), pt.x.x());
    rows.push_back({theta, rec.values[i],
                    q2.on_edge(*pt.be, pt.s) - q1.on_edge(*pt.be, pt.s)});
  }
  write_csv(exp.out("reconstruction.csv").string(), exp.stamp(),
            {"theta", "q_diff_rec", "q_diff_true"}, rows);
  return 0;
}

int cmd_stability_curve(const Experiment& exp, bool evolution_variant) {
  json inv = inverse_cfg(exp);
  if (!inv.contains("noise_levels") || inv["noise_levels"].empty())
    throw ConfigError("stability sweep requires a nonempty noise_levels list");
  Mesh mesh = make_mesh(exp);
  DofSpace space(mesh);
  RobinField q1 = make_robin(exp, mesh);
  RobinField q2 = inv.contains("q2") ? make_robin(exp, mesh, inv["q2"])
                                     : RobinField(mesh, 2.1, q1.alpha());
  SweepConfig cfg;
  cfg.space = &space;
  cfg.q1 = &q1;
  cfg.q2 = &q2;
  cfg.g = make_flux(exp);
  cfg.m = jget(inv, "m", 0.1);
  cfg.noise_levels = inv["noise_levels"].get<std::vector<double>>();
  cfg.trials = static_cast<int>(jget(inv, "trials", 10));
  cfg.seed = exp.seed;
  cfg.M1 = jget(inv, "M1", 0.0);
  cfg.M2 = jget(inv, "M2", 0.0);

  EigenSystem es;
  if (evolution_variant) {
    EigenOptions opts;
    opts.seed = static_cast<unsigned>(exp.seed);
    es = build_eigensystem(space, q2, 12, opts);
    cfg.es = &es;
    cfg.horizon = 20.0 / es.mu;
    cfg.dt = jget(exp.cfg.value("time", json::object()), "dt", 1e-2);
  }
  StabilityCurve curve = stability_sweep(cfg);
  write_stability_csv(curve, exp.out("stability.csv").string(),
                      exp.out("stability.json").string(), exp.stamp());
  return 0;
}

int cmd_report(const Experiment& exp) {
  std::ofstream out(exp.out("report.csv"));
  if (!out) throw SolverError("cannot open report.csv");
  out << "# " << exp.stamp() << "\n";
  out << "artifact,rows\n";
  for (const auto& entry : fs::directory_iterator(exp.out_dir)) {
    if (entry.path().extension() != ".csv" || entry.path().filename() == "report.csv")
      continue;
    std::ifstream in(entry.path());
    int lines = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') ++lines;
    out << entry.path().filename().string() << "," << std::max(0, lines - 1) << "\n";
  }
  return 0;
}

// marker naming the failed stage, removed on success
struct StageMarker {
  fs::path path;
  StageMarker(const Experiment& exp, const std::string& stage)
      : path(exp.out("partial_run_" + stage + ".marker")) {
    std::ofstream out(path);
    out << "stage " << stage << " did not complete\n";
  }
  void done() const { fs::remove(path); }
};

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Stokes-Robin forward/inverse toolkit"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "JSON config path")->required();
  app.add_option("--out", opt.out_override, "output directory override");
  auto* seed_opt = app.add_option("--seed", opt.seed, "RNG seed override");
  app.add_option("--threads", opt.threads, "thread count (1 reproduces parallel runs)");
  app.add_flag("--verbose", opt.verbose, "progress output");

  const std::vector<std::string> names = {
      "mesh",          "solve-stationary", "solve-evolution",
      "eigs",          "weights",          "carleman-check",
      "invert",        "stability-curve",  "stability-curve-evolution",
      "report"};
  for (const auto& n : names) app.add_subcommand(n)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  opt.seed_set = seed_opt->count() > 0;
  if (const char* env = std::getenv("STOKESROBIN_THREADS")) opt.threads = std::atoi(env);
  if (opt.threads > 0) Eigen::setNbThreads(opt.threads);

  std::string sub = app.get_subcommands().front()->get_name();
  try {
    Experiment exp = load_experiment(opt);
    if (exp.verbose) std::cerr << "[stokesrobin] " << sub << " " << exp.stamp() << "\n";
    StageMarker marker(exp, sub);
    int rc = 0;
    if (sub == "mesh") rc = cmd_mesh(exp);
    else if (sub == "solve-stationary") rc = cmd_solve_stationary(exp);
    else if (sub == "solve-evolution") rc = cmd_solve_evolution(exp);
    else if (sub == "eigs") rc = cmd_eigs(exp);
    else if (sub == "weights") rc = cmd_weights(exp);
    else if (sub == "carleman-check") rc = cmd_carleman_check(exp);
    else if (sub == "invert") rc = cmd_invert(exp);
    else if (sub == "stability-curve") rc = cmd_stability_curve(exp, false);
    else if (sub == "stability-curve-evolution") rc = cmd_stability_curve(exp, true);
    else if (sub == "report") rc = cmd_report(exp);
    marker.done();
    return rc;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const MeshError& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace stokesrobin::cli
