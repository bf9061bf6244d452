#pragma once

#include <cstdint>

#include "stokesrobin/spectral.hpp"

namespace stokesrobin {

struct BoundaryMeasurement {
  std::vector<BoundaryTracePoint> traces;  // Gamma_e quadrature points
  double B = 0.0;
  std::string acquisition = "stationary";

  void check_invariants() const;  // B matches its four constituent norms
};

BoundaryMeasurement extract_measurement(const DiscreteField& u, const DiscreteField& p,
                                        const std::string& acquisition = "stationary");

/// Gamma_0 quadrature points where the reference velocity stays >= m.
struct CompactSubsetK {
  struct Point {
    int tri = -1;
    std::array<double, 3> bary;
    Vec2 x;
    double weight = 0.0;
    const BoundaryEdge* be = nullptr;
    double s = 0.0;  // coordinate along the edge, v0 -> v1
  };
  std::vector<Point> points;
  double m = 0.0;
  double measure = 0.0;  // arc length covered by the included points
};

CompactSubsetK select_K(const DiscreteField& u_ref, double m);

struct Reconstruction {
  std::vector<double> values;  // q2 - q1 estimate at each K point
  double l2_K = 0.0;
};

/// Trace identity (q2 - q1) u1 = q2 (u1 - u2) + dn(u1 - u2) - (p1 - p2) n on
/// Gamma_0, collapsed to a scalar by projection onto u1.
Reconstruction reconstruct_q_difference(const StationarySolution& sol1,
                                        const StationarySolution& sol2,
                                        const RobinField& q2, const CompactSubsetK& K);

/// L2(K) distance between a reconstruction and the prescribed q2 - q1.
double reconstruction_error(const Reconstruction& rec, const CompactSubsetK& K,
                            const RobinField& q1, const RobinField& q2);

/// Constant-coefficient special case: integrate the identity against n over
/// Gamma_0; requires |int_Gamma_e u1.n| >= m1.
double recover_constant_q(const StationarySolution& sol1,
                          const StationarySolution& sol2, double q2, double m1);

struct StabilityRecord {
  double epsilon = 0.0;
  int trial = 0;
  double B = 0.0;
  double err = 0.0;  // |rec - (q2 - q1)|_{L2(K)}
  bool excluded = false;
};

struct StabilityCurve {
  std::vector<StabilityRecord> records;  // sorted by epsilon
  double C = 0.0, C1 = 0.0;              // err <= C / sqrt(ln(C1 / B))
  double fit_residual = 0.0;
  double free_exponent = 0.0;            // sanity fit err ~ (ln(C1/B))^{-p}
  int excluded_count = 0;
  double m = 0.0, M1 = 0.0, M2 = 0.0;    // experiment metadata

  void check_invariants() const;
  double bound_at(double B_value) const;
};

struct SweepConfig {
  const DofSpace* space = nullptr;
  const RobinField* q1 = nullptr;  // reference twin
  const RobinField* q2 = nullptr;  // "measured" twin
  BoundaryFn g;                    // shared Neumann data on Gamma_e
  double m = 0.1;                  // K threshold on |u1|
  std::vector<double> noise_levels;
  int trials = 10;
  std::uint64_t seed = 1;
  double regularization_scale = 1.0;

  // evolution variant: B taken as the max over a spectral trajectory
  const EigenSystem* es = nullptr;
  double horizon = 0.0;  // 0 -> stationary sweep
  double dt = 1e-2;

  double M1 = 0.0, M2 = 0.0;  // a-priori bound metadata, recorded only
};

StabilityCurve stability_sweep(const SweepConfig& cfg);

void write_stability_csv(const StabilityCurve& curve, const std::string& csv_path,
                         const std::string& json_path,
                         const std::string& header_comment);

/// Regularized completion of the Gamma_0 data from a measured Gamma_e velocity
/// trace: unknown phi = (alpha - q) u on Gamma_0, u(phi) affine in phi.
class DataCompletion {
 public:
  DataCompletion(const DofSpace& space, double alpha, const Vector& base_load);

  /// Stacked sqrt(weight)-scaled Gamma_e velocity samples of a coefficient
  /// vector, in the fixed extract_traces ordering.
  Vector trace_vector(const Vector& u) const;
  /// Tikhonov-regularized completed solution matching the measured trace d.
  StationarySolution complete(const Vector& d, double beta) const;
  int trace_size() const { return static_cast<int>(d0_.size()); }
  const StationarySolution& base_solution() const { return base_; }

 private:
  const DofSpace* space_;
  std::vector<int> phi_dofs_;
  std::vector<Vector> basis_u_, basis_p_;
  Eigen::MatrixXd G_;
  Eigen::BDCSVD<Eigen::MatrixXd> svd_;
  Vector d0_;
  StationarySolution base_;
};

}  // namespace stokesrobin
