#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "zeno/linalg.hpp"
#include "zeno/operators.hpp"
#include "zeno/rng.hpp"
#include "zeno/sat.hpp"

namespace zeno::dyn {

using DensityMatrix = Mat;

enum class RateShare {
  per_clause,  // one clause at a time: rate 1/(m tau) per clause
  parallel,    // all clauses monitored simultaneously at rate 1/tau
};

struct MeasurementConfig {
  double dt = 0.01;
  double tau = 1.0;
  RateShare rate_share = RateShare::per_clause;
};

void validate(const MeasurementConfig& cfg);

/// beta = 1 - exp(-dt / 2 tau).
double beta(const MeasurementConfig& cfg);

/// m' in the 1/m' prefactor: m for per_clause, 1 for parallel.
double share_count(const MeasurementConfig& cfg, std::size_t m);

/// Piecewise-constant-left schedule. axes[j] holds on [times[j], times[j+1]);
/// the final axis is carried at T_f for reporting.
struct Schedule {
  std::vector<double> times;
  std::vector<ops::Axis> axes;

  int intervals() const { return static_cast<int>(times.size()) - 1; }
  double horizon() const { return times.back(); }
  void validate(int n) const;
};

/// theta(t) = theta_i + (theta_f - theta_i) t / T_f, sampled at interval midpoints.
Schedule linear_schedule(int n, double T_f, int intervals, double theta_i, double theta_f);

/// Uniform grid with one row of per-qubit angles per interval (cols 1 or n).
Schedule schedule_from_values(int n, double T_f, const Mat& values);

/// Interval values as a (intervals x n) matrix.
Mat schedule_values(const Schedule& s);

bool is_global(const Schedule& s);

DensityMatrix pure_state(const Vec& psi);
void check_state(const DensityMatrix& rho, double tol = 1e-10);
double fidelity(const DensityMatrix& rho, const Mat& target);
double purity(const DensityMatrix& rho);

Mat kraus_operator(const Mat& P, double r, const MeasurementConfig& cfg);

struct MeasurementSample {
  DensityMatrix state;
  double readout = 0.0;
};

MeasurementSample sample_measurement(const DensityMatrix& rho, const Mat& P, const MeasurementConfig& cfg, Rng& rng);

DensityMatrix averaged_channel(const DensityMatrix& rho, const std::vector<Mat>& P, const MeasurementConfig& cfg);

/// rate * sum_alpha (P rho P - {P, rho}/2).
Mat lindblad_rhs(const DensityMatrix& rho, const std::vector<Mat>& P, double rate);

struct LindbladOptions {
  /// Upper bound on the RK4 step; the effective step also obeys total-rate * h <= 0.1.
  double max_step = 0.1;
  bool store_states = false;
};

struct LindbladTrace {
  std::vector<double> times;  // schedule grid
  std::vector<double> fidelity;
  std::vector<DensityMatrix> states;  // at grid points, when requested
  DensityMatrix final_state;
  int steps = 0;
};

LindbladTrace evolve_lindblad(const DensityMatrix& rho0, const sat::SatInstance& instance, const Schedule& schedule,
                              const MeasurementConfig& cfg, const Mat& target, const LindbladOptions& opt = {});

enum class TrajectoryMode { sme, kraus };

struct TrajectoryOptions {
  TrajectoryMode mode = TrajectoryMode::sme;
  /// Replay a fixed m x steps readout record instead of sampling (sme only).
  const Mat* prescribed = nullptr;
  /// Stop once the fidelity drops below this value.
  std::optional<double> truncate_below;
  bool record_traces = true;
};

struct TrajectoryRecord {
  Mat readouts;  // m x steps; NaN where a clause was not measured (kraus)
  std::vector<double> times;
  std::vector<double> fidelity_trace;
  std::vector<double> purity_trace;
  DensityMatrix final_state;
  double final_fidelity = 0.0;
  std::optional<int> truncated_at;
};

/// Time steps used by evolve_trajectory: each schedule interval is split into
/// ceil(length / cfg.dt) equal steps.
std::vector<double> trajectory_grid(const Schedule& schedule, const MeasurementConfig& cfg);

TrajectoryRecord evolve_trajectory(const DensityMatrix& rho0, const sat::SatInstance& instance,
                                   const Schedule& schedule, const MeasurementConfig& cfg, Rng& rng,
                                   const Mat& target, const TrajectoryOptions& opt = {});

struct EnsembleRun {
  std::vector<double> final_fidelities;
  DensityMatrix mean_state;
  Mat state_std_error;  // entrywise standard error of the mean state
};

/// Independent shots on substreams (seed, 1, shot); thread count does not
/// change the result.
EnsembleRun run_ensemble(const DensityMatrix& rho0, const sat::SatInstance& instance, const Schedule& schedule,
                         const MeasurementConfig& cfg, const Mat& target, std::uint64_t seed, int shots,
                         TrajectoryMode mode, int threads = 0);

struct EnsembleSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  std::vector<double> bin_edges;
  std::vector<std::size_t> histogram;
  std::optional<double> cutoff;
  std::size_t retained = 0;
  double retained_fraction = 0.0;
  /// Empty when the cutoff removes every record.
  std::optional<double> post_selected_mean;
  std::optional<double> post_selected_std_error;
};

EnsembleSummary ensemble_statistics(const std::vector<double>& final_fidelities, std::optional<double> cutoff,
                                    int bins = 20);
EnsembleSummary ensemble_statistics(const std::vector<TrajectoryRecord>& records, std::optional<double> cutoff,
                                    int bins = 20);

}  // namespace zeno::dyn
