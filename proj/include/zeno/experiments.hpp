#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zeno/control.hpp"
#include "zeno/dynamics.hpp"
#include "zeno/linalg.hpp"
#include "zeno/sat.hpp"

namespace zeno::exp {

struct SpectrumRow {
  double theta = 0.0;
  Vec eigenvalues;  // ascending
  double gap = 0.0;
};

/// Eigenvalues of O(theta) on `points` uniform angles in [lo, hi].
std::vector<SpectrumRow> spectrum_scan(const sat::SatInstance& instance, int points, double lo = 0.0,
                                       double hi = 1.5707963267948966);

/// Lindblad fidelity to the solution projector at the schedule grid points.
struct FidelityCurve {
  std::string label;
  double T_f = 0.0;
  Mat values;  // intervals x tracks
  std::vector<double> times;
  std::vector<double> fidelity;
  double final_fidelity = 0.0;
};

FidelityCurve lindblad_curve(const ctl::ControlProblem& p, const Mat& values, const std::string& label);

struct Fig3Config {
  int n = 2;
  std::vector<double> horizons{1.0, 2.0, 5.0};
  int grid_size = 100;
  ctl::GrapeConfig grape{.max_iters = 1000};
  int spectrum_points = 91;
};

struct Fig3Result {
  std::vector<SpectrumRow> spectrum;
  /// Per horizon: linear, lindblad_ofs, mlp_ofs.
  std::vector<FidelityCurve> curves;
};

Fig3Result run_fig3(const Fig3Config& cfg);

struct Fig4Config {
  int n = 2;
  double T_f = 1.0;
  int grid_size = 100;
  ctl::GrapeConfig grape{.max_iters = 1000};
  dyn::MeasurementConfig measurement{};
  dyn::TrajectoryMode mode = dyn::TrajectoryMode::kraus;
  int shots = 10000;
  std::uint64_t seed = 4;
  double cutoff = 0.05;
  int bins = 20;
  int threads = 0;
};

struct Fig4Arm {
  std::string label;
  Mat values;
  double lindblad_fidelity = 0.0;
  std::vector<double> final_fidelities;
  dyn::EnsembleSummary summary;
};

struct Fig4Result {
  std::vector<Fig4Arm> arms;  // lindblad_ofs, mlp_ofs
};

Fig4Result run_fig4(const Fig4Config& cfg);

struct SpeedupConfig {
  double T_lo = 1.0;
  double T_hi = 40.0;
  int grid_size = 50;
  ctl::GrapeConfig grape{.max_iters = 200};
  double tf_tolerance = 0.05;
};

struct SpeedupRow {
  std::string family;
  int n = 0;
  std::size_t m = 0;
  double tau_m = 0.0;
  double T_linear = 0.0, T_lindblad = 0.0, T_mlp = 0.0;
  double F_linear = 0.0, F_lindblad = 0.0, F_mlp = 0.0;
  double tts_linear = 0.0, tts_lindblad = 0.0, tts_mlp = 0.0;
  double G_lindblad = 0.0, G_mlp = 0.0;
  double residual_linear = 0.0, residual_lindblad = 0.0, residual_mlp = 0.0;
  bool boundary_linear = false, boundary_lindblad = false, boundary_mlp = false;
};

/// Optimal TTS of the linear ramp, the Lindblad-optimized and the
/// most-likely-path-optimized schedules, all replayed through Lindblad dynamics.
SpeedupRow speedup_point(const sat::SatInstance& instance, const std::string& family, double tau_m,
                         const SpeedupConfig& cfg);

struct SpeedupTask {
  std::string family;
  sat::InstanceKind kind = sat::InstanceKind::single_solution_ring;
  int n = 0;
  double tau_m = 5.0;
  std::uint64_t seed = 0;
};

/// Rows in task order; tasks run on worker threads.
std::vector<SpeedupRow> run_speedup(const std::vector<SpeedupTask>& tasks, const SpeedupConfig& cfg, int threads = 0);

struct Fig5Config {
  std::vector<int> ring_sizes{2, 3, 4, 5};
  double ring_tau_m = 5.0;
  std::vector<int> random3sat_sizes{3, 4, 5};
  double random3sat_tau_m = 2.0;
  std::uint64_t seed = 5;
  SpeedupConfig speedup{};
  int threads = 0;
};

std::vector<SpeedupRow> run_fig5(const Fig5Config& cfg);

/// The two 3-qubit 2-SAT instances of the per-qubit study (which = 1 or 2).
sat::SatInstance fig6_instance(int which);

struct Fig6Config {
  double T_f = 5.0;
  int grid_size = 50;
  ctl::GrapeConfig grape{.max_iters = 500};
  double perturbation = 0.1;
  std::uint64_t seed = 6;
};

struct Fig6Run {
  std::string label;
  sat::SatInstance instance;
  std::vector<double> distance_trace{};  // per accepted iterate, index 0 = perturbed start
  Mat multi_values{};
  Mat single_values{};
  FidelityCurve multi{}, single{}, linear{};
};

/// Seeded smooth per-qubit perturbation of the linear ramp, clamped to [0, pi/2].
Mat perturbed_start(const ctl::ControlProblem& p, double amplitude, std::uint64_t seed);

std::vector<Fig6Run> run_fig6(const Fig6Config& cfg);

}  // namespace zeno::exp
