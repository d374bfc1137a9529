#include "zeno/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "zeno/error.hpp"

namespace zeno::dyn {

void validate(const MeasurementConfig& cfg) {
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw RangeError("dt must be >= 0");
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw RangeError("tau must be > 0");
}

double beta(const MeasurementConfig& cfg) { return -std::expm1(-cfg.dt / (2.0 * cfg.tau)); }

double share_count(const MeasurementConfig& cfg, std::size_t m) {
  return cfg.rate_share == RateShare::per_clause ? static_cast<double>(m) : 1.0;
}

void Schedule::validate(int n) const {
  if (times.size() < 2) throw RangeError("schedule needs at least one interval");
  if (axes.size() != times.size())
    throw RangeError("schedule has " + std::to_string(axes.size()) + " axes for " + std::to_string(times.size()) +
                     " grid points");
  if (times.front() != 0.0) throw RangeError("schedule must start at t = 0");
  for (std::size_t j = 1; j < times.size(); ++j)
    if (!(times[j] > times[j - 1])) throw RangeError("schedule times must be strictly increasing");
  for (const auto& a : axes) ops::check_axis(a, n);
}

Schedule linear_schedule(int n, double T_f, int intervals, double theta_i, double theta_f) {
  if (!(T_f > 0.0)) throw RangeError("T_f must be > 0");
  if (intervals < 1) throw RangeError("schedule needs at least one interval");
  Schedule s;
  for (int j = 0; j <= intervals; ++j) {
    s.times.push_back(T_f * j / intervals);
    const double mid = (std::min(j, intervals - 1) + 0.5) / intervals;
    s.axes.push_back(ops::uniform_axis(n, theta_i + (theta_f - theta_i) * mid));
  }
  return s;
}

Schedule schedule_from_values(int n, double T_f, const Mat& values) {
  if (!(T_f > 0.0)) throw RangeError("T_f must be > 0");
  const auto N = static_cast<int>(values.rows());
  if (N < 1) throw RangeError("schedule needs at least one interval");
  if (values.cols() != 1 && values.cols() != n) throw RangeError("schedule values need 1 or n columns");
  Schedule s;
  for (int j = 0; j <= N; ++j) {
    s.times.push_back(T_f * j / N);
    const int row = std::min(j, N - 1);
    ops::Axis a(static_cast<std::size_t>(n));
    for (int q = 0; q < n; ++q) a[q] = values(row, values.cols() == 1 ? 0 : q);
    s.axes.push_back(std::move(a));
  }
  return s;
}

Mat schedule_values(const Schedule& s) {
  const int N = s.intervals();
  const auto n = static_cast<Eigen::Index>(s.axes.front().size());
  Mat v(N, n);
  for (int j = 0; j < N; ++j)
    for (Eigen::Index q = 0; q < n; ++q) v(j, q) = s.axes[j][q];
  return v;
}

bool is_global(const Schedule& s) {
  for (const auto& a : s.axes)
    for (double t : a)
      if (t != a.front()) return false;
  return true;
}

DensityMatrix pure_state(const Vec& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0)) throw RangeError("zero state vector");
  const Vec u = psi / norm;
  return u * u.transpose();
}

void check_state(const DensityMatrix& rho, double tol) {
  if (rho.rows() != rho.cols()) throw RangeError("density matrix is not square");
  if (max_abs(Mat(rho - rho.transpose())) > tol) throw RangeError("density matrix is not symmetric");
  if (std::abs(rho.trace() - 1.0) > tol) throw RangeError("density matrix trace differs from 1");
  if (symmetric_eigen(rho).values(0) < -1e-8) throw RangeError("density matrix is not positive semidefinite");
}

double fidelity(const DensityMatrix& rho, const Mat& target) { return trace_product(target, rho); }

double purity(const DensityMatrix& rho) { return trace_product(rho, rho); }

Mat kraus_operator(const Mat& P, double r, const MeasurementConfig& cfg) {
  validate(cfg);
  if (!(cfg.dt > 0.0)) throw RangeError("Kraus operator needs dt > 0");
  const double a = 1.0 / std::sqrt(cfg.tau);
  const double pre = std::pow(cfg.dt / (2.0 * std::numbers::pi), 0.25);
  const double w1 = std::exp(-0.25 * cfg.dt * (r + a) * (r + a));
  const double w0 = std::exp(-0.25 * cfg.dt * (r - a) * (r - a));
  return pre * (w1 * P + w0 * (Mat::Identity(P.rows(), P.cols()) - P));
}

MeasurementSample sample_measurement(const DensityMatrix& rho, const Mat& P, const MeasurementConfig& cfg, Rng& rng) {
  validate(cfg);
  if (!(cfg.dt > 0.0)) throw RangeError("measurement needs dt > 0");
  const Mat Pr = P * rho;
  const double p = Pr.trace();
  if (p < -1e-8 || p > 1.0 + 1e-8) throw NumericalError("branch weight " + std::to_string(p) + " outside [0, 1]");
  const double a = 1.0 / std::sqrt(cfg.tau);
  const double mean = uniform01(rng) < p ? -a : a;
  const double r = mean + standard_normal(rng) / std::sqrt(cfg.dt);
  // M = c (w0 I + (w1 - w0) P); the prefactor cancels on normalization.
  const double w0 = std::exp(-0.25 * cfg.dt * (r - a) * (r - a));
  const double dw = std::exp(-0.25 * cfg.dt * (r + a) * (r + a)) - w0;
  Mat next = (w0 * w0) * rho + (w0 * dw) * (Pr + Pr.transpose());
  next.noalias() += (dw * dw) * (Pr * P);
  next /= next.trace();
  symmetrize(next);
  return {std::move(next), r};
}

DensityMatrix averaged_channel(const DensityMatrix& rho, const std::vector<Mat>& P, const MeasurementConfig& cfg) {
  validate(cfg);
  const double b = beta(cfg);
  Mat out = rho;
  if (b == 0.0) return out;
  const double coef = 2.0 * b / share_count(cfg, P.size());
  for (const Mat& p : P) {
    const Mat prho = p * rho;
    out += coef * (prho * p - 0.5 * (prho + prho.transpose()));
  }
  symmetrize(out);
  return out;
}

Mat lindblad_rhs(const DensityMatrix& rho, const std::vector<Mat>& P, double rate) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (const Mat& p : P) {
    const Mat prho = p * rho;
    out.noalias() += prho * p;
    out -= 0.5 * (prho + prho.transpose());
  }
  return rate * out;
}

namespace {

void check_trace(const Mat& rho, double tol, double t) {
  const double tr = rho.trace();
  if (!std::isfinite(tr) || std::abs(tr - 1.0) > tol) {
    std::ostringstream msg;
    msg << "trace drift " << tr - 1.0 << " at t = " << t << " exceeds " << tol;
    throw NumericalError(msg.str());
  }
}

}  // namespace

LindbladTrace evolve_lindblad(const DensityMatrix& rho0, const sat::SatInstance& instance, const Schedule& schedule,
                              const MeasurementConfig& cfg, const Mat& target, const LindbladOptions& opt) {
  validate(cfg);
  schedule.validate(instance.num_vars());
  const std::size_t m = instance.num_clauses();
  const double mprime = share_count(cfg, m);
  const double rate = 1.0 / (mprime * cfg.tau);
  const double h_max = std::min(opt.max_step, 0.1 * cfg.tau * mprime / static_cast<double>(m));

  LindbladTrace out;
  Mat rho = rho0;
  out.times = schedule.times;
  out.fidelity.push_back(fidelity(rho, target));
  if (opt.store_states) out.states.push_back(rho);
  for (int j = 0; j < schedule.intervals(); ++j) {
    const auto P = ops::clause_projectors(instance, schedule.axes[j]);
    const double len = schedule.times[j + 1] - schedule.times[j];
    const int K = std::max(1, static_cast<int>(std::ceil(len / h_max - 1e-9)));
    const double h = len / K;
    for (int s = 0; s < K; ++s) {
      const Mat k1 = lindblad_rhs(rho, P, rate);
      const Mat k2 = lindblad_rhs(rho + 0.5 * h * k1, P, rate);
      const Mat k3 = lindblad_rhs(rho + 0.5 * h * k2, P, rate);
      const Mat k4 = lindblad_rhs(rho + h * k3, P, rate);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      symmetrize(rho);
      ++out.steps;
    }
    check_trace(rho, 1e-8, schedule.times[j + 1]);
    out.fidelity.push_back(fidelity(rho, target));
    if (opt.store_states) out.states.push_back(rho);
  }
  out.final_state = rho;
  return out;
}

std::vector<double> trajectory_grid(const Schedule& schedule, const MeasurementConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw RangeError("trajectory needs dt > 0");
  std::vector<double> t{0.0};
  for (int j = 0; j < schedule.intervals(); ++j) {
    const double len = schedule.times[j + 1] - schedule.times[j];
    const int K = std::max(1, static_cast<int>(std::ceil(len / cfg.dt - 1e-9)));
    for (int s = 1; s <= K; ++s) t.push_back(s == K ? schedule.times[j + 1] : schedule.times[j] + len * s / K);
  }
  return t;
}

namespace {

// sum_alpha (r_alpha - shift) (P rho + rho P - 2 rho Tr(P rho)), scaled by c.
Mat sme_drift(const Mat& rho, const std::vector<Mat>& P, const std::vector<double>& r, double shift, double c) {
  Mat out = Mat::Zero(rho.rows(), rho.cols());
  for (std::size_t a = 0; a < P.size(); ++a) {
    const Mat prho = P[a] * rho;
    const double p = prho.trace();
    out += (r[a] - shift) * (prho + prho.transpose() - 2.0 * p * rho);
  }
  return c * out;
}

}  // namespace

TrajectoryRecord evolve_trajectory(const DensityMatrix& rho0, const sat::SatInstance& instance,
                                   const Schedule& schedule, const MeasurementConfig& cfg, Rng& rng,
                                   const Mat& target, const TrajectoryOptions& opt) {
  validate(cfg);
  schedule.validate(instance.num_vars());
  const std::size_t m = instance.num_clauses();
  const std::vector<double> grid = trajectory_grid(schedule, cfg);
  const int steps = static_cast<int>(grid.size()) - 1;
  if (opt.prescribed) {
    if (opt.mode != TrajectoryMode::sme) throw RangeError("prescribed readouts need the sme mode");
    if (opt.prescribed->rows() != static_cast<Eigen::Index>(m) || opt.prescribed->cols() != steps)
      throw RangeError("prescribed readouts must be " + std::to_string(m) + " x " + std::to_string(steps));
  }

  TrajectoryRecord rec;
  if (opt.record_traces) {
    rec.readouts = Mat::Constant(static_cast<Eigen::Index>(m), steps, std::numeric_limits<double>::quiet_NaN());
    rec.times.push_back(0.0);
    rec.fidelity_trace.push_back(fidelity(rho0, target));
    rec.purity_trace.push_back(purity(rho0));
  }
  Mat rho = rho0;
  const double mprime = share_count(cfg, m);
  const double sqrt_tau = std::sqrt(cfg.tau);
  const double c = 1.0 / (mprime * sqrt_tau);
  const double shift = 1.0 / sqrt_tau;
  std::vector<double> r1(m), r2(m), dW(m);

  int step = 0;
  for (int j = 0; j < schedule.intervals() && !rec.truncated_at; ++j) {
    const auto P = ops::clause_projectors(instance, schedule.axes[j]);
    while (step < steps && grid[step] < schedule.times[j + 1] - 1e-12) {
      const double h = grid[step + 1] - grid[step];
      if (opt.mode == TrajectoryMode::sme) {
        for (std::size_t a = 0; a < m; ++a) {
          if (opt.prescribed) {
            r1[a] = (*opt.prescribed)(static_cast<Eigen::Index>(a), step);
          } else {
            // Variance m' h keeps the readout-averaged dynamics equal to the Lindblad generator.
            dW[a] = std::sqrt(mprime * h) * standard_normal(rng);
            r1[a] = 2.0 * trace_product(P[a], rho) / sqrt_tau + dW[a] / h;
          }
        }
        const Mat f1 = sme_drift(rho, P, r1, shift, c);
        Mat pred = rho + h * f1;
        symmetrize(pred);
        for (std::size_t a = 0; a < m; ++a)
          r2[a] = opt.prescribed ? r1[a] : 2.0 * trace_product(P[a], pred) / sqrt_tau + dW[a] / h;
        rho += 0.5 * h * (f1 + sme_drift(pred, P, r2, shift, c));
        if (opt.record_traces)
          for (std::size_t a = 0; a < m; ++a) rec.readouts(static_cast<Eigen::Index>(a), step) = 0.5 * (r1[a] + r2[a]);
      } else {
        MeasurementConfig slice = cfg;
        slice.dt = h;
        if (cfg.rate_share == RateShare::per_clause) {
          const auto a = static_cast<std::size_t>(rng() % m);
          auto s = sample_measurement(rho, P[a], slice, rng);
          rho = std::move(s.state);
          if (opt.record_traces) rec.readouts(static_cast<Eigen::Index>(a), step) = s.readout;
        } else {
          for (std::size_t a = 0; a < m; ++a) {
            auto s = sample_measurement(rho, P[a], slice, rng);
            rho = std::move(s.state);
            if (opt.record_traces) rec.readouts(static_cast<Eigen::Index>(a), step) = s.readout;
          }
        }
      }
      check_trace(rho, 1e-6, grid[step + 1]);
      rho /= rho.trace();
      symmetrize(rho);
      ++step;
      const double f = fidelity(rho, target);
      if (opt.record_traces) {
        rec.times.push_back(grid[step]);
        rec.fidelity_trace.push_back(f);
        rec.purity_trace.push_back(purity(rho));
      }
      if (opt.truncate_below && f < *opt.truncate_below) {
        rec.truncated_at = step;
        break;
      }
    }
  }
  rec.final_state = rho;
  rec.final_fidelity = fidelity(rho, target);
  return rec;
}

EnsembleRun run_ensemble(const DensityMatrix& rho0, const sat::SatInstance& instance, const Schedule& schedule,
                         const MeasurementConfig& cfg, const Mat& target, std::uint64_t seed, int shots,
                         TrajectoryMode mode, int threads) {
  if (shots < 1) throw RangeError("ensemble needs at least one shot");
  if (threads <= 0) threads = static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
  threads = std::min(threads, shots);
  std::vector<Mat> finals(static_cast<std::size_t>(shots));
  std::vector<double> fid(static_cast<std::size_t>(shots));
  TrajectoryOptions opt;
  opt.mode = mode;
  opt.record_traces = false;
  auto worker = [&](int w) {
    for (int s = w; s < shots; s += threads) {
      Rng rng = substream(seed, 1, static_cast<std::uint64_t>(s));
      auto rec = evolve_trajectory(rho0, instance, schedule, cfg, rng, target, opt);
      fid[s] = rec.final_fidelity;
      finals[s] = std::move(rec.final_state);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        try {
          worker(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  EnsembleRun out;
  out.final_fidelities = std::move(fid);
  const Eigen::Index d = rho0.rows();
  Mat sum = Mat::Zero(d, d), sq = Mat::Zero(d, d);
  for (const Mat& f : finals) {
    sum += f;
    sq += f.cwiseProduct(f);
  }
  const double N = shots;
  out.mean_state = sum / N;
  if (shots > 1) {
    const Mat var = ((sq / N) - out.mean_state.cwiseProduct(out.mean_state)) * (N / (N - 1.0));
    out.state_std_error = (var.cwiseMax(0.0) / N).cwiseSqrt();
  } else {
    out.state_std_error = Mat::Zero(d, d);
  }
  return out;
}

EnsembleSummary ensemble_statistics(const std::vector<double>& f, std::optional<double> cutoff, int bins) {
  if (f.empty()) throw RangeError("ensemble statistics need at least one record");
  if (bins < 1) throw RangeError("histogram needs at least one bin");
  EnsembleSummary s;
  s.count = f.size();
  double sum = 0.0;
  for (double x : f) sum += x;
  s.mean = sum / static_cast<double>(s.count);
  double ss = 0.0;
  for (double x : f) ss += (x - s.mean) * (x - s.mean);
  s.variance = s.count > 1 ? ss / static_cast<double>(s.count - 1) : 0.0;
  s.std_error = std::sqrt(s.variance / static_cast<double>(s.count));
  for (int b = 0; b <= bins; ++b) s.bin_edges.push_back(static_cast<double>(b) / bins);
  s.histogram.assign(static_cast<std::size_t>(bins), 0);
  for (double x : f) {
    const int b = std::clamp(static_cast<int>(std::floor(x * bins)), 0, bins - 1);
    ++s.histogram[b];
  }
  s.cutoff = cutoff;
  if (cutoff) {
    std::vector<double> kept;
    for (double x : f)
      if (x >= *cutoff) kept.push_back(x);
    s.retained = kept.size();
    s.retained_fraction = static_cast<double>(kept.size()) / static_cast<double>(s.count);
    if (!kept.empty()) {
      double ks = 0.0;
      for (double x : kept) ks += x;
      const double km = ks / static_cast<double>(kept.size());
      double kv = 0.0;
      for (double x : kept) kv += (x - km) * (x - km);
      kv = kept.size() > 1 ? kv / static_cast<double>(kept.size() - 1) : 0.0;
      s.post_selected_mean = km;
      s.post_selected_std_error = std::sqrt(kv / static_cast<double>(kept.size()));
    }
  } else {
    s.retained = s.count;
    s.retained_fraction = 1.0;
  }
  return s;
}

EnsembleSummary ensemble_statistics(const std::vector<TrajectoryRecord>& records, std::optional<double> cutoff,
                                    int bins) {
  std::vector<double> f;
  f.reserve(records.size());
  for (const auto& r : records) f.push_back(r.final_fidelity);
  return ensemble_statistics(f, cutoff, bins);
}

}  // namespace zeno::dyn
