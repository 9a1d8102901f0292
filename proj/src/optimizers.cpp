#include "lossnet/optimizers.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace lossnet {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::coupled: return "coupled";
    case Algorithm::decoupled: return "decoupled";
    case Algorithm::sa: return "sa";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "coupled") return Algorithm::coupled;
  if (s == "decoupled") return Algorithm::decoupled;
  if (s == "sa") return Algorithm::sa;
  throw std::invalid_argument("unknown algorithm: " + s);
}

double CiSchedule::at(int n) const {
  return decay == 0.0 ? base : base * std::pow(static_cast<double>(n), -decay);
}

double sa_step_schedule(double beta, int n) {
  return beta * std::pow(static_cast<double>(n), -1.0 / 3.0);
}

double sa_perturbation_schedule(double delta, int n) {
  return delta * std::pow(static_cast<double>(n), -1.0 / 6.0);
}

SimulateFn make_simulate_fn(const NetworkSpec& net) {
  return [&net](const Capacity& c, const SimConfig& cfg, std::uint64_t seed) {
    return simulate_blocking(net, c, cfg, seed);
  };
}

ObjectiveFn make_objective_fn(const NetworkSpec& net) {
  return [&net](const Capacity& c, const SimConfig& cfg, std::uint64_t seed) {
    return objective_value(net, c, simulate_blocking(net, c, cfg, seed));
  };
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Capacity clamp_box(const Eigen::Ref<const Capacity>& c, double lo, double hi) {
  return c.cwiseMax(lo).cwiseMin(hi);
}

// Projected gradient ascent with a spectral (Barzilai-Borwein) trial step and
// Armijo backtracking along the projection arc.
struct AscentResult {
  Capacity x;
  double value;
  bool converged;
};

AscentResult projected_ascent(const SurrogateParams& params, const NetworkSpec& net,
                              double lo, double hi, const Eigen::Ref<const Capacity>& x0) {
  constexpr int kMaxIters = 500;
  constexpr double kTol = 1e-6;
  constexpr double kArmijo = 1e-4;

  Capacity x = clamp_box(x0, lo, hi);
  double f = surrogate_objective(params, net, x);
  Eigen::VectorXd g = surrogate_gradient(params, net, x);
  double step = 1.0 / std::max(1e-8, g.cwiseAbs().maxCoeff());

  bool converged = false;
  for (int it = 0; it < kMaxIters; ++it) {
    if ((clamp_box(x + g, lo, hi) - x).norm() < kTol) {
      converged = true;
      break;
    }
    double alpha = step;
    Capacity xn;
    double fn = f;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      xn = clamp_box(x + alpha * g, lo, hi);
      const Capacity d = xn - x;
      if (d.norm() < 1e-15) break;
      fn = surrogate_objective(params, net, xn);
      if (fn >= f + kArmijo * g.dot(d)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd gn = surrogate_gradient(params, net, xn);
    const Capacity s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double sy = std::abs(s.dot(y));
    step = sy > 1e-16 ? std::clamp(s.dot(s) / sy, 1e-10, 1e10) : step * 2.0;
    x = xn;
    f = fn;
    g = gn;
  }
  return {x, f, converged};
}

std::uint64_t iter_seed(std::uint64_t seed, int n, int probe) {
  return mix64(mix64(seed, static_cast<std::uint64_t>(n)),
               static_cast<std::uint64_t>(probe));
}

void finalize_with_estimates(OptimizationTrace& trace, const NetworkSpec& net,
                             const OptimizerConfig& ocfg, const SimConfig& scfg,
                             const SimulateFn& simulate, std::uint64_t seed, int next_n) {
  trace.final_rounded = clamp_box(round_capacity(trace.final_c), 1.0, ocfg.c_max);
  SimConfig cfg = scfg;
  cfg.ci_width = ocfg.ci.at(next_n);
  const BlockingEstimates est = simulate(trace.final_rounded, cfg, iter_seed(seed, next_n, 0));
  trace.total_sim_calls += 1;
  trace.final_objective = objective_value(net, trace.final_rounded, est);
  const auto interval = objective_interval(net, trace.final_rounded, est);
  trace.final_objective_lo = interval.first;
  trace.final_objective_hi = interval.second;
}

}  // namespace

Capacity inner_maximize(const SurrogateParams& params, const NetworkSpec& net,
                        double box_lo, double box_hi, const Eigen::Ref<const Capacity>& start,
                        std::uint64_t seed) {
  const int L = net.num_stations();
  RngStream rng(seed, 0, StreamPurpose::optimizer, 1);

  std::vector<Capacity> starts;
  starts.push_back(clamp_box(start, box_lo, box_hi));
  starts.push_back(Capacity::Constant(L, 0.5 * (box_lo + box_hi)));
  for (int s = 0; s < 3; ++s) {
    Capacity x(L);
    for (int l = 0; l < L; ++l) x[l] = rng.uniform(box_lo, box_hi);
    starts.push_back(x);
  }

  Capacity best = starts.front();
  double best_value = surrogate_objective(params, net, best);
  for (const auto& x0 : starts) {
    const AscentResult res = projected_ascent(params, net, box_lo, box_hi, x0);
    if (res.value > best_value) {
      best_value = res.value;
      best = res.x;
    }
  }
  return best;
}

double decoupled_station_update(double c_prev, double tau, double gamma, double theta,
                                double k, double c_max, bool* unprofitable) {
  if (unprofitable) *unprofitable = false;
  const double arg = gamma * k * std::pow(c_prev, k - 1.0) * std::pow(tau, k) / theta;
  if (!(arg > 0.0)) {
    // Cannot occur when gamma and tau come from floored estimates; a station
    // with no positive revenue signal is pinned at the capacity floor.
    if (unprofitable) *unprofitable = true;
    return 1.0;
  }
  if (arg <= 1.0) return 1.0;  // the >= 1 floor engages before the log turns negative
  const double c = std::pow(std::log(arg), 1.0 / k) / tau;
  return std::clamp(c, 1.0, c_max);
}

namespace {

OptimizationTrace run_functional_form(const NetworkSpec& net,
                                      const Eigen::Ref<const Capacity>& c0,
                                      const OptimizerConfig& ocfg, const SimConfig& scfg,
                                      const SimulateFn& simulate, std::uint64_t seed,
                                      bool coupled) {
  {
    const auto violations = validate_capacity(net, c0);
    if (!violations.empty())
      throw std::invalid_argument("optimizer: " + violations.front());
  }
  const auto t0 = Clock::now();
  const RouteIndex idx = make_route_index(net);

  OptimizationTrace trace;
  trace.algorithm = coupled ? Algorithm::coupled : Algorithm::decoupled;
  trace.initial_c = clamp_box(c0, 1.0, ocfg.c_max);

  Capacity c = trace.initial_c;
  int n = 1;
  for (; n <= ocfg.max_iters; ++n) {
    const auto it0 = Clock::now();
    IterationRecord rec;
    rec.n = n;

    SimConfig cfg = scfg;
    cfg.ci_width = ocfg.ci.at(n);
    const BlockingEstimates est = simulate(c, cfg, iter_seed(seed, n, 0));
    rec.sim_calls = 1;
    rec.f_hat = objective_value(net, c, est);

    Capacity c_next(idx.num_stations);
    if (coupled) {
      const SurrogateParams params = calibrate_coupled(net, est, c, ocfg.k);
      rec.tau = params.tau;
      c_next = inner_maximize(params, net, 1.0, ocfg.c_max, c, iter_seed(seed, n, 1));
      if (surrogate_objective(params, net, c_next) <
          surrogate_objective(params, net, c)) {
        rec.flagged = true;  // no start improved on the incumbent
        c_next = c;
      }
    } else {
      const SurrogateParams params = calibrate_decoupled(net, est, c, ocfg.k);
      rec.tau = params.tau;
      const Eigen::VectorXd gamma = decoupled_gamma(params, net);
      for (int l = 0; l < idx.num_stations; ++l) {
        bool unprofitable = false;
        c_next[l] = decoupled_station_update(
            c[l], params.tau[l], gamma[l],
            net.stations[static_cast<std::size_t>(l)].capacity_cost, ocfg.k, ocfg.c_max,
            &unprofitable);
        rec.flagged = rec.flagged || unprofitable;
      }
    }

    rec.step_norm = (c - c_next).norm();
    c = c_next;
    rec.c = c;
    rec.seconds = seconds_since(it0);
    trace.total_sim_calls += rec.sim_calls;
    trace.iterations.push_back(std::move(rec));

    if (trace.iterations.back().step_norm <= ocfg.stop_tol) {
      trace.converged = true;
      ++n;
      break;
    }
  }

  trace.final_c = c;
  finalize_with_estimates(trace, net, ocfg, scfg, simulate, seed, n);
  trace.total_seconds = seconds_since(t0);
  return trace;
}

}  // namespace

OptimizationTrace run_coupled(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                              const OptimizerConfig& ocfg, const SimConfig& scfg,
                              const SimulateFn& simulate, std::uint64_t seed) {
  return run_functional_form(net, c0, ocfg, scfg, simulate, seed, true);
}

OptimizationTrace run_decoupled(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                                const OptimizerConfig& ocfg, const SimConfig& scfg,
                                const SimulateFn& simulate, std::uint64_t seed) {
  return run_functional_form(net, c0, ocfg, scfg, simulate, seed, false);
}

OptimizationTrace run_sa(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                         const OptimizerConfig& ocfg, const SimConfig& scfg,
                         const ObjectiveFn& objective, std::uint64_t seed) {
  {
    const auto violations = validate_capacity(net, c0);
    if (!violations.empty())
      throw std::invalid_argument("optimizer: " + violations.front());
  }
  const auto t0 = Clock::now();
  const int L = net.num_stations();

  OptimizationTrace trace;
  trace.algorithm = Algorithm::sa;
  trace.initial_c = clamp_box(c0, 1.0, ocfg.c_max);

  Capacity c = trace.initial_c;
  int n = 1;
  for (; n <= ocfg.max_iters; ++n) {
    const auto it0 = Clock::now();
    IterationRecord rec;
    rec.n = n;

    SimConfig cfg = scfg;
    cfg.ci_width = ocfg.ci.at(n);

    const double f_base = objective(c, cfg, iter_seed(seed, n, 0));
    rec.sim_calls = 1;
    rec.f_hat = f_base;

    // Central differences, probes projected onto the box; the divisor is the
    // realized separation so clipped probes stay consistent.
    const double delta_n = sa_perturbation_schedule(ocfg.sa.delta, n);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(L);
    for (int l = 0; l < L; ++l) {
      Capacity cp = c, cm = c;
      cp[l] = std::min(c[l] + delta_n, ocfg.c_max);
      cm[l] = std::max(c[l] - delta_n, 1.0);
      const double fp = objective(cp, cfg, iter_seed(seed, n, 1 + 2 * l));
      const double fm = objective(cm, cfg, iter_seed(seed, n, 2 + 2 * l));
      rec.sim_calls += 2;
      const double span = cp[l] - cm[l];
      grad[l] = span > 0.0 ? (fp - fm) / span : 0.0;
    }

    Capacity c_next = c;
    if (grad.norm() == 0.0) {
      rec.flagged = true;  // no directional information; step skipped
    } else {
      double alpha = sa_step_schedule(ocfg.sa.beta, n);
      const double gnorm2 = grad.squaredNorm();
      Capacity cand;
      for (int d = 1;; ++d) {
        cand = clamp_box(c + alpha * grad, 1.0, ocfg.c_max);
        const double f_cand = objective(cand, cfg, iter_seed(seed, n, 1 + 2 * L + d));
        rec.sim_calls += 1;
        if (f_cand >= f_base + ocfg.sa.rho2 * alpha * gnorm2 || d >= ocfg.sa.max_backtracks)
          break;
        alpha *= ocfg.sa.rho1;
      }
      c_next = cand;
    }

    rec.step_norm = (c - c_next).norm();
    c = c_next;
    rec.c = c;
    rec.seconds = seconds_since(it0);
    trace.total_sim_calls += rec.sim_calls;
    trace.iterations.push_back(std::move(rec));

    if (trace.iterations.back().step_norm <= ocfg.stop_tol) {
      trace.converged = true;
      ++n;
      break;
    }
  }

  trace.final_c = c;
  trace.final_rounded = clamp_box(round_capacity(c), 1.0, ocfg.c_max);
  SimConfig cfg = scfg;
  cfg.ci_width = ocfg.ci.at(n);
  trace.final_objective = objective(trace.final_rounded, cfg, iter_seed(seed, n, 0));
  trace.total_sim_calls += 1;
  trace.final_objective_lo = trace.final_objective;
  trace.final_objective_hi = trace.final_objective;
  trace.total_seconds = seconds_since(t0);
  return trace;
}

OptimizationTrace run_algorithm(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                                const OptimizerConfig& ocfg, const SimConfig& scfg,
                                std::uint64_t seed) {
  switch (ocfg.mode) {
    case Algorithm::coupled:
      return run_coupled(net, c0, ocfg, scfg, make_simulate_fn(net), seed);
    case Algorithm::decoupled:
      return run_decoupled(net, c0, ocfg, scfg, make_simulate_fn(net), seed);
    case Algorithm::sa:
      return run_sa(net, c0, ocfg, scfg, make_objective_fn(net), seed);
  }
  throw std::logic_error("run_algorithm: unknown mode");
}

void write_trace_csv(const OptimizationTrace& trace, std::ostream& os) {
  const Eigen::Index L = trace.initial_c.size();
  os << "n";
  for (Eigen::Index l = 0; l < L; ++l) os << ",c_" << (l + 1);
  os << ",f_hat,g,sim_calls,cpu_seconds\n";
  os << std::setprecision(17);
  for (const auto& rec : trace.iterations) {
    os << rec.n;
    for (Eigen::Index l = 0; l < L; ++l) os << ',' << rec.c[l];
    os << ',' << rec.f_hat << ',' << rec.step_norm << ',' << rec.sim_calls << ','
       << rec.seconds << '\n';
  }
}

std::string trace_summary_json(const OptimizationTrace& trace) {
  nlohmann::json j;
  j["algorithm"] = to_string(trace.algorithm);
  j["initial_capacity"] = std::vector<double>(trace.initial_c.begin(), trace.initial_c.end());
  j["final_capacity"] =
      std::vector<double>(trace.final_rounded.begin(), trace.final_rounded.end());
  j["final_capacity_fractional"] =
      std::vector<double>(trace.final_c.begin(), trace.final_c.end());
  j["final_objective"] = trace.final_objective;
  j["final_objective_ci"] = {trace.final_objective_lo, trace.final_objective_hi};
  j["converged"] = trace.converged;
  j["iterations"] = trace.iterations.size();
  j["total_sim_calls"] = trace.total_sim_calls;
  j["total_seconds"] = trace.total_seconds;
  return j.dump(2);
}

}  // namespace lossnet
