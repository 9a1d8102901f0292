#pragma once
// Capacity allocation algorithms: surrogate recalibration with joint
// numerical maximization (coupled), per-station closed-form updates
// (decoupled), and a finite-difference stochastic-approximation baseline with
// backtracking line search.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include "lossnet/surrogate.hpp"

namespace lossnet {

enum class Algorithm { coupled, decoupled, sa };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// Iteration-indexed stopping-width schedule: width(n) = base * n^(-decay).
struct CiSchedule {
  double base = 0.1;
  double decay = 0.0;
  double at(int n) const;
};

struct SaParams {
  double delta = 5.0;       // perturbation scale; shrinks as n^(-1/6)
  double beta = 150.0;      // initial step scale; shrinks as n^(-1/3)
  double rho1 = 0.8;        // backtracking shrink factor
  double rho2 = 0.5;        // sufficient-increase fraction
  int max_backtracks = 20;  // line-search trial cap
};

// Step and perturbation schedules used by the stochastic-approximation run.
double sa_step_schedule(double beta, int n);          // beta * n^(-1/3)
double sa_perturbation_schedule(double delta, int n); // delta * n^(-1/6)

struct OptimizerConfig {
  Algorithm mode = Algorithm::coupled;
  double k = 2.0;          // surrogate shape (functional-form modes)
  double stop_tol = 0.5;   // stop once the capacity step norm falls below this
  int max_iters = 10;
  double c_max = 200.0;    // box is [1, c_max]^L
  CiSchedule ci;
  SaParams sa;
};

struct IterationRecord {
  int n = 0;
  Capacity c;          // capacity after this iteration's update
  double f_hat = 0.0;  // objective estimate at the capacity this iteration simulated
  Eigen::VectorXd tau; // calibrated scales (empty for the SA baseline)
  double step_norm = 0.0;
  int sim_calls = 0;
  double seconds = 0.0;
  bool flagged = false;
};

struct OptimizationTrace {
  Algorithm algorithm = Algorithm::coupled;
  Capacity initial_c;
  std::vector<IterationRecord> iterations;
  Capacity final_c;        // last (fractional) iterate
  Capacity final_rounded;  // integer allocation reported to the operator
  double final_objective = 0.0;  // re-simulated at final_rounded
  double final_objective_lo = 0.0;
  double final_objective_hi = 0.0;
  bool converged = false;  // step norm fell below stop_tol within max_iters
  long total_sim_calls = 0;
  double total_seconds = 0.0;
};

// One estimation pass at capacity c with the given per-iteration sim config.
using SimulateFn =
    std::function<BlockingEstimates(const Capacity& c, const SimConfig&, std::uint64_t seed)>;

// Noisy objective sample at capacity c (the stochastic-approximation black
// box). The production implementation simulates and plugs the estimates into
// the objective.
using ObjectiveFn =
    std::function<double(const Capacity& c, const SimConfig&, std::uint64_t seed)>;

SimulateFn make_simulate_fn(const NetworkSpec& net);
ObjectiveFn make_objective_fn(const NetworkSpec& net);

// Box-constrained maximization of the coupled surrogate objective by
// projected gradient ascent (spectral step with backtracking), multistarted
// from `start`, the box midpoint, and three seeded random points; returns the
// best point found.
Capacity inner_maximize(const SurrogateParams& params, const NetworkSpec& net,
                        double box_lo, double box_hi, const Eigen::Ref<const Capacity>& start,
                        std::uint64_t seed);

// Iterative surrogate recalibration with joint numerical maximization.
// One simulation pass per iteration.
OptimizationTrace run_coupled(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                              const OptimizerConfig& ocfg, const SimConfig& scfg,
                              const SimulateFn& simulate, std::uint64_t seed);

// Per-station closed-form capacity update from station-level calibration and
// frozen cross-station estimates. One simulation pass per iteration.
OptimizationTrace run_decoupled(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                                const OptimizerConfig& ocfg, const SimConfig& scfg,
                                const SimulateFn& simulate, std::uint64_t seed);

// Kiefer-Wolfowitz style baseline: central finite differences (2L objective
// samples), backtracking line search on the sampled objective, projection
// onto the box. Many samples per iteration by construction.
OptimizationTrace run_sa(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                         const OptimizerConfig& ocfg, const SimConfig& scfg,
                         const ObjectiveFn& objective, std::uint64_t seed);

OptimizationTrace run_algorithm(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c0,
                                const OptimizerConfig& ocfg, const SimConfig& scfg,
                                std::uint64_t seed);

// The closed-form decoupled step for one station. Exposed for tests. When the
// log argument is non-positive the station is pinned at the capacity floor
// and `unprofitable` (if given) is set.
double decoupled_station_update(double c_prev, double tau, double gamma, double theta,
                                double k, double c_max, bool* unprofitable = nullptr);

// Trace serialization: CSV rows n,c_1..c_L,f_hat,g,sim_calls,cpu_seconds and
// a compact JSON summary of the final allocation.
void write_trace_csv(const OptimizationTrace& trace, std::ostream& os);
std::string trace_summary_json(const OptimizationTrace& trace);

}  // namespace lossnet
