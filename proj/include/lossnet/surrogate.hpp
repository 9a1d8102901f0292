#pragma once
// Weibull surrogate for blocking probabilities: p(c) = exp(-(c tau)^k).
// Calibration pins tau so the surrogate reproduces a simulated estimate at
// the current capacity; the coupled variant keeps one tau per (class, route
// position) pair, the decoupled variant one tau per station plus the frozen
// point estimates needed by its per-station sensitivity weights.

#include "lossnet/simulator.hpp"

namespace lossnet {

// exp(-(c tau)^k); equals 1 at c = 0 and decreases strictly to 0 in c.
double weibull_blocking(double c, double tau, double k);

// d/dc of the above: -k tau^k c^(k-1) exp(-(c tau)^k).
double weibull_blocking_dc(double c, double tau, double k);

enum class SurrogateMode { coupled, decoupled };

struct SurrogateParams {
  SurrogateMode mode = SurrogateMode::coupled;
  double k = 2.0;
  // coupled: flat per-pair taus (RouteIndex order); decoupled: per-station.
  Eigen::VectorXd tau;
  // Decoupled mode freezes the calibrating estimates and capacities.
  Eigen::VectorXd pair_p;
  Eigen::VectorXd station_p;
  Capacity c_prev;
};

// Closed-form calibration: tau = (-log p)^{1/k} / c_prev at the station the
// pair visits. Estimates are clamped to [floor, 1 - floor] first (floor taken
// from the estimates) so the log and the positivity of tau are always defined.
SurrogateParams calibrate_coupled(const NetworkSpec& net, const BlockingEstimates& est,
                                  const Eigen::Ref<const Capacity>& c_prev, double k);

// Station-level calibration from the aggregated station estimates; also
// freezes the pair and station point estimates and c_prev for the
// per-station update weights.
SurrogateParams calibrate_decoupled(const NetworkSpec& net, const BlockingEstimates& est,
                                    const Eigen::Ref<const Capacity>& c_prev, double k);

// Objective with every blocking probability replaced by its coupled
// surrogate, as a function of the full capacity vector.
double surrogate_objective(const SurrogateParams& params, const NetworkSpec& net,
                           const Eigen::Ref<const Capacity>& c);

// Analytic gradient of surrogate_objective. Component l sums, over classes
// routed through l, the arrival rate times the (negated) surrogate slope at l
// times the reward mass of route positions at or after l, with the blocking
// factor at l itself excluded from each surviving prefix.
Eigen::VectorXd surrogate_gradient(const SurrogateParams& params, const NetworkSpec& net,
                                   const Eigen::Ref<const Capacity>& c);

// Decoupled reward-sensitivity weights: gamma[l] estimates the network-wide
// reward change per unit change of the blocking probability at station l,
// computed entirely from the frozen point estimates.
Eigen::VectorXd decoupled_gamma(const SurrogateParams& params, const NetworkSpec& net);

}  // namespace lossnet
