#pragma once
// Discrete-event simulation of the loss network under a (possibly fractional)
// capacity vector. Produces blocking estimates per (class, route position)
// pair and per station, with a score-interval stopping rule evaluated at
// batch boundaries.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lossnet/model.hpp"

namespace lossnet {

enum class AdmissionRule {
  fractional,     // probabilistic acceptance at the floor(c) occupancy boundary
  integer_floor,  // plain loss rule on floor(c); used for consistency checks
};

struct SimConfig {
  double batch_length = 10.0;      // counters are checked at multiples of this
  double ci_width = 0.1;           // stop once every score width falls below this
  int replications = 5;            // independent replications, averaged
  double zero_floor = 1e-4;        // estimates of 0 are lifted to this value
  double max_sim_time = 1e4;       // per-replication safety cap
  AdmissionRule admission = AdmissionRule::fractional;
  bool keep_replication_stats = false;
};

// Raw cumulative counters of one replication, kept for audits and tests.
struct ReplicationStats {
  std::vector<std::int64_t> pair_arrivals, pair_blocked;
  std::vector<std::int64_t> station_arrivals, station_blocked;
  std::vector<double> station_busy_time;  // integral of occupancy over time
  double sim_time = 0.0;
  bool converged = false;
};

struct BlockingEstimates {
  // Flat per-(class, route position) estimates in RouteIndex order.
  Eigen::VectorXd pair_p;
  Eigen::VectorXd pair_ci;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> pair_arrivals;
  // Per-station aggregates over all classes touching the station.
  Eigen::VectorXd station_p;
  Eigen::VectorXd station_ci;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> station_arrivals;
  Eigen::VectorXd station_mean_occupancy;

  double total_time = 0.0;
  int replications = 0;
  bool converged = false;   // false when any replication hit the time cap
  double epsilon_floor = 0.0;

  std::vector<ReplicationStats> replication_stats;  // only when requested
};

// Admission rule at a station with `occupancy` customers in service and real
// capacity `capacity`: below the floor always accepts, at the floor accepts
// with probability equal to the fractional part, above it blocks. Consumes
// randomness only when the decision is genuinely probabilistic.
bool admit_decision(int occupancy, double capacity, RngStream& rng);

// Width of the score (Wilson) confidence interval for a Bernoulli proportion
// at z = 1.96: 1.96 sqrt(1.96^2 - 4 A (p-1) p) / (1.96^2 + A). This is the
// quantity compared against the stopping threshold. Returns +infinity when
// there is no data.
double score_ci_width(double p_hat, std::int64_t arrivals);

// The corresponding interval bounds (score center plus/minus half the width),
// clamped to [0, 1].
std::pair<double, double> score_interval(double p_hat, std::int64_t arrivals);

// Runs `cfg.replications` independent replications from an empty initial
// state, each advancing batch by batch until every score width for pairs and
// stations that received arrivals drops below cfg.ci_width (or the time cap
// is reached, which clears `converged`). Per-replication proportions are
// floored at cfg.zero_floor and averaged unweighted; reported widths are
// recomputed from the pooled arrival counts.
BlockingEstimates simulate_blocking(const NetworkSpec& net,
                                    const Eigen::Ref<const Capacity>& c,
                                    const SimConfig& cfg, std::uint64_t seed);

// Objective at `c` using simulated blocking estimates.
double objective_value(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c,
                       const BlockingEstimates& est);

// Conservative interval for the objective obtained by pushing every pair
// estimate to the ends of its score interval (the objective is monotone
// decreasing in each blocking probability).
std::pair<double, double> objective_interval(const NetworkSpec& net,
                                             const Eigen::Ref<const Capacity>& c,
                                             const BlockingEstimates& est);

// Audit dump, one row per replication and (class, route position) pair:
// replication,r,i,arrivals,blocked,p_hat,ci
void write_replication_csv(const NetworkSpec& net, const BlockingEstimates& est,
                           std::ostream& os);

}  // namespace lossnet
