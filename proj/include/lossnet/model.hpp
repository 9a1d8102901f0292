#pragma once
// Loss-network model: stations with finite server pools and no waiting room,
// customer classes routed along fixed station paths, linear capacity costs,
// per-completion rewards, and the resulting net reward-rate objective.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lossnet/stochastics.hpp"

namespace lossnet {

// Per-station capacities; fractional values are meaningful (probabilistic
// admission at the occupancy boundary) and must stay >= 1 componentwise.
using Capacity = Eigen::VectorXd;

struct StationSpec {
  int id = 1;                  // 1-based, equals its position in the station list
  double capacity_cost = 1.0;  // cost per server per unit time
  DistributionSpec service;    // station-wide service law
  // Optional per-class override; when non-empty it must hold one entry per
  // class and takes precedence over `service`.
  std::vector<DistributionSpec> service_by_class;

  const DistributionSpec& service_for_class(int class_index0) const {
    return service_by_class.empty()
               ? service
               : service_by_class[static_cast<std::size_t>(class_index0)];
  }
};

struct ClassSpec {
  int id = 1;                   // 1-based
  std::vector<int> route;       // station ids, visited in order, no repeats
  std::vector<double> rewards;  // one positive reward per route position
};

struct NetworkSpec {
  std::vector<StationSpec> stations;
  std::vector<ClassSpec> classes;
  // Every class is fed by at least one stream; a stream may feed several
  // classes through its class mix (e.g. one modulated process whose arrivals
  // are split between two classes).
  std::vector<ArrivalProcessSpec> arrival_streams;

  int num_stations() const { return static_cast<int>(stations.size()); }
  int num_classes() const { return static_cast<int>(classes.size()); }

  // Exogenous long-run arrival rate of class r (1-based), summed over the
  // streams feeding it.
  double class_rate(int class_id) const;
};

// Returns every violated model invariant; an empty list means the spec is
// well formed. Violations are data, not exceptions, so a config can be fixed
// in one pass.
std::vector<std::string> validate(const NetworkSpec& net);

std::vector<std::string> validate_capacity(const NetworkSpec& net,
                                           const Eigen::Ref<const Capacity>& c);

// Round-half-up to the nearest integer, componentwise, keeping the >= 1 floor.
Capacity round_capacity(const Eigen::Ref<const Capacity>& c);

// ---------------------------------------------------------------------------
// Flat indexing over (class, route position) pairs.

struct RouteIndex {
  int num_stations = 0;
  int num_classes = 0;
  int total_pairs = 0;
  std::vector<int> offset;        // size R+1; pair(r,i) = offset[r] + i
  std::vector<int> pair_station;  // flat pair -> 0-based station index
  std::vector<int> position;      // R*L matrix: position of station l on route r, or -1

  int pair(int class_index0, int route_pos0) const {
    return offset[static_cast<std::size_t>(class_index0)] + route_pos0;
  }
  int route_length(int class_index0) const {
    return offset[static_cast<std::size_t>(class_index0) + 1] -
           offset[static_cast<std::size_t>(class_index0)];
  }
  // Position of 0-based station l on route of 0-based class r; -1 when the
  // route does not visit l.
  int position_of(int class_index0, int station_index0) const {
    return position[static_cast<std::size_t>(class_index0) *
                        static_cast<std::size_t>(num_stations) +
                    static_cast<std::size_t>(station_index0)];
  }
};

RouteIndex make_route_index(const NetworkSpec& net);

// Net reward rate: -<c, theta> plus, per class, the arrival rate times the
// reward of each route prefix that survives blocking. `pair_block_probs` is
// the flat per-(class, route position) blocking probability vector in
// RouteIndex order; a size mismatch is a structural error.
double objective_value(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c,
                       const Eigen::Ref<const Eigen::VectorXd>& pair_block_probs);

}  // namespace lossnet
