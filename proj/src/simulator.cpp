#include "lossnet/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace lossnet {

bool admit_decision(int occupancy, double capacity, RngStream& rng) {
  const double fl = std::floor(capacity);
  const int boundary = static_cast<int>(fl);
  if (occupancy <= boundary - 1) return true;
  if (occupancy == boundary) {
    const double frac = capacity - fl;
    return frac > 0.0 && rng.bernoulli(frac);
  }
  return false;
}

namespace {
constexpr double kZ = 1.96;
constexpr double kZ2 = kZ * kZ;
}  // namespace

double score_ci_width(double p_hat, std::int64_t arrivals) {
  if (arrivals <= 0) return std::numeric_limits<double>::infinity();
  const double a = static_cast<double>(arrivals);
  return kZ * std::sqrt(kZ2 - 4.0 * a * (p_hat - 1.0) * p_hat) / (kZ2 + a);
}

std::pair<double, double> score_interval(double p_hat, std::int64_t arrivals) {
  if (arrivals <= 0) return {0.0, 1.0};
  const double a = static_cast<double>(arrivals);
  const double center = (p_hat + kZ2 / (2.0 * a)) / (1.0 + kZ2 / a);
  const double half = 0.5 * score_ci_width(p_hat, arrivals);
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

// Event kinds are ranked so simultaneous events resolve deterministically:
// departures (and the transfer admissions they trigger) before external
// arrivals, then insertion order.
enum class EventKind : std::uint8_t { departure = 0, arrival = 1 };

struct Event {
  double t;
  EventKind kind;
  std::int32_t a;  // departure: class index; arrival: stream index
  std::int32_t b;  // departure: route position
  std::uint64_t seq;
};

struct EventLater {
  bool operator()(const Event& x, const Event& y) const {
    if (x.t != y.t) return x.t > y.t;
    if (x.kind != y.kind) return x.kind > y.kind;
    return x.seq > y.seq;
  }
};

class Replication {
 public:
  Replication(const NetworkSpec& net, const RouteIndex& idx,
              const Eigen::Ref<const Capacity>& c, const SimConfig& cfg,
              std::uint64_t seed, std::uint64_t rep)
      : net_(net), idx_(idx), c_(c), cfg_(cfg) {
    const int L = idx_.num_stations;
    const auto S = net_.arrival_streams.size();
    service_rng_.reserve(static_cast<std::size_t>(L));
    admission_rng_.reserve(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      service_rng_.emplace_back(seed, rep, StreamPurpose::services,
                                static_cast<std::uint64_t>(l));
      admission_rng_.emplace_back(seed, rep, StreamPurpose::admission,
                                  static_cast<std::uint64_t>(l));
    }
    arrival_rng_.reserve(S);
    for (std::size_t s = 0; s < S; ++s)
      arrival_rng_.emplace_back(seed, rep, StreamPurpose::arrivals,
                                static_cast<std::uint64_t>(s));

    occupancy_.assign(static_cast<std::size_t>(L), 0);
    stats_.pair_arrivals.assign(static_cast<std::size_t>(idx_.total_pairs), 0);
    stats_.pair_blocked.assign(static_cast<std::size_t>(idx_.total_pairs), 0);
    stats_.station_arrivals.assign(static_cast<std::size_t>(L), 0);
    stats_.station_blocked.assign(static_cast<std::size_t>(L), 0);
    stats_.station_busy_time.assign(static_cast<std::size_t>(L), 0.0);

    arrival_state_.resize(S);
    for (std::size_t s = 0; s < S; ++s) {
      arrival_state_[s] = init_arrival_state(net_.arrival_streams[s], arrival_rng_[s]);
      schedule_arrival(0.0, static_cast<std::int32_t>(s));
    }
  }

  ReplicationStats run() {
    double batch_end = cfg_.batch_length;
    for (;;) {
      while (heap_.empty() || heap_.top().t > batch_end) {
        if (widths_ok()) {
          finish(batch_end, true);
          return stats_;
        }
        if (batch_end >= cfg_.max_sim_time) {
          finish(batch_end, false);
          return stats_;
        }
        batch_end += cfg_.batch_length;
      }
      const Event ev = heap_.top();
      heap_.pop();
      integrate_to(ev.t);
      if (ev.kind == EventKind::arrival) {
        const auto s = static_cast<std::size_t>(ev.a);
        const ArrivalDraw draw =
            next_arrival(net_.arrival_streams[s], arrival_state_[s], arrival_rng_[s]);
        // The event consumed was scheduled from the previous draw; `draw`
        // produces the class of THIS arrival plus the time of the next one.
        attempt_admission(ev.t, pending_class_[s] - 1, 0);
        pending_class_[s] = draw.class_id;
        push(Event{ev.t + draw.dt, EventKind::arrival, ev.a, 0, seq_++});
      } else {
        const int r = ev.a;
        const int i = ev.b;
        const int l = idx_.pair_station[static_cast<std::size_t>(idx_.pair(r, i))];
        --occupancy_[static_cast<std::size_t>(l)];
        if (i + 1 < idx_.route_length(r)) attempt_admission(ev.t, r, i + 1);
      }
    }
  }

 private:
  void push(const Event& ev) { heap_.push(ev); }

  void schedule_arrival(double now, std::int32_t stream) {
    const auto s = static_cast<std::size_t>(stream);
    const ArrivalDraw draw =
        next_arrival(net_.arrival_streams[s], arrival_state_[s], arrival_rng_[s]);
    pending_class_.resize(std::max(pending_class_.size(), s + 1));
    pending_class_[s] = draw.class_id;
    push(Event{now + draw.dt, EventKind::arrival, stream, 0, seq_++});
  }

  void attempt_admission(double now, int r, int i) {
    const int flat = idx_.pair(r, i);
    const int l = idx_.pair_station[static_cast<std::size_t>(flat)];
    ++stats_.pair_arrivals[static_cast<std::size_t>(flat)];
    ++stats_.station_arrivals[static_cast<std::size_t>(l)];
    const bool accept =
        cfg_.admission == AdmissionRule::fractional
            ? admit_decision(occupancy_[static_cast<std::size_t>(l)], c_[l],
                             admission_rng_[static_cast<std::size_t>(l)])
            : occupancy_[static_cast<std::size_t>(l)] <
                  static_cast<int>(std::floor(c_[l]));
    if (!accept) {
      ++stats_.pair_blocked[static_cast<std::size_t>(flat)];
      ++stats_.station_blocked[static_cast<std::size_t>(l)];
      return;
    }
    ++occupancy_[static_cast<std::size_t>(l)];
    const double dur = sample(net_.stations[static_cast<std::size_t>(l)].service_for_class(r),
                              service_rng_[static_cast<std::size_t>(l)]);
    push(Event{now + dur, EventKind::departure, static_cast<std::int32_t>(r),
               static_cast<std::int32_t>(i), seq_++});
  }

  bool widths_ok() const {
    // Pairs and stations that have seen no arrivals yet are skipped; they are
    // floored to the zero estimate and must not stall the stopping rule.
    for (int p = 0; p < idx_.total_pairs; ++p) {
      const auto a = stats_.pair_arrivals[static_cast<std::size_t>(p)];
      if (a == 0) continue;
      const double ph = static_cast<double>(stats_.pair_blocked[static_cast<std::size_t>(p)]) /
                        static_cast<double>(a);
      if (score_ci_width(ph, a) > cfg_.ci_width) return false;
    }
    for (int l = 0; l < idx_.num_stations; ++l) {
      const auto a = stats_.station_arrivals[static_cast<std::size_t>(l)];
      if (a == 0) continue;
      const double ph = static_cast<double>(stats_.station_blocked[static_cast<std::size_t>(l)]) /
                        static_cast<double>(a);
      if (score_ci_width(ph, a) > cfg_.ci_width) return false;
    }
    return true;
  }

  void integrate_to(double t) {
    const double dt = t - last_t_;
    for (std::size_t l = 0; l < occupancy_.size(); ++l)
      stats_.station_busy_time[l] += occupancy_[l] * dt;
    last_t_ = t;
  }

  void finish(double stop_time, bool converged) {
    integrate_to(stop_time);
    stats_.sim_time = stop_time;
    stats_.converged = converged;
  }

  const NetworkSpec& net_;
  const RouteIndex& idx_;
  Eigen::VectorXd c_;
  const SimConfig& cfg_;

  std::vector<RngStream> arrival_rng_, service_rng_, admission_rng_;
  std::vector<ArrivalState> arrival_state_;
  std::vector<int> pending_class_;
  std::vector<int> occupancy_;
  std::priority_queue<Event, std::vector<Event>, EventLater> heap_;
  std::uint64_t seq_ = 0;
  double last_t_ = 0.0;
  ReplicationStats stats_;
};

double floored_proportion(std::int64_t blocked, std::int64_t arrivals, double floor_value) {
  if (arrivals <= 0) return floor_value;
  const double p = static_cast<double>(blocked) / static_cast<double>(arrivals);
  return std::max(p, floor_value);
}

}  // namespace

BlockingEstimates simulate_blocking(const NetworkSpec& net,
                                    const Eigen::Ref<const Capacity>& c,
                                    const SimConfig& cfg, std::uint64_t seed) {
  {
    auto violations = validate(net);
    auto cap_violations = validate_capacity(net, c);
    violations.insert(violations.end(), cap_violations.begin(), cap_violations.end());
    if (!violations.empty())
      throw std::invalid_argument("simulate_blocking: " + violations.front());
  }
  if (!(cfg.batch_length > 0.0) || !(cfg.ci_width > 0.0) || !(cfg.ci_width < 1.0) ||
      cfg.replications < 1 || !(cfg.zero_floor > 0.0) || !(cfg.zero_floor < cfg.ci_width))
    throw std::invalid_argument("simulate_blocking: invalid simulation config");

  const RouteIndex idx = make_route_index(net);
  const int P = idx.total_pairs;
  const int L = idx.num_stations;

  BlockingEstimates est;
  est.pair_p = Eigen::VectorXd::Zero(P);
  est.pair_ci = Eigen::VectorXd::Zero(P);
  est.pair_arrivals = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(P);
  est.station_p = Eigen::VectorXd::Zero(L);
  est.station_ci = Eigen::VectorXd::Zero(L);
  est.station_arrivals = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>::Zero(L);
  est.station_mean_occupancy = Eigen::VectorXd::Zero(L);
  est.replications = cfg.replications;
  est.converged = true;
  est.epsilon_floor = cfg.zero_floor;

  for (int rep = 0; rep < cfg.replications; ++rep) {
    Replication sim(net, idx, c, cfg, seed, static_cast<std::uint64_t>(rep));
    ReplicationStats stats = sim.run();

    for (int p = 0; p < P; ++p)
      est.pair_p[p] += floored_proportion(stats.pair_blocked[static_cast<std::size_t>(p)],
                                          stats.pair_arrivals[static_cast<std::size_t>(p)],
                                          cfg.zero_floor);
    for (int l = 0; l < L; ++l) {
      est.station_p[l] +=
          floored_proportion(stats.station_blocked[static_cast<std::size_t>(l)],
                             stats.station_arrivals[static_cast<std::size_t>(l)],
                             cfg.zero_floor);
      est.station_mean_occupancy[l] +=
          stats.station_busy_time[static_cast<std::size_t>(l)] / stats.sim_time;
    }
    for (int p = 0; p < P; ++p)
      est.pair_arrivals[p] += stats.pair_arrivals[static_cast<std::size_t>(p)];
    for (int l = 0; l < L; ++l)
      est.station_arrivals[l] += stats.station_arrivals[static_cast<std::size_t>(l)];
    est.total_time += stats.sim_time;
    est.converged = est.converged && stats.converged;
    if (cfg.keep_replication_stats) est.replication_stats.push_back(std::move(stats));
  }

  const double inv_n = 1.0 / cfg.replications;
  est.pair_p *= inv_n;
  est.station_p *= inv_n;
  est.station_mean_occupancy *= inv_n;
  for (int p = 0; p < P; ++p) est.pair_ci[p] = score_ci_width(est.pair_p[p], est.pair_arrivals[p]);
  for (int l = 0; l < L; ++l)
    est.station_ci[l] = score_ci_width(est.station_p[l], est.station_arrivals[l]);
  return est;
}

double objective_value(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c,
                       const BlockingEstimates& est) {
  return objective_value(net, c, est.pair_p);
}

std::pair<double, double> objective_interval(const NetworkSpec& net,
                                             const Eigen::Ref<const Capacity>& c,
                                             const BlockingEstimates& est) {
  Eigen::VectorXd lo(est.pair_p.size()), hi(est.pair_p.size());
  for (Eigen::Index p = 0; p < est.pair_p.size(); ++p) {
    const auto bounds = score_interval(est.pair_p[p], est.pair_arrivals[p]);
    lo[p] = bounds.first;
    hi[p] = bounds.second;
  }
  // Objective is monotone decreasing in every blocking probability.
  return {objective_value(net, c, hi), objective_value(net, c, lo)};
}

void write_replication_csv(const NetworkSpec& net, const BlockingEstimates& est,
                           std::ostream& os) {
  const RouteIndex idx = make_route_index(net);
  os << "replication,r,i,arrivals,blocked,p_hat,ci\n";
  for (std::size_t rep = 0; rep < est.replication_stats.size(); ++rep) {
    const auto& stats = est.replication_stats[rep];
    for (int r = 0; r < idx.num_classes; ++r) {
      for (int i = 0; i < idx.route_length(r); ++i) {
        const auto flat = static_cast<std::size_t>(idx.pair(r, i));
        const auto a = stats.pair_arrivals[flat];
        const double ph = floored_proportion(stats.pair_blocked[flat], a, est.epsilon_floor);
        os << rep + 1 << ',' << r + 1 << ',' << i + 1 << ',' << a << ','
           << stats.pair_blocked[flat] << ',' << ph << ',' << score_ci_width(ph, a) << '\n';
      }
    }
  }
}

}  // namespace lossnet
