#include "lossnet/surrogate.hpp"

#include <cmath>
#include <stdexcept>

namespace lossnet {

double weibull_blocking(double c, double tau, double k) {
  return std::exp(-std::pow(c * tau, k));
}

double weibull_blocking_dc(double c, double tau, double k) {
  if (c <= 0.0 && k < 1.0)
    throw std::domain_error("weibull_blocking_dc: slope singular at c = 0 for k < 1");
  const double ck = std::pow(c * tau, k);
  return -k * std::pow(tau, k) * std::pow(c, k - 1.0) * std::exp(-ck);
}

namespace {

double clamp_estimate(double p, double floor_value) {
  return std::min(std::max(p, floor_value), 1.0 - floor_value);
}

double calibrated_tau(double p, double c_prev, double k) {
  // Solves exp(-(c_prev tau)^k) = p for tau; requires p in (0, 1).
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("calibration: blocking estimate must lie strictly in (0,1)");
  return std::pow(-std::log(p), 1.0 / k) / c_prev;
}

void check_calibration_inputs(const Eigen::Ref<const Capacity>& c_prev, double k,
                              const NetworkSpec& net) {
  if (!(k > 0.0)) throw std::invalid_argument("calibration: shape k must be positive");
  const auto violations = validate_capacity(net, c_prev);
  if (!violations.empty()) throw std::invalid_argument("calibration: " + violations.front());
}

}  // namespace

SurrogateParams calibrate_coupled(const NetworkSpec& net, const BlockingEstimates& est,
                                  const Eigen::Ref<const Capacity>& c_prev, double k) {
  check_calibration_inputs(c_prev, k, net);
  const RouteIndex idx = make_route_index(net);
  const double floor_value = est.epsilon_floor > 0.0 ? est.epsilon_floor : 1e-12;

  SurrogateParams params;
  params.mode = SurrogateMode::coupled;
  params.k = k;
  params.c_prev = c_prev;
  params.tau.resize(idx.total_pairs);
  for (int p = 0; p < idx.total_pairs; ++p) {
    const int l = idx.pair_station[static_cast<std::size_t>(p)];
    params.tau[p] = calibrated_tau(clamp_estimate(est.pair_p[p], floor_value), c_prev[l], k);
  }
  return params;
}

SurrogateParams calibrate_decoupled(const NetworkSpec& net, const BlockingEstimates& est,
                                    const Eigen::Ref<const Capacity>& c_prev, double k) {
  check_calibration_inputs(c_prev, k, net);
  const double floor_value = est.epsilon_floor > 0.0 ? est.epsilon_floor : 1e-12;

  SurrogateParams params;
  params.mode = SurrogateMode::decoupled;
  params.k = k;
  params.c_prev = c_prev;
  params.tau.resize(net.num_stations());
  params.station_p.resize(net.num_stations());
  for (int l = 0; l < net.num_stations(); ++l) {
    params.station_p[l] = clamp_estimate(est.station_p[l], floor_value);
    params.tau[l] = calibrated_tau(params.station_p[l], c_prev[l], k);
  }
  params.pair_p = est.pair_p.cwiseMax(floor_value).cwiseMin(1.0 - floor_value);
  return params;
}

double surrogate_objective(const SurrogateParams& params, const NetworkSpec& net,
                           const Eigen::Ref<const Capacity>& c) {
  if (params.mode != SurrogateMode::coupled)
    throw std::invalid_argument("surrogate_objective: coupled parameters required");
  const RouteIndex idx = make_route_index(net);

  double value = 0.0;
  for (int l = 0; l < idx.num_stations; ++l)
    value -= c[l] * net.stations[static_cast<std::size_t>(l)].capacity_cost;
  for (int r = 0; r < idx.num_classes; ++r) {
    const auto& cls = net.classes[static_cast<std::size_t>(r)];
    const double lambda = net.class_rate(cls.id);
    double survive = 1.0;
    double reward = 0.0;
    for (int i = 0; i < idx.route_length(r); ++i) {
      const int flat = idx.pair(r, i);
      const int l = idx.pair_station[static_cast<std::size_t>(flat)];
      survive *= 1.0 - weibull_blocking(c[l], params.tau[flat], params.k);
      reward += cls.rewards[static_cast<std::size_t>(i)] * survive;
    }
    value += lambda * reward;
  }
  return value;
}

Eigen::VectorXd surrogate_gradient(const SurrogateParams& params, const NetworkSpec& net,
                                   const Eigen::Ref<const Capacity>& c) {
  if (params.mode != SurrogateMode::coupled)
    throw std::invalid_argument("surrogate_gradient: coupled parameters required");
  const RouteIndex idx = make_route_index(net);

  Eigen::VectorXd grad(idx.num_stations);
  for (int l = 0; l < idx.num_stations; ++l)
    grad[l] = -net.stations[static_cast<std::size_t>(l)].capacity_cost;

  std::vector<double> block(16);
  for (int r = 0; r < idx.num_classes; ++r) {
    const auto& cls = net.classes[static_cast<std::size_t>(r)];
    const double lambda = net.class_rate(cls.id);
    const int n = idx.route_length(r);
    block.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const int flat = idx.pair(r, i);
      block[static_cast<std::size_t>(i)] =
          weibull_blocking(c[idx.pair_station[static_cast<std::size_t>(flat)]],
                           params.tau[flat], params.k);
    }
    // For each visited position m, accumulate the reward mass downstream of m
    // with the blocking factor at m excluded from every prefix product.
    for (int m = 0; m < n; ++m) {
      const int flat_m = idx.pair(r, m);
      const int l = idx.pair_station[static_cast<std::size_t>(flat_m)];
      double prefix = 1.0;
      for (int j = 0; j < m; ++j) prefix *= 1.0 - block[static_cast<std::size_t>(j)];
      double mass = 0.0;
      double partial = prefix;
      for (int i = m; i < n; ++i) {
        if (i > m) partial *= 1.0 - block[static_cast<std::size_t>(i)];
        mass += cls.rewards[static_cast<std::size_t>(i)] * partial;
      }
      const double slope = weibull_blocking_dc(c[l], params.tau[flat_m], params.k);
      grad[l] += lambda * (-slope) * mass;
    }
  }
  return grad;
}

Eigen::VectorXd decoupled_gamma(const SurrogateParams& params, const NetworkSpec& net) {
  if (params.mode != SurrogateMode::decoupled)
    throw std::invalid_argument("decoupled_gamma: decoupled parameters required");
  const RouteIndex idx = make_route_index(net);

  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(idx.num_stations);
  for (int r = 0; r < idx.num_classes; ++r) {
    const auto& cls = net.classes[static_cast<std::size_t>(r)];
    const double lambda = net.class_rate(cls.id);
    const int n = idx.route_length(r);
    for (int m = 0; m < n; ++m) {
      const int flat_m = idx.pair(r, m);
      const int l = idx.pair_station[static_cast<std::size_t>(flat_m)];
      if (!(params.station_p[l] > 0.0))
        throw std::logic_error("decoupled_gamma: station estimate must be positive");
      double prefix = 1.0;
      for (int j = 0; j < m; ++j) prefix *= 1.0 - params.pair_p[idx.pair(r, j)];
      double mass = 0.0;
      double partial = prefix;
      for (int i = m; i < n; ++i) {
        if (i > m) partial *= 1.0 - params.pair_p[idx.pair(r, i)];
        mass += cls.rewards[static_cast<std::size_t>(i)] * partial;
      }
      gamma[l] += lambda * (params.pair_p[flat_m] / params.station_p[l]) * mass;
    }
  }
  return gamma;
}

}  // namespace lossnet
