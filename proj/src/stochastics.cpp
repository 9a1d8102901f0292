#include "lossnet/stochastics.hpp"

#include <cmath>
#include <stdexcept>

namespace lossnet {

void DistributionSpec::validate_into(std::vector<std::string>& out,
                                     const std::string& where) const {
  switch (kind) {
    case DistKind::exponential:
      if (!(rate > 0.0)) out.push_back(where + ": exponential rate must be positive");
      break;
    case DistKind::coxian2:
      if (!(mean > 0.0)) out.push_back(where + ": coxian2 mean must be positive");
      if (!(cov >= kMinCoxian2Cov))
        out.push_back(where + ": coxian2 cov must be >= sqrt(1/2)");
      break;
  }
}

double sample_coxian2(double mean, double cov, RngStream& rng) {
  if (!(mean > 0.0) || !(cov >= kMinCoxian2Cov))
    throw std::invalid_argument("sample_coxian2: need mean > 0 and cov >= sqrt(1/2)");
  const double q = 0.5 / (cov * cov);  // in (0, 1]
  const double e1 = rng.exponential(1.0);
  const double e2 = rng.exponential(1.0);
  const bool b = rng.bernoulli(q);
  return 0.5 * mean * (e1 + (b ? e2 / q : 0.0));
}

double sample(const DistributionSpec& dist, RngStream& rng) {
  switch (dist.kind) {
    case DistKind::exponential:
      return rng.exponential(dist.rate);
    case DistKind::coxian2:
      return sample_coxian2(dist.mean, dist.cov, rng);
  }
  throw std::logic_error("sample: unknown distribution kind");
}

double ArrivalProcessSpec::long_run_rate() const {
  switch (kind) {
    case ArrivalKind::poisson:
      return rate;
    case ArrivalKind::renewal:
      return 1.0 / interarrival.mean_value();
    case ArrivalKind::mmpp3:
      return (state_rates[0] + state_rates[1] + state_rates[2]) / 3.0;
  }
  throw std::logic_error("long_run_rate: unknown arrival kind");
}

void ArrivalProcessSpec::validate_into(std::vector<std::string>& out,
                                       const std::string& where) const {
  switch (kind) {
    case ArrivalKind::poisson:
      if (!(rate > 0.0)) out.push_back(where + ": poisson rate must be positive");
      break;
    case ArrivalKind::renewal:
      interarrival.validate_into(out, where + ".interarrival");
      break;
    case ArrivalKind::mmpp3:
      for (int s = 0; s < 3; ++s)
        if (!(state_rates[s] > 0.0))
          out.push_back(where + ": mmpp3 state rate " + std::to_string(s + 1) +
                        " must be positive");
      if (!(switch_rate > 0.0))
        out.push_back(where + ": mmpp3 switch rate must be positive");
      break;
  }
  if (class_mix.empty()) {
    out.push_back(where + ": class mix must not be empty");
  } else {
    double total = 0.0;
    for (const auto& share : class_mix) {
      if (!(share.prob > 0.0))
        out.push_back(where + ": class mix probabilities must be positive");
      total += share.prob;
    }
    if (std::abs(total - 1.0) > 1e-9)
      out.push_back(where + ": class mix probabilities must sum to 1");
  }
}

ArrivalState init_arrival_state(const ArrivalProcessSpec& proc, RngStream& rng) {
  ArrivalState st;
  if (proc.kind == ArrivalKind::mmpp3) st.mmpp_state = rng.uniform_int(3);
  return st;
}

namespace {

int other_state(int current, bool pick_second) {
  // Uniform over the two states different from `current`.
  static constexpr int kOthers[3][2] = {{1, 2}, {0, 2}, {0, 1}};
  return kOthers[current][pick_second ? 1 : 0];
}

}  // namespace

ArrivalDraw next_arrival(const ArrivalProcessSpec& proc, ArrivalState& state,
                         RngStream& rng) {
  ArrivalDraw draw;
  switch (proc.kind) {
    case ArrivalKind::poisson:
      draw.dt = rng.exponential(proc.rate);
      break;
    case ArrivalKind::renewal:
      draw.dt = sample(proc.interarrival, rng);
      break;
    case ArrivalKind::mmpp3: {
      // Race the arrival clock against the background switch clock until an
      // arrival fires; each switch moves to one of the other two states.
      double t = 0.0;
      for (;;) {
        const double to_arrival = rng.exponential(proc.state_rates[state.mmpp_state]);
        const double to_switch = rng.exponential(proc.switch_rate);
        if (to_arrival <= to_switch) {
          t += to_arrival;
          break;
        }
        t += to_switch;
        state.mmpp_state = other_state(state.mmpp_state, rng.bernoulli(0.5));
      }
      draw.dt = t;
      break;
    }
  }

  draw.class_id = proc.class_mix.front().class_id;
  if (proc.class_mix.size() > 1) {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (const auto& share : proc.class_mix) {
      acc += share.prob;
      draw.class_id = share.class_id;
      if (u < acc) break;
    }
  }
  return draw;
}

}  // namespace lossnet
