#include "lossnet/model.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace lossnet {

double NetworkSpec::class_rate(int class_id) const {
  double rate = 0.0;
  for (const auto& stream : arrival_streams)
    for (const auto& share : stream.class_mix)
      if (share.class_id == class_id) rate += stream.long_run_rate() * share.prob;
  return rate;
}

std::vector<std::string> validate(const NetworkSpec& net) {
  std::vector<std::string> out;
  const int L = net.num_stations();
  const int R = net.num_classes();
  if (L < 1) out.push_back("network: at least one station required");
  if (R < 1) out.push_back("network: at least one class required");

  for (int l = 0; l < L; ++l) {
    const auto& st = net.stations[static_cast<std::size_t>(l)];
    const std::string where = "station " + std::to_string(l + 1);
    if (st.id != l + 1)
      out.push_back(where + ": id must equal its list position (" +
                    std::to_string(l + 1) + ")");
    if (!(st.capacity_cost > 0.0)) out.push_back(where + ": capacity cost must be positive");
    if (st.service_by_class.empty()) {
      st.service.validate_into(out, where + ".service");
    } else {
      if (static_cast<int>(st.service_by_class.size()) != R)
        out.push_back(where + ": per-class service table must have one entry per class");
      for (std::size_t r = 0; r < st.service_by_class.size(); ++r)
        st.service_by_class[r].validate_into(
            out, where + ".service[class " + std::to_string(r + 1) + "]");
    }
  }

  for (int r = 0; r < R; ++r) {
    const auto& cls = net.classes[static_cast<std::size_t>(r)];
    const std::string where = "class " + std::to_string(r + 1);
    if (cls.id != r + 1)
      out.push_back(where + ": id must equal its list position (" +
                    std::to_string(r + 1) + ")");
    if (cls.route.empty()) out.push_back(where + ": route must not be empty");
    std::set<int> seen;
    for (int l : cls.route) {
      if (l < 1 || l > L)
        out.push_back(where + ": route references unknown station " + std::to_string(l));
      else if (!seen.insert(l).second)
        out.push_back(where + ": station " + std::to_string(l) + " repeated in route");
    }
    if (cls.rewards.size() != cls.route.size())
      out.push_back(where + ": rewards must match route length");
    for (double w : cls.rewards)
      if (!(w > 0.0)) out.push_back(where + ": rewards must be positive");
  }

  for (std::size_t s = 0; s < net.arrival_streams.size(); ++s) {
    const std::string where = "arrival stream " + std::to_string(s + 1);
    const auto& stream = net.arrival_streams[s];
    stream.validate_into(out, where);
    for (const auto& share : stream.class_mix)
      if (share.class_id < 1 || share.class_id > R)
        out.push_back(where + ": class mix references unknown class " +
                      std::to_string(share.class_id));
  }
  if (net.arrival_streams.empty())
    out.push_back("network: at least one arrival stream required");
  for (int r = 1; r <= R; ++r) {
    bool fed = false;
    for (const auto& stream : net.arrival_streams)
      for (const auto& share : stream.class_mix)
        if (share.class_id == r) fed = true;
    if (!fed) out.push_back("class " + std::to_string(r) + ": no arrival stream feeds it");
  }
  return out;
}

std::vector<std::string> validate_capacity(const NetworkSpec& net,
                                           const Eigen::Ref<const Capacity>& c) {
  std::vector<std::string> out;
  if (c.size() != net.num_stations()) {
    out.push_back("capacity: expected " + std::to_string(net.num_stations()) +
                  " components, got " + std::to_string(c.size()));
    return out;
  }
  for (Eigen::Index l = 0; l < c.size(); ++l)
    if (!(c[l] >= 1.0))
      out.push_back("capacity: station " + std::to_string(l + 1) + " must be >= 1");
  return out;
}

Capacity round_capacity(const Eigen::Ref<const Capacity>& c) {
  Capacity out(c.size());
  for (Eigen::Index l = 0; l < c.size(); ++l)
    out[l] = std::max(1.0, std::floor(c[l] + 0.5));
  return out;
}

RouteIndex make_route_index(const NetworkSpec& net) {
  RouteIndex idx;
  idx.num_stations = net.num_stations();
  idx.num_classes = net.num_classes();
  idx.offset.resize(static_cast<std::size_t>(idx.num_classes) + 1, 0);
  for (int r = 0; r < idx.num_classes; ++r)
    idx.offset[static_cast<std::size_t>(r) + 1] =
        idx.offset[static_cast<std::size_t>(r)] +
        static_cast<int>(net.classes[static_cast<std::size_t>(r)].route.size());
  idx.total_pairs = idx.offset.back();
  idx.pair_station.resize(static_cast<std::size_t>(idx.total_pairs));
  idx.position.assign(
      static_cast<std::size_t>(idx.num_classes) * static_cast<std::size_t>(idx.num_stations),
      -1);
  for (int r = 0; r < idx.num_classes; ++r) {
    const auto& route = net.classes[static_cast<std::size_t>(r)].route;
    for (int i = 0; i < static_cast<int>(route.size()); ++i) {
      const int l0 = route[static_cast<std::size_t>(i)] - 1;
      idx.pair_station[static_cast<std::size_t>(idx.pair(r, i))] = l0;
      idx.position[static_cast<std::size_t>(r) * static_cast<std::size_t>(idx.num_stations) +
                   static_cast<std::size_t>(l0)] = i;
    }
  }
  return idx;
}

double objective_value(const NetworkSpec& net, const Eigen::Ref<const Capacity>& c,
                       const Eigen::Ref<const Eigen::VectorXd>& pair_block_probs) {
  const RouteIndex idx = make_route_index(net);
  if (pair_block_probs.size() != idx.total_pairs)
    throw std::invalid_argument(
        "objective_value: blocking vector has " + std::to_string(pair_block_probs.size()) +
        " entries, network has " + std::to_string(idx.total_pairs) + " route pairs");
  if (c.size() != idx.num_stations)
    throw std::invalid_argument("objective_value: capacity size mismatch");

  double value = 0.0;
  for (int l = 0; l < idx.num_stations; ++l)
    value -= c[l] * net.stations[static_cast<std::size_t>(l)].capacity_cost;

  for (int r = 0; r < idx.num_classes; ++r) {
    const auto& cls = net.classes[static_cast<std::size_t>(r)];
    const double lambda = net.class_rate(cls.id);
    double survive = 1.0;  // probability the route prefix up to position i survives
    double reward = 0.0;
    for (int i = 0; i < idx.route_length(r); ++i) {
      const double p = pair_block_probs[idx.pair(r, i)];
      if (p < 0.0 || p > 1.0)
        throw std::invalid_argument("objective_value: blocking probability outside [0,1]");
      survive *= 1.0 - p;
      reward += cls.rewards[static_cast<std::size_t>(i)] * survive;
    }
    value += lambda * reward;
  }
  return value;
}

}  // namespace lossnet
