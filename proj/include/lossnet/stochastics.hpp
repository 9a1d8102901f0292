#pragma once
// Seeded variate generation: reproducible substreams plus the distribution
// and arrival-process catalog used by the network simulator (exponential,
// two-stage Coxian, Poisson, renewal, 3-state MMPP).

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lossnet {

// Substreams of one replication are tagged by purpose so that extra draws on
// one consumer never shift another consumer's sequence.
enum class StreamPurpose : std::uint64_t {
  arrivals = 1,
  services = 2,
  admission = 3,
  optimizer = 4,
  scenario = 5,
};

// splitmix64 finalizer; spreads (seed, replication, purpose, id) into
// well-separated engine seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(a) ^ b);
}

// One reproducible variate stream. Identical (seed, replication, purpose, id)
// always replays the identical sequence; the engine (mt19937_64) and all
// inverse-CDF transforms below are fixed by this library, not by the platform
// random facilities.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t replication, StreamPurpose purpose,
            std::uint64_t id = 0)
      : gen_(mix64(mix64(mix64(seed, replication),
                         static_cast<std::uint64_t>(purpose)),
                   id)) {}

  std::uint64_t next_u64() { return gen_(); }

  // 53-bit uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double exponential(double rate) {
    // -log(1 - U) with U in [0,1); argument stays in (0,1].
    return -std::log1p(-uniform01()) / rate;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Uniform over {0, ..., n-1}; n is tiny here (background states, multistart
  // picks), so the floor construction is adequate.
  int uniform_int(int n) {
    int v = static_cast<int>(uniform01() * n);
    return v < n ? v : n - 1;
  }

 private:
  std::mt19937_64 gen_;
};

// ---------------------------------------------------------------------------
// Service / interarrival distributions.

enum class DistKind { exponential, coxian2 };

// Lower bound on the Coxian-2 coefficient of variation: the continuation
// probability q = 1/(2 cov^2) must lie in (0, 1].
inline constexpr double kMinCoxian2Cov = 0.70710678118654752440;

struct DistributionSpec {
  DistKind kind = DistKind::exponential;
  double rate = 1.0;  // exponential
  double mean = 1.0;  // coxian2 target mean
  double cov = 1.0;   // coxian2 target coefficient of variation

  static DistributionSpec Exponential(double rate) {
    DistributionSpec d;
    d.kind = DistKind::exponential;
    d.rate = rate;
    return d;
  }
  static DistributionSpec Coxian2(double mean, double cov) {
    DistributionSpec d;
    d.kind = DistKind::coxian2;
    d.mean = mean;
    d.cov = cov;
    return d;
  }

  double mean_value() const {
    return kind == DistKind::exponential ? 1.0 / rate : mean;
  }

  void validate_into(std::vector<std::string>& out, const std::string& where) const;
};

// Two-stage Coxian scaled to a target mean and coefficient of variation:
// scale * (E1 + (1/q) E2 B) with q = 1/(2 cov^2), scale = mean / 2.
double sample_coxian2(double mean, double cov, RngStream& rng);

double sample(const DistributionSpec& dist, RngStream& rng);

// ---------------------------------------------------------------------------
// Arrival processes.

enum class ArrivalKind { poisson, renewal, mmpp3 };

// Share of a stream's arrivals belonging to one customer class.
struct ClassShare {
  int class_id = 1;  // 1-based, as in network configs
  double prob = 1.0;
};

struct ArrivalProcessSpec {
  ArrivalKind kind = ArrivalKind::poisson;
  double rate = 1.0;                       // poisson
  DistributionSpec interarrival;           // renewal
  std::array<double, 3> state_rates{};     // mmpp3: per background state
  double switch_rate = 1.0;                // mmpp3: background jump rate
  std::vector<ClassShare> class_mix{ClassShare{}};

  // Long-run arrival rate of the whole stream. The mmpp3 background chain
  // switches symmetrically (destination uniform over the other two states),
  // so its stationary law is uniform and the mean rate is the plain average.
  double long_run_rate() const;

  void validate_into(std::vector<std::string>& out, const std::string& where) const;
};

struct ArrivalState {
  int mmpp_state = 0;
};

// Background state at time zero is drawn from the uniform law, which is the
// stationary distribution of the symmetric switch chain.
ArrivalState init_arrival_state(const ArrivalProcessSpec& proc, RngStream& rng);

struct ArrivalDraw {
  double dt = 0.0;
  int class_id = 1;
};

// Advances the process by one arrival: the returned dt is the time until the
// next arrival and class_id is drawn from the stream's class mix. Singleton
// mixes consume no randomness for the class draw.
ArrivalDraw next_arrival(const ArrivalProcessSpec& proc, ArrivalState& state,
                         RngStream& rng);

}  // namespace lossnet
