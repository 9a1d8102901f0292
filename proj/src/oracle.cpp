#include "lossnet/oracle.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>
#include <vector>

namespace lossnet {

double erlang_b(double offered_load, int servers) {
  if (!(offered_load > 0.0) || servers < 0)
    throw std::invalid_argument("erlang_b: need offered load > 0 and servers >= 0");
  double b = 1.0;
  for (int j = 1; j <= servers; ++j) b = offered_load * b / (j + offered_load * b);
  return b;
}

namespace {

constexpr int kMaxStates = 100000;

void check_spec(const TandemSpec& s) {
  if (!(s.lambda > 0.0 && s.mu1 > 0.0 && s.mu2 > 0.0 && s.theta1 > 0.0 &&
        s.theta2 > 0.0 && s.omega1 > 0.0 && s.omega2 > 0.0))
    throw std::invalid_argument("tandem: rates, costs and rewards must be positive");
  if (s.c1 < 1 || s.c2 < 1)
    throw std::invalid_argument("tandem: capacities must be >= 1");
  if ((s.c1 + 1) * (s.c2 + 1) > kMaxStates)
    throw std::invalid_argument("tandem: state space exceeds the solver cap");
}

inline int state_of(int x1, int x2, int c1) { return x2 * (c1 + 1) + x1; }

using Triplets = std::vector<Eigen::Triplet<double>>;

Eigen::SparseMatrix<double> from_triplets(int n, Triplets& trip) {
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// Sparse Kronecker product with the x1 factor varying fastest:
// entry[(j, i), (j', i')] = A(j, j') * B(i, i') at row j*nb + i.
Eigen::SparseMatrix<double> kron(const Eigen::SparseMatrix<double>& a,
                                 const Eigen::SparseMatrix<double>& b) {
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(a.nonZeros()) * static_cast<std::size_t>(b.nonZeros()));
  const int nb = static_cast<int>(b.rows());
  for (int ka = 0; ka < a.outerSize(); ++ka)
    for (Eigen::SparseMatrix<double>::InnerIterator ia(a, ka); ia; ++ia)
      for (int kb = 0; kb < b.outerSize(); ++kb)
        for (Eigen::SparseMatrix<double>::InnerIterator ib(b, kb); ib; ++ib)
          trip.emplace_back(static_cast<int>(ia.row()) * nb + static_cast<int>(ib.row()),
                            static_cast<int>(ia.col()) * nb + static_cast<int>(ib.col()),
                            ia.value() * ib.value());
  Eigen::SparseMatrix<double> m(a.rows() * b.rows(), a.cols() * b.cols());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

Eigen::SparseMatrix<double> with_zero_row_sums(Eigen::SparseMatrix<double> off_diag) {
  const int n = static_cast<int>(off_diag.rows());
  Eigen::VectorXd row_sums = off_diag * Eigen::VectorXd::Ones(n);
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, -row_sums[i]);
  Eigen::SparseMatrix<double> diag(n, n);
  diag.setFromTriplets(trip.begin(), trip.end());
  return off_diag + diag;
}

}  // namespace

Eigen::SparseMatrix<double> tandem_generator(const TandemSpec& s) {
  check_spec(s);
  const int n = (s.c1 + 1) * (s.c2 + 1);
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(4 * n));
  for (int x2 = 0; x2 <= s.c2; ++x2) {
    for (int x1 = 0; x1 <= s.c1; ++x1) {
      const int from = state_of(x1, x2, s.c1);
      double out = 0.0;
      if (x1 < s.c1) {
        trip.emplace_back(from, state_of(x1 + 1, x2, s.c1), s.lambda);
        out += s.lambda;
      }
      if (x1 > 0) {
        const double rate = x1 * s.mu1;
        // Completed customers transfer when station 2 has room, otherwise drop.
        const int to = x2 < s.c2 ? state_of(x1 - 1, x2 + 1, s.c1)
                                 : state_of(x1 - 1, x2, s.c1);
        trip.emplace_back(from, to, rate);
        out += rate;
      }
      if (x2 > 0) {
        const double rate = x2 * s.mu2;
        trip.emplace_back(from, state_of(x1, x2 - 1, s.c1), rate);
        out += rate;
      }
      trip.emplace_back(from, from, -out);
    }
  }
  return from_triplets(n, trip);
}

Eigen::SparseMatrix<double> tandem_generator_kronecker(const TandemSpec& s) {
  check_spec(s);
  const int n1 = s.c1 + 1;
  const int n2 = s.c2 + 1;

  Triplets trip;
  // Accepted external arrivals: upper shift in x1, scaled by the arrival rate.
  for (int i = 0; i < s.c1; ++i) trip.emplace_back(i, i + 1, s.lambda);
  Eigen::SparseMatrix<double> arrivals1 = from_triplets(n1, trip);

  // Station-1 completions: lower shift in x1 with occupancy-scaled rates.
  trip.clear();
  for (int i = 1; i <= s.c1; ++i) trip.emplace_back(i, i - 1, i * s.mu1);
  Eigen::SparseMatrix<double> completions1 = from_triplets(n1, trip);

  // Station-2 completions: lower shift in x2.
  trip.clear();
  for (int j = 1; j <= s.c2; ++j) trip.emplace_back(j, j - 1, j * s.mu2);
  Eigen::SparseMatrix<double> completions2 = from_triplets(n2, trip);

  // Unit upper shift in x2 (transfer accepted) and unit mass at the full
  // state (transfer dropped).
  trip.clear();
  for (int j = 0; j < s.c2; ++j) trip.emplace_back(j, j + 1, 1.0);
  Eigen::SparseMatrix<double> shift_up2 = from_triplets(n2, trip);
  trip.clear();
  trip.emplace_back(s.c2, s.c2, 1.0);
  Eigen::SparseMatrix<double> full2 = from_triplets(n2, trip);

  Triplets id_trip;
  for (int i = 0; i < n1; ++i) id_trip.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> id1 = from_triplets(n1, id_trip);
  id_trip.clear();
  for (int j = 0; j < n2; ++j) id_trip.emplace_back(j, j, 1.0);
  Eigen::SparseMatrix<double> id2 = from_triplets(n2, id_trip);

  Eigen::SparseMatrix<double> off_diag =
      kron(id2, arrivals1) +
      kron(Eigen::SparseMatrix<double>(shift_up2 + full2), completions1) +
      kron(completions2, id1);
  return with_zero_row_sums(std::move(off_diag));
}

TandemSolution tandem_exact(const TandemSpec& s) {
  check_spec(s);
  const Eigen::SparseMatrix<double> d = tandem_generator(s);
  const int n = static_cast<int>(d.rows());

  // pi D = 0 with one balance equation replaced by the normalization row.
  Triplets trip;
  trip.reserve(static_cast<std::size_t>(d.nonZeros()) + static_cast<std::size_t>(n));
  for (int k = 0; k < d.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(d, k); it; ++it)
      if (it.col() != n - 1)
        trip.emplace_back(static_cast<int>(it.col()), static_cast<int>(it.row()), it.value());
  for (int i = 0; i < n; ++i) trip.emplace_back(n - 1, i, 1.0);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("tandem_exact: stationary solve failed");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs[n - 1] = 1.0;
  TandemSolution sol;
  sol.pi = lu.solve(rhs);

  sol.residual = (Eigen::VectorXd(d.transpose() * sol.pi)).cwiseAbs().maxCoeff();

  double p_full1 = 0.0;
  double transfer_attempt = 0.0;
  double transfer_accept = 0.0;
  for (int x2 = 0; x2 <= s.c2; ++x2) {
    for (int x1 = 0; x1 <= s.c1; ++x1) {
      const double p = sol.pi[state_of(x1, x2, s.c1)];
      if (x1 == s.c1) p_full1 += p;
      const double rate = x1 * s.mu1 * p;
      transfer_attempt += rate;
      if (x2 < s.c2) transfer_accept += rate;
    }
  }
  sol.block1 = p_full1;
  sol.block2 = transfer_attempt > 0.0 ? 1.0 - transfer_accept / transfer_attempt : 0.0;
  sol.throughput1 = s.lambda * (1.0 - p_full1);
  sol.throughput2 = transfer_accept;
  sol.objective = -s.theta1 * s.c1 - s.theta2 * s.c2 + s.omega1 * sol.throughput1 +
                  s.omega2 * sol.throughput2;
  return sol;
}

GridSearchResult grid_search(const TandemSpec& spec, int lo1, int hi1, int lo2, int hi2) {
  if (lo1 < 1 || lo2 < 1 || hi1 < lo1 || hi2 < lo2)
    throw std::invalid_argument("grid_search: malformed search box");

  GridSearchResult result;
  result.lo1 = lo1;
  result.lo2 = lo2;
  result.values.resize(hi1 - lo1 + 1, hi2 - lo2 + 1);

  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int c1 = lo1 + static_cast<int>(w); c1 <= hi1; c1 += static_cast<int>(workers)) {
        TandemSpec point = spec;
        point.c1 = c1;
        for (int c2 = lo2; c2 <= hi2; ++c2) {
          point.c2 = c2;
          result.values(c1 - lo1, c2 - lo2) = tandem_exact(point).objective;
        }
      }
    });
  }
  for (auto& t : pool) t.join();

  result.best_c1 = lo1;
  result.best_c2 = lo2;
  result.best_value = result.values(0, 0);
  for (int c1 = lo1; c1 <= hi1; ++c1)
    for (int c2 = lo2; c2 <= hi2; ++c2)
      if (result.values(c1 - lo1, c2 - lo2) > result.best_value) {
        result.best_value = result.values(c1 - lo1, c2 - lo2);
        result.best_c1 = c1;
        result.best_c2 = c2;
      }
  return result;
}

void write_grid_csv(const GridSearchResult& result, std::ostream& os) {
  os << "c1,c2,f\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < result.values.rows(); ++i)
    for (Eigen::Index j = 0; j < result.values.cols(); ++j)
      os << result.lo1 + i << ',' << result.lo2 + j << ',' << result.values(i, j) << '\n';
}

}  // namespace lossnet
