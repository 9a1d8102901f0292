#pragma once
// Exact evaluation for Markovian benchmark systems: the Erlang loss formula
// for a single station, the two-station tandem solved as a finite CTMC with
// marked transition rates for the two reward streams, and integer grid search
// over tandem capacities.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace lossnet {

// Erlang blocking probability B(a, c) via the stable recursion
// B(0) = 1, B(j) = a B(j-1) / (j + a B(j-1)).
double erlang_b(double offered_load, int servers);

struct TandemSpec {
  double lambda = 16.0;  // external arrival rate into station 1
  double mu1 = 0.8;      // per-server completion rates
  double mu2 = 0.6;
  double theta1 = 0.2;   // capacity costs
  double theta2 = 0.3;
  double omega1 = 1.0;   // per-completion rewards
  double omega2 = 0.9;
  int c1 = 1;
  int c2 = 1;
};

struct TandemSolution {
  Eigen::VectorXd pi;       // stationary law over states x2*(c1+1) + x1
  double residual = 0.0;    // max-norm of pi * D
  double throughput1 = 0.0; // stationary rate of accepted external arrivals
  double throughput2 = 0.0; // stationary rate of accepted transfers
  double block1 = 0.0;      // blocking fraction at station 1
  double block2 = 0.0;      // blocking fraction of the transfer stream
  double objective = 0.0;
};

// Generator of the tandem CTMC over states (x1, x2), 0 <= xi <= ci, assembled
// directly from the transition rules: external arrivals join station 1 when
// not full, station-1 completions transfer to station 2 (or drop when it is
// full), station-2 completions leave. State index is x2 * (c1 + 1) + x1.
Eigen::SparseMatrix<double> tandem_generator(const TandemSpec& spec);

// The same generator assembled from Kronecker products of shift and diagonal
// building blocks, kept as an independent cross-check of `tandem_generator`;
// the two must agree entry for entry.
Eigen::SparseMatrix<double> tandem_generator_kronecker(const TandemSpec& spec);

// Solves pi D = 0, sum(pi) = 1 by a sparse direct factorization, then reads
// off the marked transition rates of the two reward streams:
// throughput1 = lambda P(x1 < c1), throughput2 = E[x1 mu1 1{x2 < c2}].
// The objective is -theta.c + omega1 throughput1 + omega2 throughput2.
TandemSolution tandem_exact(const TandemSpec& spec);

struct GridSearchResult {
  int best_c1 = 1;
  int best_c2 = 1;
  double best_value = 0.0;
  // Row-major table over the search box: value(c1, c2).
  Eigen::MatrixXd values;
  int lo1 = 1, lo2 = 1;
};

// Exact objective at every integer point of [lo1, hi1] x [lo2, hi2]; ties are
// broken toward the lexicographically smallest capacity pair. Grid points are
// evaluated concurrently.
GridSearchResult grid_search(const TandemSpec& spec, int lo1, int hi1, int lo2, int hi2);

// CSV export of the value table, columns c1,c2,f.
void write_grid_csv(const GridSearchResult& result, std::ostream& os);

}  // namespace lossnet
