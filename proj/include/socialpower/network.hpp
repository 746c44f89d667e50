#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "socialpower/errors.hpp"

namespace socialpower {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Absolute tolerance for row/column stochasticity checks.
inline constexpr double kStochasticTol = 1e-12;
// Simplex drift handling for computed power vectors: below the renorm
// floor the vector is kept as-is, between floor and tol it is
// renormalized, above tol it is an error.
inline constexpr double kSimplexTol = 1e-12;
inline constexpr double kSimplexRenormFloor = 1e-14;

// A point on the n-simplex: social power / self-appraisal.
class PowerVector {
 public:
  // User-supplied data: components >= 0, sum within 1e-12 of 1. Kept
  // bit-for-bit (no renormalization).
  static PowerVector validated(Vector x);

  // Computed data: renormalizes when |sum-1| is in (1e-14, 1e-12],
  // throws SimplexViolation beyond that or on negative components.
  static PowerVector from_computation(Vector x);

  static PowerVector uniform(int n);
  static PowerVector vertex(int n, int i);  // e_i, 0-based i

  const Vector& values() const { return x_; }
  double operator[](int i) const { return x_(i); }
  int size() const { return static_cast<int>(x_.size()); }

 private:
  explicit PowerVector(Vector x) : x_(std::move(x)) {}
  Vector x_;
};

// Row-stochastic, zero-diagonal relative interaction matrix plus size.
class InfluenceNetwork {
 public:
  int size() const { return n_; }
  const Matrix& interactions() const { return C_; }
  // Rows whose sums were renormalized during validation (0-based).
  const std::vector<int>& renormalized_rows() const { return renormalized_; }

  friend InfluenceNetwork validate_network(const Matrix& raw);

 private:
  InfluenceNetwork(int n, Matrix C, std::vector<int> renorm)
      : n_(n), C_(std::move(C)), renormalized_(std::move(renorm)) {}
  int n_;
  Matrix C_;
  std::vector<int> renormalized_;
};

// Validates the relative interaction matrix: square with n >= 2, zero
// diagonal, nonnegative entries, rows summing to 1 within 1e-12. Rows
// within tolerance but not exact are renormalized and reported.
// Throws NonSquare / NegativeEntry / NonzeroDiagonal / RowSumViolation
// naming the first violation in row-major scan order.
InfluenceNetwork validate_network(const Matrix& raw);

// Susceptibility vector theta with its derived scalars and index sets.
// Construction enforces theta_i in [0,1) and at least one theta_j > 0.
class StubbornnessProfile {
 public:
  static StubbornnessProfile validated(Vector theta);

  const Vector& theta() const { return theta_; }
  double theta_min() const { return theta_min_; }
  double theta_ave() const { return theta_ave_; }
  double theta_max() const { return theta_max_; }
  // zeta = n*theta_ave - theta_min
  double zeta() const { return zeta_; }
  // V_f: indices with theta == 0 (fully stubborn), 0-based.
  const std::vector<int>& fully_stubborn() const { return fully_; }
  // V_p: indices with theta > 0 (partially stubborn), 0-based.
  const std::vector<int>& partially_stubborn() const { return partially_; }
  int fully_stubborn_count() const { return static_cast<int>(fully_.size()); }
  int size() const { return static_cast<int>(theta_.size()); }

 private:
  explicit StubbornnessProfile(Vector theta);
  Vector theta_;
  double theta_min_, theta_ave_, theta_max_, zeta_;
  std::vector<int> fully_, partially_;
};

// Strongly connected components and the structural cases the closed
// forms and certificates branch on. Node indices are 0-based.
struct GraphStructure {
  std::vector<std::vector<int>> sccs;   // partition of {0..n-1}, each sorted
  std::vector<int> sink_sccs;           // indices into sccs
  std::optional<int> star_center;
  bool doubly_stochastic = false;
};

// SCCs via Tarjan, sink detection, star-center detection (every edge
// incident to one node), doubly-stochastic test on column sums.
GraphStructure analyze_structure(const InfluenceNetwork& net);

// Every sink SCC contains some i with theta_i < 1, and if x0 is exactly
// a vertex e_i then theta_i < 1. Takes raw theta so degenerate profiles
// can be interrogated.
bool check_assumption_a1(const InfluenceNetwork& net, const Vector& theta,
                         const Vector& x0);

// All theta_i < 1 and at least one theta_j > 0.
bool check_assumption_a2(const Vector& theta);

}  // namespace socialpower
