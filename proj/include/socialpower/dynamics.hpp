#pragma once

#include <limits>
#include <vector>

#include "socialpower/network.hpp"

namespace socialpower {

// Stopping defaults. Inner loops (opinion / perceived-power) may need
// many steps when contraction rates approach 1; outer power loops are
// geometric in practice.
inline constexpr double kDefaultTol = 1e-12;
inline constexpr long kMaxInnerIterations = 1'000'000;
inline constexpr long kMaxOuterIterations = 100'000;

// W(x) = diag(x) + (I - diag(x)) C: self-weights equal self-appraisals.
Matrix influence_matrix(const InfluenceNetwork& net, const PowerVector& x);

// One Friedkin-Johnsen opinion update: Theta W y + (I - Theta) y0.
// Pure kernel; theta is raw so degenerate settings stay computable.
Vector fj_step(const Vector& y, const Vector& y0, const Vector& theta,
               const Matrix& W);

// V(x) = (I - Theta W(x))^-1 (I - Theta), the map from initial to final
// opinions within one issue. Raw kernel plus the validated wrapper that
// verifies row stochasticity to 1e-10.
Matrix control_matrix_raw(const Matrix& C, const Vector& theta, const Vector& x);
Matrix control_matrix(const InfluenceNetwork& net,
                      const StubbornnessProfile& prof, const PowerVector& x);

// The reflected-appraisal power map
//   F(x) = (I - Theta)(I - W(x)^T Theta)^-1 1/n,
// computed by a single transposed linear solve, never an explicit
// inverse. The validated wrapper applies the simplex drift policy.
Vector power_map_raw(const Matrix& C, const Vector& theta, const Vector& x);
PowerVector power_map(const InfluenceNetwork& net,
                      const StubbornnessProfile& prof, const PowerVector& x);

struct Trajectory {
  std::vector<PowerVector> points;  // points[0] is the initial condition
  bool converged = false;
  double final_residual = std::numeric_limits<double>::infinity();
  long renormalizations = 0;  // control-matrix row fixes (single-issue runs)
};

// Issue-sequence model: x(s+1) = F(x(s)) until the l1 step change drops
// below tol or max_issues applications are spent.
Trajectory iterate_issue_sequence(const InfluenceNetwork& net,
                                  const StubbornnessProfile& prof,
                                  const PowerVector& x0, long max_issues,
                                  double tol = kDefaultTol);

// Distributed power perception within one issue:
//   p+ = Wtilde p + (I - Theta) 1/n,  Wtilde = (I-Theta) W(x)^T Theta (I-Theta)^-1.
// Converges to F(x) from any real p0. Throws IterationLimit if tol is
// not reached within max_iter.
PowerVector perceived_power_process(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x, const Vector& p0,
                                    double tol = kDefaultTol,
                                    long max_iter = kMaxInnerIterations);

// Coupled single-issue state: V(k) row-stochastic, x(k) = V(k)^T 1/n for
// k >= 1. V(0) = I and x(0) free.
struct SingleIssueState {
  Matrix V;
  Vector x;
  long k = 0;
  long renormalizations = 0;

  static SingleIssueState initial(const PowerVector& x0);
};

// One step of the coupled map: V+ = Theta W(x) V + I - Theta,
// x+ = V+^T 1/n. Rows of V+ are renormalized (and counted) only if they
// drift from stochasticity by more than 1e-10.
SingleIssueState single_issue_step_raw(const Matrix& C, const Vector& theta,
                                       const SingleIssueState& state);
SingleIssueState single_issue_step(const SingleIssueState& state,
                                   const InfluenceNetwork& net,
                                   const StubbornnessProfile& prof);

// Single-issue model from V(0) = I; x0 enters only through W at step 0.
// Stops when the l1 change in x drops below tol.
Trajectory iterate_single_issue(const InfluenceNetwork& net,
                                const StubbornnessProfile& prof,
                                const PowerVector& x0, long max_steps,
                                double tol = kDefaultTol);

}  // namespace socialpower
