#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "socialpower/dynamics.hpp"

namespace socialpower {

// Certificates derived from (C, theta) alone. kappa is the l1
// contraction constant 2*theta_max*(1+zeta)/(n*(1-theta_max)); the power
// map is a global contraction when theta_max < n/(n+2(1+zeta)), which
// certifies both uniqueness and exponential convergence of the
// issue-sequence model. The single-issue model is certified convergent
// when theta_max < 1/2. For star topologies with a partially stubborn
// center whose weights avoid other partially stubborn individuals,
// convergence is certified when the non-center partially stubborn thetas
// sum to at most 4n/5 - 1.
struct CertificateSet {
  double theta_max = 0.0;
  double zeta = 0.0;
  double uniqueness_threshold = 0.0;  // n / (n + 2(1+zeta))
  double kappa = 0.0;
  bool contraction_unique = false;
  bool contraction_convergent = false;
  bool star_partial_applicable = false;
  double star_partial_theta_sum = 0.0;
  double star_partial_bound = 0.0;  // 4n/5 - 1
  bool star_partial_center_convergent = false;
  bool single_issue_convergent = false;  // theta_max < 1/2
  bool democratic = false;
  double democracy_eigen_residual = 0.0;
  std::string uniqueness;
};

CertificateSet compute_certificates(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof);

enum class SolveMethod { kFixedPoint, kStarFullyStubborn, kStarPartiallyStubborn };

const char* to_string(SolveMethod m);  // fixed-point / star-fully-stubborn / ...

struct EquilibriumReport {
  PowerVector x_star = PowerVector::uniform(2);
  double residual = 0.0;  // l1 norm of F(x*) - x*
  long iterations = 0;
  SolveMethod method = SolveMethod::kFixedPoint;
  bool solved = false;  // residual < 1e-10
  CertificateSet certificates;
  std::vector<std::string> warnings;
};

// Jacobian of the power map at x:
//   (I-Theta)(I-W(x)^T Theta)^-1 (I-C^T) Theta (I-Theta)^-1 diag(F(x)).
Matrix power_map_jacobian(const InfluenceNetwork& net,
                          const StubbornnessProfile& prof,
                          const PowerVector& x);

// Picard iteration of the power map. Damping (factor 0.5) kicks in only
// after the step change has been non-monotone for 50 consecutive steps.
EquilibriumReport solve_fixed_point(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x0,
                                    double tol = kDefaultTol,
                                    long max_iter = kMaxOuterIterations);

// Scalar equilibrium power of a non-center individual in a star network:
// the smaller root of n*theta*x^2 - n*x + xi*(1-theta) = 0. For
// theta < 1e-6 the closed form cancels catastrophically and a
// second-order series around theta = 0 is used instead.
double star_scalar_power(int n, double theta, double xi = 1.0);

// Closed-form equilibrium for a star with fully stubborn center;
// uniqueness is unconditional. Throws NotStar / CenterNotFullyStubborn.
EquilibriumReport star_fully_stubborn_equilibrium(const InfluenceNetwork& net,
                                                  const StubbornnessProfile& prof);

// Closed-form equilibrium for a star with partially stubborn center
// whose row has no weight on other partially stubborn individuals. If
// that weight condition fails the solver falls back to fixed-point
// iteration and says so in the report warnings.
EquilibriumReport star_partially_stubborn_equilibrium(
    const InfluenceNetwork& net, const StubbornnessProfile& prof);

enum class Method { kAuto, kIterate, kStarFullyStubborn, kStarPartiallyStubborn };

// Dispatcher used by the CLI: picks a closed form when its preconditions
// hold, otherwise iterates from x0.
EquilibriumReport solve_equilibrium(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x0,
                                    Method method = Method::kAuto,
                                    double tol = kDefaultTol,
                                    long max_iter = kMaxOuterIterations);

// Democratic equilibrium test: w = Theta (I-Theta)^-1 1 must be a left
// eigenvector of C for eigenvalue 1. Both the eigenvector residual and
// the fixed-point residual of the uniform vector are reported; they
// certify the same identity and must agree.
struct DemocracyResult {
  bool democratic = false;
  double eigen_residual = 0.0;  // |w^T C - w^T|_1 / |w|_1
  double map_residual = 0.0;    // |F(1/n) - 1/n|_1
};

DemocracyResult democracy_check(const InfluenceNetwork& net,
                                const StubbornnessProfile& prof);

// One verified assertion about an equilibrium. margin is the amount by
// which the tightest instance of the assertion holds (negative = failed).
struct PropertyCheck {
  std::string name;
  bool applicable = false;
  bool holds = true;
  double margin = 0.0;
};

struct PropertyReport {
  std::vector<PropertyCheck> checks;
  bool all_hold = true;  // over applicable checks
};

// Evaluates interior/bound/dichotomy assertions and every ordering whose
// structural hypothesis holds (equality hypotheses on C are exact
// comparisons of input data). Throws StaleEquilibrium if x_star has map
// residual >= 1e-10.
PropertyReport equilibrium_properties_check(const InfluenceNetwork& net,
                                            const StubbornnessProfile& prof,
                                            const PowerVector& x_star);

// Max l1 residual of the two equilibrium block equations (fully stubborn
// affine block, partially stubborn quadratic block).
double block_equation_residual(const InfluenceNetwork& net,
                               const StubbornnessProfile& prof,
                               const PowerVector& x_star);

struct RateMeasurement {
  double rho = 0.0;  // fitted geometric rate per step
  int points_used = 0;
};

// Least-squares fit of log l1-error over the trajectory tail (last <= 20
// iterates with error above 1e-13). Throws InsufficientTail when fewer
// than two such points exist.
RateMeasurement convergence_rate_measurement(const Trajectory& traj,
                                             const PowerVector& x_star);

// Per-node quantities beta_i = theta_i (1 - x_i), gamma_i = 1 - theta_i x_i
// and the scalars alpha, xi of the star analysis, evaluated at x.
struct StarQuantities {
  Vector beta;
  Vector gamma;
  double alpha = 0.0;
  double xi = 0.0;
};

StarQuantities star_quantities(const InfluenceNetwork& net,
                               const StubbornnessProfile& prof,
                               const PowerVector& x, int center);

// Empirical uniqueness probe: limits from `starts` seeded random initial
// conditions; returns the max l1 spread between limits.
struct ProbeResult {
  double max_spread = 0.0;
  bool all_converged = true;
};

ProbeResult multi_start_probe(const InfluenceNetwork& net,
                              const StubbornnessProfile& prof, int starts,
                              std::uint64_t seed, double tol = kDefaultTol,
                              long max_iter = kMaxOuterIterations);

}  // namespace socialpower
