#include "socialpower/equilibrium.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "socialpower/rng.hpp"

namespace socialpower {

namespace {

// Equality window for assertions of the form x_i == x_j or x_i == 1/n at
// an equilibrium validated to residual < 1e-10.
constexpr double kEqualityWindow = 1e-9;

bool star_partial_closed_form_applies(const Matrix& C,
                                      const StubbornnessProfile& prof,
                                      int center) {
  for (int i : prof.partially_stubborn())
    if (i != center && C(center, i) != 0.0) return false;
  return true;
}

}  // namespace

CertificateSet compute_certificates(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof) {
  const int n = net.size();
  CertificateSet cs;
  cs.theta_max = prof.theta_max();
  cs.zeta = prof.zeta();
  cs.uniqueness_threshold = n / (n + 2.0 * (1.0 + cs.zeta));
  cs.kappa = 2.0 * cs.theta_max * (1.0 + cs.zeta) / (n * (1.0 - cs.theta_max));
  cs.contraction_unique = cs.theta_max < cs.uniqueness_threshold;
  cs.contraction_convergent = cs.contraction_unique;
  cs.single_issue_convergent = cs.theta_max < 0.5;

  const GraphStructure gs = analyze_structure(net);
  bool star_full = false, star_partial = false;
  if (gs.star_center) {
    const int l = *gs.star_center;
    if (prof.theta()(l) == 0.0) {
      star_full = true;
    } else if (star_partial_closed_form_applies(net.interactions(), prof, l)) {
      star_partial = true;
      cs.star_partial_applicable = true;
      for (int j : prof.partially_stubborn())
        if (j != l) cs.star_partial_theta_sum += prof.theta()(j);
      cs.star_partial_bound = 4.0 * n / 5.0 - 1.0;
      cs.star_partial_center_convergent =
          cs.star_partial_theta_sum <= cs.star_partial_bound;
    }
  }

  const DemocracyResult dem = democracy_check(net, prof);
  cs.democratic = dem.democratic;
  cs.democracy_eigen_residual = dem.eigen_residual;

  if (cs.contraction_unique)
    cs.uniqueness = "unique: power map is a global l1 contraction";
  else if (star_full)
    cs.uniqueness = "unique: star topology with fully stubborn center";
  else if (star_partial)
    cs.uniqueness =
        "unique: star topology, center weights confined to fully stubborn "
        "individuals";
  else
    cs.uniqueness = "uniqueness conjectured, not certified";
  return cs;
}

const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::kFixedPoint:
      return "fixed-point";
    case SolveMethod::kStarFullyStubborn:
      return "star-fully-stubborn";
    case SolveMethod::kStarPartiallyStubborn:
      return "star-partially-stubborn";
  }
  return "unknown";
}

Matrix power_map_jacobian(const InfluenceNetwork& net,
                          const StubbornnessProfile& prof,
                          const PowerVector& x) {
  const int n = net.size();
  if (x.size() != n || prof.size() != n)
    throw DimensionMismatch("jacobian inputs do not match network size");
  const Matrix& C = net.interactions();
  const Vector& theta = prof.theta();
  const Vector one_minus = Vector::Ones(n) - theta;

  const Matrix W = influence_matrix(net, x);
  Matrix A = -(W.transpose() * theta.asDiagonal());
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<Matrix> lu(A);

  const Vector fx = one_minus.cwiseProduct(lu.solve(Vector::Constant(n, 1.0 / n)));
  // (I - C^T) Theta (I-Theta)^-1 diag(F(x))
  const Vector scale = theta.cwiseQuotient(one_minus).cwiseProduct(fx);
  Matrix rhs = Matrix(scale.asDiagonal()) - C.transpose() * scale.asDiagonal();
  Matrix J = one_minus.asDiagonal() * lu.solve(rhs);
  if (!J.allFinite()) throw SingularSystem("jacobian solve failed");
  return J;
}

EquilibriumReport solve_fixed_point(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x0, double tol,
                                    long max_iter) {
  if (!(tol > 0)) throw OutOfRange("tol must be positive");
  if (max_iter < 1) throw OutOfRange("max_iter must be >= 1");

  EquilibriumReport report;
  report.method = SolveMethod::kFixedPoint;
  report.certificates = compute_certificates(net, prof);

  PowerVector x = x0;
  bool damping = false;
  int nonmonotone = 0;
  double prev_change = std::numeric_limits<double>::infinity();
  bool converged = false;
  long it = 0;
  for (; it < max_iter; ++it) {
    PowerVector fx = power_map(net, prof, x);
    PowerVector next =
        damping ? PowerVector::from_computation(0.5 * x.values() +
                                                0.5 * fx.values())
                : std::move(fx);
    const double change = (next.values() - x.values()).lpNorm<1>();
    if (change >= prev_change) {
      if (!damping && ++nonmonotone >= 50) {
        damping = true;
        nonmonotone = 0;
        report.warnings.push_back(
            "step changes non-monotone for 50 steps; damping enabled");
      }
    } else {
      nonmonotone = 0;
    }
    prev_change = change;
    x = std::move(next);
    if (change < tol) {
      converged = true;
      ++it;
      break;
    }
  }
  report.iterations = it;
  report.x_star = x;
  report.residual = (power_map(net, prof, x).values() - x.values()).lpNorm<1>();
  report.solved = converged && report.residual < 1e-10;
  if (!converged)
    report.warnings.push_back("not converged after " + std::to_string(it) +
                              " iterations; last step change " +
                              std::to_string(prev_change));
  return report;
}

double star_scalar_power(int n, double theta, double xi) {
  if (theta < 1e-6) {
    const double a = (1.0 - theta) * xi / n;
    return a * (1.0 + theta * a + 2.0 * theta * theta * a * a);
  }
  const double nn = static_cast<double>(n);
  return (nn - std::sqrt(nn * nn - 4.0 * nn * theta * (1.0 - theta) * xi)) /
         (2.0 * nn * theta);
}

namespace {

void finish_closed_form(EquilibriumReport& report, const InfluenceNetwork& net,
                        const StubbornnessProfile& prof, Vector x) {
  report.x_star = PowerVector::from_computation(std::move(x));
  report.iterations = 0;
  report.residual =
      (power_map(net, prof, report.x_star).values() - report.x_star.values())
          .lpNorm<1>();
  report.solved = report.residual < 1e-10;
}

}  // namespace

EquilibriumReport star_fully_stubborn_equilibrium(
    const InfluenceNetwork& net, const StubbornnessProfile& prof) {
  const GraphStructure gs = analyze_structure(net);
  if (!gs.star_center) throw NotStar();
  const int l = *gs.star_center;
  const Vector& theta = prof.theta();
  if (theta(l) != 0.0) throw CenterNotFullyStubborn();

  const int n = net.size();
  Vector x = Vector::Constant(n, 1.0 / n);
  double center_gain = 0.0;
  for (int j : prof.partially_stubborn()) {
    x(j) = star_scalar_power(n, theta(j));
    center_gain += theta(j) * (1.0 - x(j)) / (1.0 - theta(j) * x(j));
  }
  x(l) = (1.0 + center_gain) / n;

  EquilibriumReport report;
  report.method = SolveMethod::kStarFullyStubborn;
  report.certificates = compute_certificates(net, prof);
  finish_closed_form(report, net, prof, std::move(x));
  return report;
}

EquilibriumReport star_partially_stubborn_equilibrium(
    const InfluenceNetwork& net, const StubbornnessProfile& prof) {
  const GraphStructure gs = analyze_structure(net);
  if (!gs.star_center) throw NotStar();
  const int l = *gs.star_center;
  const Matrix& C = net.interactions();
  const Vector& theta = prof.theta();
  if (theta(l) == 0.0) throw CenterFullyStubborn();

  if (!star_partial_closed_form_applies(C, prof, l)) {
    EquilibriumReport report =
        solve_fixed_point(net, prof, PowerVector::uniform(net.size()));
    report.warnings.insert(
        report.warnings.begin(),
        "center accords weight to another partially stubborn individual; "
        "closed form inapplicable, fell back to fixed-point iteration");
    return report;
  }

  const int n = net.size();
  const int r = prof.fully_stubborn_count();
  Vector x(n);
  double leaf_sum = 0.0;
  for (int j : prof.partially_stubborn())
    if (j != l) {
      x(j) = star_scalar_power(n, theta(j));
      leaf_sum += x(j);
    }
  const double xi = n - r - n * leaf_sum;
  x(l) = star_scalar_power(n, theta(l), xi);
  for (int i : prof.fully_stubborn())
    x(i) = 1.0 / n + (xi / n - x(l)) * C(l, i);

  EquilibriumReport report;
  report.method = SolveMethod::kStarPartiallyStubborn;
  report.certificates = compute_certificates(net, prof);
  finish_closed_form(report, net, prof, std::move(x));
  return report;
}

EquilibriumReport solve_equilibrium(const InfluenceNetwork& net,
                                    const StubbornnessProfile& prof,
                                    const PowerVector& x0, Method method,
                                    double tol, long max_iter) {
  switch (method) {
    case Method::kIterate:
      return solve_fixed_point(net, prof, x0, tol, max_iter);
    case Method::kStarFullyStubborn:
      return star_fully_stubborn_equilibrium(net, prof);
    case Method::kStarPartiallyStubborn:
      return star_partially_stubborn_equilibrium(net, prof);
    case Method::kAuto:
      break;
  }
  const GraphStructure gs = analyze_structure(net);
  if (gs.star_center) {
    const int l = *gs.star_center;
    if (prof.theta()(l) == 0.0) return star_fully_stubborn_equilibrium(net, prof);
    if (star_partial_closed_form_applies(net.interactions(), prof, l))
      return star_partially_stubborn_equilibrium(net, prof);
  }
  return solve_fixed_point(net, prof, x0, tol, max_iter);
}

DemocracyResult democracy_check(const InfluenceNetwork& net,
                                const StubbornnessProfile& prof) {
  const int n = net.size();
  const Vector& theta = prof.theta();
  const Vector w = theta.cwiseQuotient(Vector::Ones(n) - theta);
  DemocracyResult res;
  res.eigen_residual =
      (net.interactions().transpose() * w - w).lpNorm<1>() / w.lpNorm<1>();
  const Vector uniform = Vector::Constant(n, 1.0 / n);
  res.map_residual =
      (power_map_raw(net.interactions(), theta, uniform) - uniform).lpNorm<1>();
  res.democratic = res.eigen_residual < 1e-10;
  return res;
}

namespace {

struct CheckBuilder {
  PropertyReport report;

  CheckBuilder() { report.checks.reserve(32); }  // keeps add() references valid

  PropertyCheck& add(const std::string& name) {
    report.checks.push_back({name, false, true,
                             std::numeric_limits<double>::infinity()});
    return report.checks.back();
  }

  // Records one instance of a strict inequality `slack > 0`.
  static void strict(PropertyCheck& c, double slack) {
    c.applicable = true;
    c.margin = std::min(c.margin, slack);
    if (!(slack > 0.0)) c.holds = false;
  }

  // Records one instance of an equality within the window.
  static void equal(PropertyCheck& c, double deviation) {
    c.applicable = true;
    const double slack = kEqualityWindow - std::abs(deviation);
    c.margin = std::min(c.margin, slack);
    if (slack < 0.0) c.holds = false;
  }

  PropertyReport finish() {
    for (auto& c : report.checks) {
      if (!c.applicable) c.margin = 0.0;
      if (c.applicable && !c.holds) report.all_hold = false;
    }
    return std::move(report);
  }
};

}  // namespace

PropertyReport equilibrium_properties_check(const InfluenceNetwork& net,
                                            const StubbornnessProfile& prof,
                                            const PowerVector& x_star) {
  const int n = net.size();
  const Matrix& C = net.interactions();
  const Vector& theta = prof.theta();
  const Vector& x = x_star.values();
  const auto& vf = prof.fully_stubborn();
  const auto& vp = prof.partially_stubborn();

  const double residual =
      (power_map(net, prof, x_star).values() - x).lpNorm<1>();
  if (residual >= 1e-10) throw StaleEquilibrium(residual);

  CheckBuilder b;

  auto& interior = b.add("interior");
  for (int i = 0; i < n; ++i) CheckBuilder::strict(interior, x(i));

  auto& no_autocracy = b.add("no autocracy");
  CheckBuilder::strict(no_autocracy, 1.0 - x.maxCoeff());

  auto& max_bound = b.add("max power below 1/n + theta_ave");
  CheckBuilder::strict(max_bound, 1.0 / n + prof.theta_ave() - x.maxCoeff());

  // Column i is untouched by partially stubborn rows.
  auto no_partial_weight = [&](int i) {
    for (int j : vp)
      if (C(j, i) != 0.0) return false;
    return true;
  };

  auto& full_floor = b.add("fully stubborn power >= 1/n");
  auto& full_dichotomy = b.add("fully stubborn equality dichotomy");
  for (int i : vf) {
    CheckBuilder::strict(full_floor, x(i) - 1.0 / n + kEqualityWindow);
    if (no_partial_weight(i))
      CheckBuilder::equal(full_dichotomy, x(i) - 1.0 / n);
    else
      CheckBuilder::strict(full_dichotomy, x(i) - 1.0 / n);
  }

  auto& partial_floor = b.add("partially stubborn power > (1-theta)/n");
  auto& partial_ceiling = b.add("unweighted partially stubborn power < 1/n");
  for (int i : vp) {
    CheckBuilder::strict(partial_floor, x(i) - (1.0 - theta(i)) / n);
    if (no_partial_weight(i))
      CheckBuilder::strict(partial_ceiling, 1.0 / n - x(i));
  }

  // Orderings under equal accorded weights (general topology).
  auto equal_weights_except = [&](int i, int j, int skip1, int skip2) {
    for (int k : vp) {
      if (k == skip1 || k == skip2) continue;
      if (C(k, i) != C(k, j)) return false;
    }
    return true;
  };

  auto& order_fp = b.add("ordering: fully vs partially stubborn, equal weights");
  for (int i : vf)
    for (int j : vp)
      if (equal_weights_except(i, j, j, j))
        CheckBuilder::strict(order_fp, x(i) - x(j));

  auto& order_pp = b.add("ordering: within partially stubborn, equal weights");
  for (size_t a = 0; a < vp.size(); ++a)
    for (size_t c = a + 1; c < vp.size(); ++c) {
      const int i = vp[a], j = vp[c];
      if (!equal_weights_except(i, j, i, j) || C(i, j) != C(j, i)) continue;
      if (theta(i) > theta(j))
        CheckBuilder::strict(order_pp, x(j) - x(i));
      else if (theta(i) < theta(j))
        CheckBuilder::strict(order_pp, x(i) - x(j));
      else
        CheckBuilder::equal(order_pp, x(i) - x(j));
    }

  auto& order_sym = b.add("ordering: symmetric interactions by stubbornness");
  if (C == C.transpose()) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (theta(i) > theta(j)) CheckBuilder::strict(order_sym, x(j) - x(i));
  }

  // Star-specific orderings: partially stubborn center only.
  const GraphStructure gs = analyze_structure(net);
  if (gs.star_center && theta(*gs.star_center) > 0.0) {
    const int l = *gs.star_center;

    auto& star_ff = b.add("star ordering: fully stubborn by center weight");
    for (size_t a = 0; a < vf.size(); ++a)
      for (size_t c = 0; c < vf.size(); ++c) {
        const int i = vf[a], j = vf[c];
        if (C(l, i) > C(l, j)) CheckBuilder::strict(star_ff, x(i) - x(j));
      }

    auto& star_fp = b.add("star ordering: fully above partially, equal weight");
    for (int i : vf)
      for (int j : vp)
        if (j != l && C(l, i) == C(l, j))
          CheckBuilder::strict(star_fp, x(i) - x(j));

    auto& star_pp_theta =
        b.add("star ordering: partially stubborn by stubbornness");
    auto& star_pp_weight =
        b.add("star ordering: partially stubborn by center weight");
    for (size_t a = 0; a < vp.size(); ++a)
      for (size_t c = a + 1; c < vp.size(); ++c) {
        const int i = vp[a], j = vp[c];
        if (i == l || j == l) continue;
        if (C(l, i) == C(l, j)) {
          if (theta(i) < theta(j))
            CheckBuilder::strict(star_pp_theta, x(i) - x(j));
          else if (theta(i) > theta(j))
            CheckBuilder::strict(star_pp_theta, x(j) - x(i));
          else
            CheckBuilder::equal(star_pp_theta, x(i) - x(j));
        }
        if (theta(i) == theta(j)) {
          if (C(l, i) > C(l, j))
            CheckBuilder::strict(star_pp_weight, x(i) - x(j));
          else if (C(l, i) < C(l, j))
            CheckBuilder::strict(star_pp_weight, x(j) - x(i));
          else
            CheckBuilder::equal(star_pp_weight, x(i) - x(j));
        }
      }
  }

  return b.finish();
}

double block_equation_residual(const InfluenceNetwork& net,
                               const StubbornnessProfile& prof,
                               const PowerVector& x_star) {
  const int n = net.size();
  const Matrix& C = net.interactions();
  const auto& vf = prof.fully_stubborn();
  const auto& vp = prof.partially_stubborn();
  const int m = static_cast<int>(vp.size());

  const Vector& x = x_star.values();
  Vector xp(m), tp(m);
  for (int a = 0; a < m; ++a) {
    xp(a) = x(vp[a]);
    tp(a) = prof.theta()(vp[a]);
  }
  const Vector omp = Vector::Ones(m) - tp;
  const Vector q = tp.cwiseQuotient(omp);  // Theta_p (I-Theta_p)^-1

  double res1 = 0.0;
  if (!vf.empty()) {
    const int r = static_cast<int>(vf.size());
    Matrix Cpf(m, r);
    for (int a = 0; a < m; ++a)
      for (int bidx = 0; bidx < r; ++bidx) Cpf(a, bidx) = C(vp[a], vf[bidx]);
    Vector xf(r);
    for (int bidx = 0; bidx < r; ++bidx) xf(bidx) = x(vf[bidx]);
    const Vector w1 = q.cwiseProduct(Vector::Ones(m) - xp).cwiseProduct(xp);
    res1 = (xf - Vector::Constant(r, 1.0 / n) - Cpf.transpose() * w1).lpNorm<1>();
  }

  Matrix Cp(m, m);
  for (int a = 0; a < m; ++a)
    for (int bidx = 0; bidx < m; ++bidx) Cp(a, bidx) = C(vp[a], vp[bidx]);
  const Vector u = xp.cwiseQuotient(omp);
  const Vector lhs = u - Cp.transpose() * tp.cwiseProduct(u);
  const Vector w2 = q.cwiseProduct(xp).cwiseProduct(xp);
  const Vector rhs = Vector::Constant(m, 1.0 / n) + w2 - Cp.transpose() * w2;
  return std::max(res1, (lhs - rhs).lpNorm<1>());
}

RateMeasurement convergence_rate_measurement(const Trajectory& traj,
                                             const PowerVector& x_star) {
  std::vector<std::pair<double, double>> pts;  // (s, log error)
  for (size_t s = 0; s < traj.points.size(); ++s) {
    const double e = (traj.points[s].values() - x_star.values()).lpNorm<1>();
    if (e > 1e-13) pts.emplace_back(static_cast<double>(s), std::log(e));
  }
  if (pts.size() > 20) pts.erase(pts.begin(), pts.end() - 20);
  if (pts.size() < 2) throw InsufficientTail();

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [s, le] : pts) {
    sx += s;
    sy += le;
    sxx += s * s;
    sxy += s * le;
  }
  const double k = static_cast<double>(pts.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return {std::exp(slope), static_cast<int>(pts.size())};
}

StarQuantities star_quantities(const InfluenceNetwork& net,
                               const StubbornnessProfile& prof,
                               const PowerVector& x, int center) {
  const int n = net.size();
  const Vector& theta = prof.theta();
  StarQuantities sq;
  sq.beta = theta.cwiseProduct(Vector::Ones(n) - x.values());
  sq.gamma = Vector::Ones(n) - theta.cwiseProduct(x.values());
  double weighted = 0.0, plain = 0.0;
  for (int j : prof.partially_stubborn())
    if (j != center) {
      const double ratio = sq.beta(j) / sq.gamma(j);
      weighted += net.interactions()(center, j) * ratio;
      plain += ratio;
    }
  sq.alpha = sq.gamma(center) - sq.beta(center) * weighted;
  sq.xi = 1.0 + plain;
  return sq;
}

ProbeResult multi_start_probe(const InfluenceNetwork& net,
                              const StubbornnessProfile& prof, int starts,
                              std::uint64_t seed, double tol, long max_iter) {
  ProbeResult probe;
  Vector reference;
  for (int s = 0; s < starts; ++s) {
    SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(s));
    Vector draws(net.size());
    for (int i = 0; i < net.size(); ++i) draws(i) = rng.exponential();
    const PowerVector x0 = PowerVector::from_computation(draws / draws.sum());
    const Trajectory traj = iterate_issue_sequence(net, prof, x0, max_iter, tol);
    probe.all_converged = probe.all_converged && traj.converged;
    const Vector& limit = traj.points.back().values();
    if (s == 0)
      reference = limit;
    else
      probe.max_spread =
          std::max(probe.max_spread, (limit - reference).lpNorm<1>());
  }
  return probe;
}

}  // namespace socialpower
