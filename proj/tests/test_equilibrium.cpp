#include <doctest.h>

#include <cmath>

#include "socialpower/equilibrium.hpp"
#include "socialpower/montecarlo.hpp"

using namespace socialpower;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const int n = static_cast<int>(rows.size());
  Matrix M(n, static_cast<int>(rows.begin()->size()));
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double v : row) M(i, j++) = v;
    ++i;
  }
  return M;
}

Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Eigen::Index>(vals.size()));
  int i = 0;
  for (double x : vals) v(i++) = x;
  return v;
}

const Matrix kStar3 = mat({{0, 0.2, 0.8}, {1, 0, 0}, {1, 0, 0}});

double l1_operator_norm(const Matrix& M) {
  return M.cwiseAbs().colwise().sum().maxCoeff();
}

// Random star with the requested center stubbornness profile; leaf rows
// point at the center, the center row spreads over the given leaf set.
struct StarSpec {
  InfluenceNetwork net;
  StubbornnessProfile prof;
};

StarSpec random_star(SplitMix64& rng, bool center_fully_stubborn) {
  const int n = 3 + static_cast<int>(rng.next() % 6);
  const int center = static_cast<int>(rng.next() % n);
  Vector theta = Vector::Zero(n);
  std::vector<int> weight_targets;

  if (center_fully_stubborn) {
    bool has_partial = false;
    for (int i = 0; i < n; ++i)
      if (i != center) {
        weight_targets.push_back(i);
        if (rng.uniform01() < 0.5) {
          theta(i) = 0.05 + 0.9 * rng.uniform01();
          has_partial = true;
        }
      }
    if (!has_partial) theta(weight_targets.front()) = 0.3;
  } else {
    theta(center) = 0.05 + 0.9 * rng.uniform01();
    for (int i = 0; i < n; ++i)
      if (i != center) {
        if (!weight_targets.empty() && rng.uniform01() < 0.4)
          theta(i) = 0.05 + 0.9 * rng.uniform01();  // partial leaf: no weight
        else
          weight_targets.push_back(i);  // fully stubborn leaf
      }
  }

  Matrix C = Matrix::Zero(n, n);
  Vector w(static_cast<Eigen::Index>(weight_targets.size()));
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = rng.exponential();
  w /= w.sum();
  for (size_t k = 0; k < weight_targets.size(); ++k)
    C(center, weight_targets[k]) = w(static_cast<Eigen::Index>(k));
  for (int i = 0; i < n; ++i)
    if (i != center) C(i, center) = 1.0;

  return {validate_network(C), StubbornnessProfile::validated(theta)};
}

}  // namespace

TEST_CASE("power_map_jacobian") {
  SUBCASE("vanishes with the susceptibilities") {
    const InfluenceNetwork net = validate_network(kStar3);
    const auto prof =
        StubbornnessProfile::validated(Vector::Constant(3, 1e-12));
    const Matrix J = power_map_jacobian(net, prof, PowerVector::uniform(3));
    CHECK(J.cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("matches central finite differences") {
    for (int trial = 0; trial < 10; ++trial) {
      SplitMix64 rng = derive_stream(21, trial);
      const int n = 2 + static_cast<int>(rng.next() % 7);
      const auto inst = sample_instance(rng, n, 0.9);
      const PowerVector x = sample_simplex(rng, n);
      const Matrix J = power_map_jacobian(inst.net, inst.prof, x);

      const double h = 1e-6;
      Matrix fd(n, n);
      for (int j = 0; j < n; ++j) {
        Vector xp = x.values(), xm = x.values();
        xp(j) += h;
        xm(j) -= h;
        fd.col(j) = (power_map_raw(inst.net.interactions(), inst.prof.theta(), xp) -
                     power_map_raw(inst.net.interactions(), inst.prof.theta(), xm)) /
                    (2 * h);
      }
      CHECK((J - fd).cwiseAbs().maxCoeff() < 1e-5);
    }
  }

  SUBCASE("l1 norm never exceeds the contraction constant") {
    for (int trial = 0; trial < 500; ++trial) {
      SplitMix64 rng = derive_stream(22, trial);
      const int n = 2 + static_cast<int>(rng.next() % 7);
      const auto inst = sample_instance(rng, n, 1.0);
      const PowerVector x = sample_simplex(rng, n);
      const Matrix J = power_map_jacobian(inst.net, inst.prof, x);
      const CertificateSet cs = compute_certificates(inst.net, inst.prof);
      CHECK(l1_operator_norm(J) <= cs.kappa + 1e-9);
    }
  }
}

TEST_CASE("solve_fixed_point") {
  SUBCASE("democracy under doubly stochastic + uniform theta") {
    Matrix C(4, 4);
    const double w[4] = {0, 0.5, 0.3, 0.2};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) C(i, j) = w[(j - i + 4) % 4];
    const auto report = solve_fixed_point(
        validate_network(C), StubbornnessProfile::validated(Vector::Constant(4, 0.3)),
        PowerVector::vertex(4, 2));
    CHECK(report.solved);
    CHECK((report.x_star.values() - Vector::Constant(4, 0.25)).lpNorm<1>() < 1e-11);
    CHECK(report.certificates.democratic);
  }

  SUBCASE("star example: center largest") {
    const auto report = solve_fixed_point(
        validate_network(kStar3), StubbornnessProfile::validated(vec({0.1, 0, 0.6})),
        PowerVector::uniform(3));
    CHECK(report.solved);
    CHECK(report.x_star[0] > report.x_star[1]);
    CHECK(report.x_star[0] > report.x_star[2]);
  }

  SUBCASE("two individuals: bisection oracle on the scalar reduction") {
    const double t1 = 0.6, t2 = 0.3;
    const auto report = solve_fixed_point(
        validate_network(mat({{0, 1}, {1, 0}})),
        StubbornnessProfile::validated(vec({t1, t2})), PowerVector::uniform(2));
    REQUIRE(report.solved);
    CHECK(report.x_star[0] < report.x_star[1]);  // more susceptible -> less power

    // Scalar equilibrium equation in x1 (x2 = 1 - x1), from the
    // partially stubborn block of the fixed-point system.
    auto g = [&](double x1) {
      return x1 * (1 - t1 * x1) / (1 - t1) - t2 * x1 * (1 - x1) / (1 - t2) - 0.5;
    };
    double lo = 1e-12, hi = 1 - 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(lo) * g(mid) <= 0)
        hi = mid;
      else
        lo = mid;
    }
    CHECK(report.x_star[0] == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  }
}

TEST_CASE("star_scalar_power") {
  SUBCASE("frozen value for n=3, theta=0.6") {
    CHECK(star_scalar_power(3, 0.6) ==
          doctest::Approx(0.14614906239705652).epsilon(1e-12));
    // Scalar fixed-point oracle: x = (1-theta)/(n(1-theta x)).
    double x = 0.0;
    for (int it = 0; it < 200; ++it) x = (1 - 0.6) / (3 * (1 - 0.6 * x));
    CHECK(star_scalar_power(3, 0.6) == doctest::Approx(x).epsilon(1e-12));
  }

  SUBCASE("strictly decreasing in theta and below 1/n") {
    for (int n = 2; n <= 10; ++n) {
      double prev = 1.0 / n;
      for (int k = 1; k <= 10000; ++k) {
        const double theta = k / 10001.0;
        const double value = star_scalar_power(n, theta);
        CHECK(value < 1.0 / n);
        CHECK(value < prev);
        prev = value;
      }
    }
  }

  SUBCASE("both branches agree with the cancellation-free scalar iteration") {
    // x <- (1-theta) xi / (n (1 - theta x)) converges to the smaller
    // quadratic root with no subtractive cancellation at any theta.
    auto oracle = [](int n, double theta, double xi) {
      double x = 0.0;
      for (int it = 0; it < 500; ++it)
        x = (1 - theta) * xi / (n * (1 - theta * x));
      return x;
    };
    for (int n : {2, 5, 10}) {
      for (double xi : {1.0, 1.7}) {
        for (double theta : {1e-9, 1e-7, 5e-7, 9.9e-7})  // series branch
          CHECK(star_scalar_power(n, theta, xi) ==
                doctest::Approx(oracle(n, theta, xi)).epsilon(1e-13));
        for (double theta : {1.1e-6, 1e-5, 1e-3})  // direct branch
          CHECK(star_scalar_power(n, theta, xi) ==
                doctest::Approx(oracle(n, theta, xi)).epsilon(1e-9));
      }
      CHECK(star_scalar_power(n, 1e-9) ==
            doctest::Approx((1 - 1e-9) / n).epsilon(1e-9));
    }
  }
}

TEST_CASE("star_fully_stubborn_equilibrium") {
  SUBCASE("closed form on a 3-node star") {
    const auto prof = StubbornnessProfile::validated(vec({0, 0.6, 0.3}));
    const InfluenceNetwork net =
        validate_network(mat({{0, 0.3, 0.7}, {1, 0, 0}, {1, 0, 0}}));
    const auto report = star_fully_stubborn_equilibrium(net, prof);
    CHECK(report.method == SolveMethod::kStarFullyStubborn);
    CHECK(report.solved);
    CHECK(report.x_star[1] == doctest::Approx(0.14614906239705652).epsilon(1e-12));
    CHECK(report.x_star[0] > 1.0 / 3);  // center strictly above 1/n
    CHECK(report.certificates.uniqueness ==
          "unique: star topology with fully stubborn center");
  }

  SUBCASE("fully stubborn leaves sit exactly at 1/n") {
    const auto prof = StubbornnessProfile::validated(vec({0, 0, 0.4}));
    const InfluenceNetwork net =
        validate_network(mat({{0, 0.5, 0.5}, {1, 0, 0}, {1, 0, 0}}));
    const auto report = star_fully_stubborn_equilibrium(net, prof);
    CHECK(report.x_star[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
  }

  SUBCASE("preconditions") {
    const InfluenceNetwork not_star = validate_network(
        mat({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}}));
    CHECK_THROWS_AS(star_fully_stubborn_equilibrium(
                        not_star, StubbornnessProfile::validated(vec({0, 0.3, 0}))),
                    NotStar);
    CHECK_THROWS_AS(
        star_fully_stubborn_equilibrium(
            validate_network(kStar3),
            StubbornnessProfile::validated(vec({0.1, 0, 0.6}))),
        CenterNotFullyStubborn);
  }

  SUBCASE("agrees with fixed-point iteration on random stars") {
    for (int trial = 0; trial < 20; ++trial) {
      SplitMix64 rng = derive_stream(23, trial);
      const StarSpec star = random_star(rng, true);
      const auto closed = star_fully_stubborn_equilibrium(star.net, star.prof);
      const auto iterated = solve_fixed_point(star.net, star.prof,
                                              PowerVector::uniform(star.net.size()));
      REQUIRE(iterated.solved);
      CHECK((closed.x_star.values() - iterated.x_star.values()).lpNorm<1>() < 1e-9);
    }
  }
}

TEST_CASE("star_partially_stubborn_equilibrium") {
  SUBCASE("all leaves fully stubborn forces xi = 1") {
    const auto prof = StubbornnessProfile::validated(vec({0.4, 0, 0}));
    const InfluenceNetwork net = validate_network(kStar3);
    const auto report = star_partially_stubborn_equilibrium(net, prof);
    CHECK(report.solved);
    CHECK(report.x_star[0] ==
          doctest::Approx(star_scalar_power(3, 0.4, 1.0)).epsilon(1e-14));
  }

  SUBCASE("fully stubborn leaf with zero center weight sits at 1/n") {
    // Row of the center: weight only on leaf 2; leaf 1 gets none.
    const InfluenceNetwork net =
        validate_network(mat({{0, 0, 1}, {1, 0, 0}, {1, 0, 0}}));
    const auto prof = StubbornnessProfile::validated(vec({0.5, 0, 0}));
    const auto report = star_partially_stubborn_equilibrium(net, prof);
    CHECK(report.x_star[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(report.x_star[2] > 1.0 / 3);
  }

  SUBCASE("falls back to iteration when the center weighs a partial leaf") {
    const auto prof = StubbornnessProfile::validated(vec({0.1, 0, 0.6}));
    const auto report =
        star_partially_stubborn_equilibrium(validate_network(kStar3), prof);
    CHECK(report.method == SolveMethod::kFixedPoint);
    REQUIRE_FALSE(report.warnings.empty());
    CHECK(report.warnings.front().find("closed form inapplicable") !=
          std::string::npos);
    CHECK(report.solved);
  }

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(
        star_partially_stubborn_equilibrium(
            validate_network(kStar3),
            StubbornnessProfile::validated(vec({0, 0.3, 0.3}))),
        CenterFullyStubborn);
  }

  SUBCASE("agrees with fixed-point iteration on random stars") {
    for (int trial = 0; trial < 20; ++trial) {
      SplitMix64 rng = derive_stream(24, trial);
      const StarSpec star = random_star(rng, false);
      const auto closed = star_partially_stubborn_equilibrium(star.net, star.prof);
      REQUIRE(closed.method == SolveMethod::kStarPartiallyStubborn);
      const auto iterated = solve_fixed_point(star.net, star.prof,
                                              PowerVector::uniform(star.net.size()));
      REQUIRE(iterated.solved);
      CHECK((closed.x_star.values() - iterated.x_star.values()).lpNorm<1>() < 1e-9);
    }
  }
}

TEST_CASE("solve_equilibrium dispatch") {
  SplitMix64 rng = derive_stream(25, 0);
  const StarSpec full = random_star(rng, true);
  CHECK(solve_equilibrium(full.net, full.prof, PowerVector::uniform(full.net.size()))
            .method == SolveMethod::kStarFullyStubborn);
  const StarSpec partial = random_star(rng, false);
  CHECK(solve_equilibrium(partial.net, partial.prof,
                          PowerVector::uniform(partial.net.size()))
            .method == SolveMethod::kStarPartiallyStubborn);
  const auto forced = solve_equilibrium(full.net, full.prof,
                                        PowerVector::uniform(full.net.size()),
                                        Method::kIterate);
  CHECK(forced.method == SolveMethod::kFixedPoint);
  const auto inst = sample_instance(rng, 4, 0.8);
  CHECK(solve_equilibrium(inst.net, inst.prof, PowerVector::uniform(4)).method ==
        SolveMethod::kFixedPoint);
}

TEST_CASE("democracy_check") {
  SUBCASE("doubly stochastic + uniform theta") {
    Matrix C(4, 4);
    const double w[4] = {0, 0.5, 0.3, 0.2};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) C(i, j) = w[(j - i + 4) % 4];
    const auto res = democracy_check(
        validate_network(C),
        StubbornnessProfile::validated(Vector::Constant(4, 0.3)));
    CHECK(res.democratic);
    CHECK(res.map_residual < 1e-10);
  }

  SUBCASE("democracy without double stochasticity") {
    const auto res = democracy_check(
        validate_network(mat({{0, 0.5, 0.5}, {1, 0, 0}, {1, 0, 0}})),
        StubbornnessProfile::validated(vec({0.5, 1.0 / 3, 1.0 / 3})));
    CHECK(res.democratic);
    CHECK(res.eigen_residual < 1e-12);
    CHECK(res.map_residual < 1e-12);
  }

  SUBCASE("star example is not democratic") {
    const auto res = democracy_check(
        validate_network(kStar3),
        StubbornnessProfile::validated(vec({0.1, 0, 0.6})));
    CHECK_FALSE(res.democratic);
    CHECK(res.map_residual > 1e-10);                // checks agree
  }
}

TEST_CASE("equilibrium_properties_check") {
  SUBCASE("symmetric interactions order power against stubbornness") {
    const InfluenceNetwork net = validate_network(
        mat({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}}));
    const auto prof = StubbornnessProfile::validated(vec({0.7, 0.3, 0.5}));
    const auto report = solve_fixed_point(net, prof, PowerVector::uniform(3));
    REQUIRE(report.solved);
    CHECK(report.x_star[0] < report.x_star[2]);
    CHECK(report.x_star[2] < report.x_star[1]);

    const PropertyReport props =
        equilibrium_properties_check(net, prof, report.x_star);
    CHECK(props.all_hold);
    bool found = false;
    for (const auto& c : props.checks)
      if (c.name == "ordering: symmetric interactions by stubbornness") {
        found = true;
        CHECK(c.applicable);
        CHECK(c.holds);
        CHECK(c.margin > 1e-10);
      }
    CHECK(found);
  }

  SUBCASE("equal accorded weights: fully stubborn beats partially stubborn") {
    const InfluenceNetwork net = validate_network(
        mat({{0, 0.3, 0.7}, {0.5, 0, 0.5}, {0.5, 0.5, 0}}));
    const auto prof = StubbornnessProfile::validated(vec({0, 0.4, 0.6}));
    const auto report = solve_fixed_point(net, prof, PowerVector::uniform(3));
    REQUIRE(report.solved);
    const PropertyReport props =
        equilibrium_properties_check(net, prof, report.x_star);
    CHECK(props.all_hold);
    for (const auto& c : props.checks)
      if (c.name == "ordering: fully vs partially stubborn, equal weights") {
        CHECK(c.applicable);
        CHECK(c.holds);
      }
  }

  SUBCASE("star orderings") {
    const InfluenceNetwork net = validate_network(
        mat({{0, 0.5, 0.3, 0.2}, {1, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}}));
    const auto prof = StubbornnessProfile::validated(vec({0.4, 0, 0.3, 0.3}));
    const auto report = solve_equilibrium(net, prof, PowerVector::uniform(4));
    REQUIRE(report.solved);
    const PropertyReport props =
        equilibrium_properties_check(net, prof, report.x_star);
    CHECK(props.all_hold);
    CHECK(report.x_star[2] > report.x_star[3]);  // larger center weight wins
  }

  SUBCASE("stale equilibria are rejected") {
    const InfluenceNetwork net = validate_network(kStar3);
    const auto prof = StubbornnessProfile::validated(vec({0.1, 0, 0.6}));
    Vector bad = Vector::Constant(3, 1.0 / 3);
    CHECK_THROWS_AS(
        equilibrium_properties_check(net, prof, PowerVector::validated(bad)),
        StaleEquilibrium);
  }
}

TEST_CASE("block_equation_residual") {
  SUBCASE("vanishes at a democratic equilibrium") {
    const InfluenceNetwork net =
        validate_network(mat({{0, 0.5, 0.5}, {1, 0, 0}, {1, 0, 0}}));
    const auto prof =
        StubbornnessProfile::validated(vec({0.5, 1.0 / 3, 1.0 / 3}));
    CHECK(block_equation_residual(net, prof, PowerVector::uniform(3)) < 1e-12);
  }

  SUBCASE("vanishes on the star closed form") {
    const auto prof = StubbornnessProfile::validated(vec({0, 0.6, 0.3}));
    const InfluenceNetwork net =
        validate_network(mat({{0, 0.3, 0.7}, {1, 0, 0}, {1, 0, 0}}));
    const auto report = star_fully_stubborn_equilibrium(net, prof);
    CHECK(block_equation_residual(net, prof, report.x_star) < 1e-10);
  }

  SUBCASE("detects perturbation") {
    const InfluenceNetwork net = validate_network(kStar3);
    const auto prof = StubbornnessProfile::validated(vec({0.1, 0, 0.6}));
    const auto report = solve_fixed_point(net, prof, PowerVector::uniform(3));
    Vector noisy = report.x_star.values();
    noisy(0) += 1e-3;
    noisy /= noisy.sum();
    CHECK(block_equation_residual(net, prof,
                                  PowerVector::from_computation(noisy)) > 1e-5);
  }
}

TEST_CASE("convergence_rate_measurement") {
  SUBCASE("observed rate sits below the contraction constant") {
    SplitMix64 rng = derive_stream(26, 0);
    const auto inst = sample_instance(rng, 4, 1.0);
    const auto prof = StubbornnessProfile::validated(Vector::Constant(4, 0.3));
    const CertificateSet cs = compute_certificates(inst.net, prof);
    CHECK(cs.kappa == doctest::Approx(2 * 0.3 * 1.9 / (4 * 0.7)).epsilon(1e-14));

    const Trajectory traj = iterate_issue_sequence(
        inst.net, prof, sample_simplex(rng, 4), kMaxOuterIterations, 1e-13);
    REQUIRE(traj.converged);
    const auto rate = convergence_rate_measurement(traj, traj.points.back());
    CHECK(rate.rho <= 0.46);
    CHECK(rate.points_used >= 2);
  }

  SUBCASE("a single point has no tail") {
    Trajectory traj;
    traj.points.push_back(PowerVector::uniform(3));
    CHECK_THROWS_AS(convergence_rate_measurement(traj, PowerVector::uniform(3)),
                    InsufficientTail);
  }
}

TEST_CASE("certificates") {
  SUBCASE("uniqueness certificate is exactly kappa < 1") {
    for (int trial = 0; trial < 1000; ++trial) {
      SplitMix64 rng = derive_stream(27, trial);
      const int n = 2 + static_cast<int>(rng.next() % 7);
      const auto inst = sample_instance(rng, n, 1.0);
      const CertificateSet cs = compute_certificates(inst.net, inst.prof);
      if (cs.contraction_unique) CHECK(cs.kappa < 1.0);
      CHECK(cs.uniqueness_threshold ==
            doctest::Approx(n / (n + 2 * (1 + cs.zeta))).epsilon(1e-14));
      CHECK(cs.single_issue_convergent == (cs.theta_max < 0.5));
    }
  }

  SUBCASE("uncertified instances say so") {
    const auto cs = compute_certificates(
        validate_network(mat({{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}})),
        StubbornnessProfile::validated(vec({0.9, 0.8, 0.9})));
    CHECK_FALSE(cs.contraction_unique);
    CHECK(cs.uniqueness == "uniqueness conjectured, not certified");
  }

  SUBCASE("star convergence certificate carries its threshold") {
    const InfluenceNetwork net =
        validate_network(mat({{0, 1, 0}, {1, 0, 0}, {1, 0, 0}}));
    const auto prof = StubbornnessProfile::validated(vec({0.9, 0, 0.7}));
    const auto cs = compute_certificates(net, prof);
    CHECK(cs.star_partial_applicable);
    CHECK(cs.star_partial_theta_sum == doctest::Approx(0.7));
    CHECK(cs.star_partial_bound == doctest::Approx(4.0 * 3 / 5 - 1));
    CHECK(cs.star_partial_center_convergent);
  }
}

TEST_CASE("star_quantities invariants") {
  for (int trial = 0; trial < 20; ++trial) {
    SplitMix64 rng = derive_stream(28, trial);
    const StarSpec star = random_star(rng, false);
    const GraphStructure gs = analyze_structure(star.net);
    REQUIRE(gs.star_center.has_value());
    const PowerVector x = sample_simplex(rng, star.net.size());
    const StarQuantities sq =
        star_quantities(star.net, star.prof, x, *gs.star_center);
    CHECK(sq.gamma.minCoeff() > 0.0);
    CHECK(sq.xi >= 1.0);
    CHECK(sq.alpha > 0.0);  // center weights avoid partially stubborn leaves
  }
}

TEST_CASE("multi_start_probe sees one basin on the star example") {
  const auto probe = multi_start_probe(
      validate_network(kStar3),
      StubbornnessProfile::validated(vec({0.1, 0, 0.6})), 20, 4242);
  CHECK(probe.all_converged);
  CHECK(probe.max_spread < 1e-8);
}
