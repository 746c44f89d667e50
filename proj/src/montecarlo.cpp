#include "socialpower/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "socialpower/dynamics.hpp"

namespace socialpower {

long chernoff_sample_size(double epsilon, double eta) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw OutOfRange("epsilon must be in (0,1)");
  if (!(eta > 0.0 && eta < 1.0)) throw OutOfRange("eta must be in (0,1)");
  return static_cast<long>(
      std::ceil(std::log(2.0 / eta) / (2.0 * epsilon * epsilon)));
}

PowerVector sample_simplex(SplitMix64& rng, int n) {
  Vector draws(n);
  for (int i = 0; i < n; ++i) draws(i) = rng.exponential();
  return PowerVector::from_computation(draws / draws.sum());
}

SampledInstance sample_instance(SplitMix64& rng, int n, double theta_max_cap) {
  if (n < 2) throw OutOfRange("n must be >= 2");
  if (!(theta_max_cap > 0.0 && theta_max_cap <= 1.0))
    throw OutOfRange("theta_max_cap must be in (0, 1]");

  Matrix C = Matrix::Zero(n, n);
  Vector row(n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n - 1; ++j) row(j) = rng.exponential();
    row /= row.sum();
    int k = 0;
    for (int j = 0; j < n; ++j)
      if (j != i) C(i, j) = row(k++);
  }

  Vector theta(n);
  do {
    for (int i = 0; i < n; ++i) theta(i) = rng.uniform01() * theta_max_cap;
  } while (theta.maxCoeff() <= 0.0);

  return {validate_network(C), StubbornnessProfile::validated(std::move(theta))};
}

int default_thread_count() {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  if (const char* cap = std::getenv("SOCIALPOWER_THREADS")) {
    const long v = std::strtol(cap, nullptr, 10);
    if (v >= 1 && static_cast<unsigned>(v) < hw) hw = static_cast<unsigned>(v);
  }
  return static_cast<int>(hw);
}

namespace {

struct RunOutcome {
  Vector limit;
  bool converged = false;
};

RunOutcome limit_of_model(const Matrix& C, const Vector& theta, ModelKind model,
                          const Vector& x0, double tol, long max_iter) {
  const Eigen::Index n = C.rows();
  RunOutcome out;
  if (model == ModelKind::kIssueSequence) {
    Vector x = x0;
    for (long s = 0; s < max_iter; ++s) {
      Vector next = power_map_raw(C, theta, x);
      const double change = (next - x).lpNorm<1>();
      x = std::move(next);
      if (change < tol) {
        out.converged = true;
        break;
      }
    }
    out.limit = std::move(x);
  } else {
    SingleIssueState state;
    state.V = Matrix::Identity(n, n);
    state.x = x0;
    for (long k = 0; k < max_iter; ++k) {
      SingleIssueState next = single_issue_step_raw(C, theta, state);
      const double change = (next.x - state.x).lpNorm<1>();
      state = std::move(next);
      if (change < tol) {
        out.converged = true;
        break;
      }
    }
    out.limit = state.x;
  }
  return out;
}

// Equilibrium bounds every recorded limit must satisfy: interior, the
// per-set floors, and max below 1/n + theta_ave. Slack covers solver
// tolerance.
bool limit_within_bounds(const Vector& x, const StubbornnessProfile& prof) {
  constexpr double slack = 1e-9;
  const int n = static_cast<int>(x.size());
  if (x.minCoeff() <= 0.0) return false;
  if (x.maxCoeff() >= 1.0 / n + prof.theta_ave() + slack) return false;
  for (int i : prof.fully_stubborn())
    if (x(i) < 1.0 / n - slack) return false;
  for (int i : prof.partially_stubborn())
    if (x(i) < (1.0 - prof.theta()(i)) / n - slack) return false;
  return true;
}

}  // namespace

UniquenessExperiment run_uniqueness_experiment(const ExperimentConfig& config) {
  if (config.pair_count < 1 || config.init_count < 1)
    throw OutOfRange("pair_count and init_count must be >= 1");
  if (!(config.tolerance >= 0.0)) throw OutOfRange("tolerance must be >= 0");

  UniquenessExperiment exp;
  exp.config = config;
  exp.pairs.resize(config.pair_count);

  const int threads =
      std::min(config.threads > 0 ? config.threads : default_thread_count(),
               config.pair_count);

  std::atomic<int> next_pair{0};
  std::vector<std::string> pair_errors(config.pair_count);
  auto worker = [&]() {
    for (;;) {
      const int pair = next_pair.fetch_add(1);
      if (pair >= config.pair_count) return;
      try {
        SplitMix64 inst_rng = derive_stream(config.seed, pair, 0);
        const SampledInstance inst =
            sample_instance(inst_rng, config.n, config.theta_max_cap);
        const Matrix& C = inst.net.interactions();
        const Vector& theta = inst.prof.theta();

        PairSummary& summary = exp.pairs[pair];
        Vector reference;
        for (int init = 0; init <= config.init_count; ++init) {
          SplitMix64 x_rng = derive_stream(config.seed, pair, 1 + init);
          const PowerVector x0 = sample_simplex(x_rng, config.n);
          const RunOutcome run =
              limit_of_model(C, theta, config.model, x0.values(),
                             config.solver_tol, config.solver_max_iter);
          if (!run.converged) summary.nonconverged_inits.push_back(init);
          if (!limit_within_bounds(run.limit, inst.prof))
            ++summary.bound_violations;
          if (init == 0) {
            summary.reference_x_star = run.limit;
            reference = run.limit;
          } else {
            const double dist = (run.limit - reference).lpNorm<1>();
            summary.max_spread = std::max(summary.max_spread, dist);
            if (dist > config.tolerance) ++summary.mismatch_count;
          }
        }
      } catch (const std::exception& e) {
        pair_errors[pair] = e.what();
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (int pair = 0; pair < config.pair_count; ++pair)
    if (!pair_errors[pair].empty())
      throw DomainError("experiment pair " + std::to_string(pair + 1) +
                        " failed: " + pair_errors[pair]);

  for (const PairSummary& s : exp.pairs) {
    exp.total_comparisons += config.init_count;
    exp.total_matches += config.init_count - s.mismatch_count;
    exp.total_bound_violations += s.bound_violations;
    exp.nonconverged_cells += static_cast<long>(s.nonconverged_inits.size());
  }
  exp.empirical_probability =
      static_cast<double>(exp.total_matches) / exp.total_comparisons;
  return exp;
}

}  // namespace socialpower
