#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "socialpower/network.hpp"
#include "socialpower/rng.hpp"

namespace socialpower {

// Smallest N with N >= ln(2/eta) / (2 epsilon^2): running N sampled
// initial conditions estimates the convergence probability within
// epsilon at confidence 1-eta. For epsilon = eta = 0.01 this gives
// 26492; the commonly quoted 27000 over-approximates it.
long chernoff_sample_size(double epsilon, double eta);

// Uniform sample on the n-simplex: n standard exponentials normalized
// by their sum.
PowerVector sample_simplex(SplitMix64& rng, int n);

struct SampledInstance {
  InfluenceNetwork net;
  StubbornnessProfile prof;
};

// Random instance: each row of C is uniform on the (n-1)-simplex over
// its off-diagonal entries; theta_i uniform on [0, theta_max_cap),
// resampled until some theta_j > 0.
SampledInstance sample_instance(SplitMix64& rng, int n, double theta_max_cap);

enum class ModelKind { kIssueSequence, kSingleIssue };

struct ChernoffPlan {
  double epsilon = 0.0;
  double eta = 0.0;
  long samples = 0;
};

struct ExperimentConfig {
  int pair_count = 200;
  int init_count = 200;
  int n = 5;
  std::uint64_t seed = 0;
  double tolerance = 1e-8;  // l1 radius for "same equilibrium"
  ModelKind model = ModelKind::kIssueSequence;
  double theta_max_cap = 1.0;
  double solver_tol = 1e-12;
  long solver_max_iter = 100'000;
  int threads = 0;  // 0: hardware count capped by SOCIALPOWER_THREADS
  std::optional<ChernoffPlan> plan;
};

struct PairSummary {
  Vector reference_x_star;
  int mismatch_count = 0;
  double max_spread = 0.0;
  std::vector<int> nonconverged_inits;  // 0 is the reference run
  int bound_violations = 0;             // equilibrium bound checks failed
};

struct UniquenessExperiment {
  ExperimentConfig config;
  std::vector<PairSummary> pairs;
  long total_matches = 0;
  long total_comparisons = 0;
  double empirical_probability = 0.0;
  long total_bound_violations = 0;
  long nonconverged_cells = 0;
};

// For each sampled (C, Theta) pair: run the chosen model from one
// reference initial condition plus init_count further ones; an initial
// condition mismatches when its limit is farther than `tolerance` (l1)
// from the reference limit. Work is split across threads by pair with
// per-(pair, init) derived random streams, so results are bit-identical
// for a given seed regardless of thread count.
UniquenessExperiment run_uniqueness_experiment(const ExperimentConfig& config);

int default_thread_count();  // hardware, capped by SOCIALPOWER_THREADS

}  // namespace socialpower
