// Command-line front end: validate networks, simulate the power
// dynamics, solve and certify equilibria, and run the randomized
// uniqueness study. Exit codes: 0 success, 1 domain violation,
// 2 usage/parse error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "socialpower/io.hpp"

namespace sp = socialpower;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::uint64_t resolve_seed(CLI::Option* seed_opt, std::uint64_t seed) {
  if (seed_opt->count() > 0) return seed;
  std::random_device rd;
  const std::uint64_t s =
      (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  std::cout << "seed: " << s << " (from entropy; pass --seed to reproduce)\n";
  return s;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw sp::ConfigError("cannot write: " + path);
  out << content;
}

sp::ModelKind parse_model_kind(const std::string& model) {
  if (model == "issues") return sp::ModelKind::kIssueSequence;
  if (model == "single") return sp::ModelKind::kSingleIssue;
  throw sp::ConfigError("unknown model: " + model);
}

int cmd_validate(const std::string& path) {
  sp::NetworkConfig cfg = sp::load_network_config(path);
  const sp::GraphStructure gs = sp::analyze_structure(cfg.net);

  std::cout << "network: valid (n=" << cfg.net.size() << ")\n";
  if (cfg.net.renormalized_rows().empty()) {
    std::cout << "renormalized rows: none\n";
  } else {
    std::cout << "renormalized rows:";
    for (int r : cfg.net.renormalized_rows()) std::cout << ' ' << r + 1;
    std::cout << "\n";
  }
  const bool a2 = sp::check_assumption_a2(cfg.prof.theta());
  const bool a1 = sp::check_assumption_a1(
      cfg.net, cfg.prof.theta(), sp::PowerVector::uniform(cfg.net.size()).values());
  std::cout << "assumption A2 (theta in [0,1), someone partially stubborn): "
            << (a2 ? "satisfied" : "violated") << "\n";
  std::cout << "assumption A1 (every sink SCC has a stubborn individual): "
            << (a1 ? "satisfied" : "violated") << "\n";
  std::cout << "sccs:";
  for (const auto& scc : gs.sccs) {
    std::cout << " {";
    for (size_t i = 0; i < scc.size(); ++i)
      std::cout << (i ? "," : "") << scc[i] + 1;
    std::cout << "}";
  }
  std::cout << "\nsink sccs:";
  for (int c : gs.sink_sccs) {
    std::cout << " {";
    for (size_t i = 0; i < gs.sccs[c].size(); ++i)
      std::cout << (i ? "," : "") << gs.sccs[c][i] + 1;
    std::cout << "}";
  }
  std::cout << "\nstar center: ";
  if (gs.star_center)
    std::cout << *gs.star_center + 1 << "\n";
  else
    std::cout << "none\n";
  std::cout << "doubly stochastic: " << (gs.doubly_stochastic ? "yes" : "no")
            << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& network, const std::string& model,
                 const std::string& x0_spec, const std::string& p0_spec,
                 double tol, long max_steps, int runs, std::uint64_t seed,
                 const std::string& out_arg, bool strict) {
  const std::string out = out_arg.empty() ? "simulation" : out_arg;
  sp::NetworkConfig cfg = sp::load_network_config(network);
  const int n = cfg.net.size();

  sp::json summary;
  summary["model"] = model;
  summary["seed"] = seed;
  summary["runs"] = sp::json::array();
  bool all_converged = true;
  std::vector<sp::Vector> finals;

  for (int run = 0; run < runs; ++run) {
    const sp::PowerVector x0 = sp::parse_x0_spec(x0_spec, n, seed, run);
    const std::string csv_path =
        runs == 1 ? out + ".csv" : out + "_run" + std::to_string(run + 1) + ".csv";
    std::ofstream csv(csv_path);
    if (!csv) throw sp::ConfigError("cannot write: " + csv_path);

    sp::json run_summary;
    run_summary["run"] = run + 1;
    run_summary["x0"] = std::vector<double>(x0.values().data(),
                                            x0.values().data() + n);
    if (model == "perceived") {
      // Power perception within one issue at the given x0; rows are p(k).
      sp::Vector p = sp::parse_p0_spec(p0_spec, n, seed, 0x5050 + run);
      const sp::Matrix W = sp::influence_matrix(cfg.net, x0);
      const sp::Vector theta = cfg.prof.theta();
      const sp::Vector one_minus = sp::Vector::Ones(n) - theta;
      const sp::Matrix Wt = one_minus.asDiagonal() * W.transpose() *
                            theta.cwiseQuotient(one_minus).asDiagonal();
      std::vector<sp::Vector> rows{p};
      bool converged = false;
      double residual = 0;
      for (long k = 0; k < max_steps; ++k) {
        sp::Vector next = Wt * p + one_minus / n;
        residual = (next - p).lpNorm<1>();
        p = std::move(next);
        rows.push_back(p);
        if (residual < tol) {
          converged = true;
          break;
        }
      }
      sp::write_csv(csv, rows);
      run_summary["converged"] = converged;
      run_summary["steps"] = rows.size() - 1;
      run_summary["final_residual"] = residual;
      run_summary["final_x"] = std::vector<double>(p.data(), p.data() + n);
      run_summary["matches_power_map"] =
          (p - sp::power_map(cfg.net, cfg.prof, x0).values()).lpNorm<1>();
      all_converged = all_converged && converged;
      finals.push_back(p);
    } else {
      const sp::Trajectory traj =
          model == "issues"
              ? sp::iterate_issue_sequence(cfg.net, cfg.prof, x0, max_steps, tol)
              : sp::iterate_single_issue(cfg.net, cfg.prof, x0, max_steps, tol);
      sp::write_trajectory_csv(csv, traj);
      run_summary.update(sp::trajectory_summary(traj));
      try {
        const sp::RateMeasurement rate =
            sp::convergence_rate_measurement(traj, traj.points.back());
        run_summary["observed_rate"] = rate.rho;
      } catch (const sp::InsufficientTail&) {
        run_summary["observed_rate"] = nullptr;
      }
      all_converged = all_converged && traj.converged;
      finals.push_back(traj.points.back().values());
    }
    summary["runs"].push_back(run_summary);
    std::cout << "wrote " << csv_path << "\n";
  }

  if (runs > 1) {
    double spread = 0;
    for (const auto& f : finals)
      spread = std::max(spread, (f - finals.front()).lpNorm<1>());
    summary["final_spread"] = spread;
  }
  const std::string summary_path = out + "_summary.json";
  write_file(summary_path, summary.dump(2) + "\n");
  std::cout << "wrote " << summary_path << "\n";

  if (strict && !all_converged) {
    std::cerr << "error: not all runs converged (strict mode)\n";
    return kExitDomain;
  }
  return kExitOk;
}

sp::Method parse_method(const std::string& m) {
  if (m == "auto") return sp::Method::kAuto;
  if (m == "iterate") return sp::Method::kIterate;
  if (m == "star-full") return sp::Method::kStarFullyStubborn;
  if (m == "star-partial") return sp::Method::kStarPartiallyStubborn;
  throw sp::ConfigError("unknown method: " + m);
}

sp::json equilibrium_json(const sp::NetworkConfig& cfg,
                          const sp::EquilibriumReport& report,
                          bool probe, std::uint64_t seed) {
  sp::json j = sp::to_json(report);
  j["graph"] = sp::to_json(sp::analyze_structure(cfg.net));
  const sp::DemocracyResult dem = sp::democracy_check(cfg.net, cfg.prof);
  j["democracy"] = sp::json{{"democratic", dem.democratic},
                            {"eigen_residual", dem.eigen_residual},
                            {"map_residual", dem.map_residual}};
  if (report.solved) {
    j["properties"] =
        sp::to_json(sp::equilibrium_properties_check(cfg.net, cfg.prof,
                                                     report.x_star));
    j["block_equation_residual"] =
        sp::block_equation_residual(cfg.net, cfg.prof, report.x_star);
  } else {
    j["properties"] = nullptr;
    j["block_equation_residual"] = nullptr;
  }
  if (probe) {
    const sp::ProbeResult pr = sp::multi_start_probe(cfg.net, cfg.prof, 20, seed);
    j["multi_start_probe"] = sp::json{{"starts", 20},
                                      {"max_spread", pr.max_spread},
                                      {"all_converged", pr.all_converged}};
  }
  return j;
}

int cmd_equilibrium(const std::string& network, const std::string& method,
                    const std::string& x0_spec, double tol, long max_iter,
                    bool probe, std::uint64_t seed, const std::string& out) {
  sp::NetworkConfig cfg = sp::load_network_config(network);
  const sp::PowerVector x0 = sp::parse_x0_spec(x0_spec, cfg.net.size(), seed);
  const sp::EquilibriumReport report = sp::solve_equilibrium(
      cfg.net, cfg.prof, x0, parse_method(method), tol, max_iter);

  const sp::json j = equilibrium_json(cfg, report, probe, seed);
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    write_file(out, j.dump(2) + "\n");
    std::cout << "method: " << sp::to_string(report.method)
              << ", solved: " << (report.solved ? "yes" : "no")
              << ", residual: " << report.residual << "\n";
    std::cout << "uniqueness: " << report.certificates.uniqueness << "\n";
    std::cout << "wrote " << out << "\n";
  }
  return report.solved ? kExitOk : kExitDomain;
}

int cmd_check(const std::string& network, double tol, long max_iter,
              std::uint64_t seed) {
  sp::NetworkConfig cfg = sp::load_network_config(network);
  const sp::EquilibriumReport report =
      sp::solve_equilibrium(cfg.net, cfg.prof,
                            sp::parse_x0_spec("random", cfg.net.size(), seed),
                            sp::Method::kAuto, tol, max_iter);
  bool ok = report.solved;
  std::printf("[%s] solver: method=%s residual=%.3e iterations=%ld\n",
              report.solved ? "PASS" : "FAIL", sp::to_string(report.method),
              report.residual, report.iterations);
  std::printf("       uniqueness: %s\n", report.certificates.uniqueness.c_str());

  if (report.solved) {
    const double block =
        sp::block_equation_residual(cfg.net, cfg.prof, report.x_star);
    const bool block_ok = block < 1e-9;
    ok = ok && block_ok;
    std::printf("[%s] block equations: residual=%.3e\n",
                block_ok ? "PASS" : "FAIL", block);

    const sp::DemocracyResult dem = sp::democracy_check(cfg.net, cfg.prof);
    const bool agree = dem.democratic == (dem.map_residual < 1e-10);
    ok = ok && agree;
    std::printf("[%s] democracy test: democratic=%s eigen=%.3e map=%.3e\n",
                agree ? "PASS" : "FAIL", dem.democratic ? "yes" : "no",
                dem.eigen_residual, dem.map_residual);

    const sp::PropertyReport props =
        sp::equilibrium_properties_check(cfg.net, cfg.prof, report.x_star);
    for (const auto& c : props.checks) {
      if (!c.applicable) continue;
      std::printf("[%s] %s (margin %.3e)\n", c.holds ? "PASS" : "FAIL",
                  c.name.c_str(), c.margin);
    }
    ok = ok && props.all_hold;
  }
  return ok ? kExitOk : kExitDomain;
}

int cmd_montecarlo(CLI::Option* eps_opt, double epsilon, double eta, int pairs,
                   int inits, int n, std::uint64_t seed,
                   const std::string& model, double tolerance, double theta_cap,
                   int threads, const std::string& out, bool dry_run) {
  sp::ExperimentConfig config;
  config.n = n;
  config.seed = seed;
  config.tolerance = tolerance;
  config.theta_max_cap = theta_cap;
  config.model = parse_model_kind(model);
  config.threads = threads;

  if (eps_opt->count() > 0) {
    const long N = sp::chernoff_sample_size(epsilon, eta);
    std::cout << "chernoff sample size: N=" << N << " per axis (epsilon="
              << epsilon << ", eta=" << eta << ")\n";
    const double total = static_cast<double>(N) * static_cast<double>(N);
    if (total > 1e6)
      std::cout << "warning: " << total
                << " model runs requested; a full-scale study at this size "
                   "takes hours to days\n";
    config.pair_count = static_cast<int>(N);
    config.init_count = static_cast<int>(N);
    config.plan = sp::ChernoffPlan{epsilon, eta, N};
  } else {
    config.pair_count = pairs;
    config.init_count = inits;
  }
  if (dry_run) {
    std::cout << "dry run: would run " << config.pair_count << " pairs x "
              << config.init_count << " initial conditions at n=" << n << "\n";
    return kExitOk;
  }

  const sp::UniquenessExperiment exp = sp::run_uniqueness_experiment(config);
  const sp::json j = sp::to_json(exp);
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_file(out, j.dump(2) + "\n");
  std::cout << "pairs=" << config.pair_count << " inits=" << config.init_count
            << " mismatches=" << (exp.total_comparisons - exp.total_matches)
            << " p_hat=" << exp.empirical_probability
            << " nonconverged=" << exp.nonconverged_cells << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"social power evolution in influence networks with stubborn "
               "individuals"};
  app.require_subcommand(1);

  std::string network, x0_spec = "uniform", p0_spec = "zero";
  std::string model = "issues", method = "auto", out;
  double tol = 1e-12, tolerance = 1e-8, epsilon = 0.01, eta = 0.01;
  double theta_cap = 1.0;
  long max_steps = 100000;
  int runs = 1, pairs = 200, inits = 200, n = 5, threads = 0;
  std::uint64_t seed = 0;
  bool strict = false, probe = false, dry_run = false;

  auto* validate = app.add_subcommand("validate", "validate a network file");
  validate->add_option("network", network, "network JSON file")->required();

  auto* simulate = app.add_subcommand("simulate", "simulate power trajectories");
  simulate->add_option("--network", network)->required();
  simulate->add_option("--model", model)
      ->check(CLI::IsMember({"issues", "single", "perceived"}));
  simulate->add_option("--x0", x0_spec,
                       "uniform | vertex:K | random | v1,v2,...");
  simulate->add_option("--p0", p0_spec, "initial perceived power (perceived)");
  simulate->add_option("--tol", tol);
  simulate->add_option("--max-steps", max_steps);
  simulate->add_option("--runs", runs)->check(CLI::PositiveNumber);
  auto* sim_seed = simulate->add_option("--seed", seed);
  simulate->add_option("--out", out, "output prefix (default: simulation)");
  simulate->add_flag("--strict", strict, "nonzero exit on non-convergence");

  auto* equilibrium =
      app.add_subcommand("equilibrium", "solve and certify the equilibrium");
  equilibrium->add_option("--network", network)->required();
  equilibrium->add_option("--method", method)
      ->check(CLI::IsMember({"auto", "iterate", "star-full", "star-partial"}));
  equilibrium->add_option("--x0", x0_spec);
  equilibrium->add_option("--tol", tol);
  equilibrium->add_option("--max-iter", max_steps);
  equilibrium->add_flag("--probe", probe, "20-start uniqueness probe");
  auto* eq_seed = equilibrium->add_option("--seed", seed);
  equilibrium->add_option("--out", out, "report JSON path");

  auto* check = app.add_subcommand("check", "verify equilibrium properties");
  check->add_option("--network", network)->required();
  check->add_option("--tol", tol);
  check->add_option("--max-iter", max_steps);
  auto* check_seed = check->add_option("--seed", seed);

  auto* montecarlo =
      app.add_subcommand("montecarlo", "randomized uniqueness study");
  auto* mc_eps = montecarlo->add_option("--epsilon", epsilon, "accuracy");
  auto* mc_eta = montecarlo->add_option("--eta", eta, "1 - confidence");
  auto* mc_pairs = montecarlo->add_option("--pairs", pairs);
  auto* mc_inits = montecarlo->add_option("--inits", inits);
  mc_eps->needs(mc_eta);
  mc_eta->needs(mc_eps);
  mc_eps->excludes(mc_pairs)->excludes(mc_inits);
  montecarlo->add_option("--n", n)->check(CLI::Range(2, 10000));
  auto* mc_seed = montecarlo->add_option("--seed", seed);
  montecarlo->add_option("--model", model)
      ->check(CLI::IsMember({"issues", "single"}));
  montecarlo->add_option("--tolerance", tolerance, "same-equilibrium radius");
  montecarlo->add_option("--theta-cap", theta_cap)
      ->check(CLI::Range(1e-9, 1.0));
  montecarlo->add_option("--threads", threads);
  montecarlo->add_option("--out", out, "experiment JSON path");
  montecarlo->add_flag("--dry-run", dry_run, "print the plan and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(network);
    if (simulate->parsed())
      return cmd_simulate(network, model, x0_spec, p0_spec, tol, max_steps,
                          runs, resolve_seed(sim_seed, seed), out, strict);
    if (equilibrium->parsed())
      return cmd_equilibrium(network, method, x0_spec, tol, max_steps, probe,
                             resolve_seed(eq_seed, seed), out);
    if (check->parsed())
      return cmd_check(network, tol, max_steps, resolve_seed(check_seed, seed));
    if (montecarlo->parsed())
      return cmd_montecarlo(mc_eps, epsilon, eta, pairs, inits, n,
                            resolve_seed(mc_seed, seed), model, tolerance,
                            theta_cap, threads, out, dry_run);
  } catch (const sp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sp::DomainError& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
