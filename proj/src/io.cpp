#include "socialpower/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace socialpower {

namespace {

std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

NetworkConfig parse_network_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (key != "n" && key != "C" && key != "theta")
      throw ConfigError("unknown config key: \"" + key + "\"");
  for (const char* key : {"n", "C", "theta"})
    if (!j.contains(key))
      throw ConfigError("missing config key: \"" + std::string(key) + "\"");

  if (!j["n"].is_number_integer()) throw ConfigError("\"n\" must be an integer");
  const int n = j["n"].get<int>();
  if (n < 2) throw ConfigError("\"n\" must be >= 2");

  const json& jc = j["C"];
  if (!jc.is_array() || static_cast<int>(jc.size()) != n)
    throw ConfigError("\"C\" must be an array of " + std::to_string(n) + " rows");
  Matrix C(n, n);
  for (int i = 0; i < n; ++i) {
    const json& row = jc[i];
    if (!row.is_array() || static_cast<int>(row.size()) != n)
      throw ConfigError("row " + std::to_string(i + 1) + " of \"C\" must have " +
                        std::to_string(n) + " entries");
    for (int k = 0; k < n; ++k) {
      if (!row[k].is_number())
        throw ConfigError("non-numeric entry in \"C\" row " +
                          std::to_string(i + 1));
      C(i, k) = row[k].get<double>();
    }
  }

  const json& jt = j["theta"];
  if (!jt.is_array() || static_cast<int>(jt.size()) != n)
    throw ConfigError("\"theta\" must be an array of " + std::to_string(n) +
                      " entries");
  Vector theta(n);
  for (int i = 0; i < n; ++i) {
    if (!jt[i].is_number())
      throw ConfigError("non-numeric entry in \"theta\"");
    theta(i) = jt[i].get<double>();
  }

  return {validate_network(C), StubbornnessProfile::validated(std::move(theta))};
}

NetworkConfig load_network_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open network file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
  return parse_network_config(j);
}

PowerVector parse_x0_spec(const std::string& spec, int n, std::uint64_t seed,
                          std::uint64_t stream_id) {
  if (spec == "uniform") return PowerVector::uniform(n);
  if (spec == "random") {
    SplitMix64 rng = derive_stream(seed, 0x9a7f, stream_id);
    return sample_simplex(rng, n);
  }
  if (spec.rfind("vertex:", 0) == 0) {
    int k = 0;
    try {
      k = std::stoi(spec.substr(7));
    } catch (...) {
      throw ConfigError("bad vertex index in x0 spec: \"" + spec + "\"");
    }
    if (k < 1 || k > n)
      throw ConfigError("vertex index out of range 1.." + std::to_string(n));
    return PowerVector::vertex(n, k - 1);
  }
  // Explicit comma-separated components.
  Vector x(n);
  std::stringstream ss(spec);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= n) throw ConfigError("too many components in x0 spec");
    try {
      x(i++) = std::stod(item);
    } catch (...) {
      throw ConfigError("bad component in x0 spec: \"" + item + "\"");
    }
  }
  if (i != n)
    throw ConfigError("x0 spec has " + std::to_string(i) + " components, need " +
                      std::to_string(n));
  return PowerVector::validated(std::move(x));
}

Vector parse_p0_spec(const std::string& spec, int n, std::uint64_t seed,
                     std::uint64_t stream_id) {
  if (spec == "zero") return Vector::Zero(n);
  if (spec == "uniform" || spec == "random" || spec.rfind("vertex:", 0) == 0)
    return parse_x0_spec(spec, n, seed, stream_id).values();
  Vector p(n);
  std::stringstream ss(spec);
  std::string item;
  int i = 0;
  while (std::getline(ss, item, ',')) {
    if (i >= n) throw ConfigError("too many components in p0 spec");
    try {
      p(i++) = std::stod(item);
    } catch (...) {
      throw ConfigError("bad component in p0 spec: \"" + item + "\"");
    }
  }
  if (i != n)
    throw ConfigError("p0 spec has " + std::to_string(i) + " components, need " +
                      std::to_string(n));
  return p;
}

void write_csv(std::ostream& os, const std::vector<Vector>& rows) {
  const Eigen::Index n = rows.empty() ? 0 : rows.front().size();
  os << "step";
  for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
  os << "\n";
  for (size_t s = 0; s < rows.size(); ++s) {
    os << s;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << format17(rows[s](i));
    os << "\n";
  }
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  std::vector<Vector> rows;
  rows.reserve(traj.points.size());
  for (const PowerVector& p : traj.points) rows.push_back(p.values());
  write_csv(os, rows);
}

std::vector<Vector> read_trajectory_csv(std::istream& is) {
  std::vector<Vector> rows;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty trajectory CSV");
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    bool first = true;
    while (std::getline(ss, cell, ',')) {
      if (first) {  // step column
        first = false;
        continue;
      }
      vals.push_back(std::stod(cell));
    }
    Vector x(static_cast<Eigen::Index>(vals.size()));
    for (size_t i = 0; i < vals.size(); ++i) x(static_cast<Eigen::Index>(i)) = vals[i];
    rows.push_back(std::move(x));
  }
  return rows;
}

json to_json(const GraphStructure& gs) {
  json j;
  j["sccs"] = json::array();
  for (const auto& scc : gs.sccs) {
    json nodes = json::array();
    for (int v : scc) nodes.push_back(v + 1);
    j["sccs"].push_back(nodes);
  }
  json sinks = json::array();
  for (int c : gs.sink_sccs) sinks.push_back(c + 1);
  j["sink_sccs"] = sinks;
  j["star_center"] = gs.star_center ? json(*gs.star_center + 1) : json(nullptr);
  j["doubly_stochastic"] = gs.doubly_stochastic;
  return j;
}

json to_json(const CertificateSet& cs) {
  return json{{"theta_max", cs.theta_max},
              {"zeta", cs.zeta},
              {"uniqueness_threshold", cs.uniqueness_threshold},
              {"kappa", cs.kappa},
              {"contraction_unique", cs.contraction_unique},
              {"contraction_convergent", cs.contraction_convergent},
              {"star_partial_applicable", cs.star_partial_applicable},
              {"star_partial_theta_sum", cs.star_partial_theta_sum},
              {"star_partial_bound", cs.star_partial_bound},
              {"star_partial_center_convergent", cs.star_partial_center_convergent},
              {"single_issue_convergent", cs.single_issue_convergent},
              {"democratic", cs.democratic},
              {"democracy_eigen_residual", cs.democracy_eigen_residual},
              {"uniqueness", cs.uniqueness}};
}

json to_json(const PropertyReport& pr) {
  json checks = json::array();
  for (const auto& c : pr.checks)
    checks.push_back(json{{"name", c.name},
                          {"applicable", c.applicable},
                          {"holds", c.holds},
                          {"margin", c.margin}});
  return json{{"checks", checks}, {"all_hold", pr.all_hold}};
}

json to_json(const EquilibriumReport& report) {
  json j;
  j["x_star"] = std::vector<double>(
      report.x_star.values().data(),
      report.x_star.values().data() + report.x_star.size());
  j["residual"] = report.residual;
  j["iterations"] = report.iterations;
  j["method"] = to_string(report.method);
  j["solved"] = report.solved;
  j["certificates"] = to_json(report.certificates);
  j["warnings"] = report.warnings;
  return j;
}

json to_json(const UniquenessExperiment& exp) {
  json j;
  j["model"] = exp.config.model == ModelKind::kIssueSequence ? "issues" : "single";
  j["n"] = exp.config.n;
  j["seed"] = exp.config.seed;
  j["pair_count"] = exp.config.pair_count;
  j["init_count"] = exp.config.init_count;
  j["tolerance"] = exp.config.tolerance;
  j["theta_max_cap"] = exp.config.theta_max_cap;
  j["solver"] = json{{"tol", exp.config.solver_tol},
                     {"max_iter", exp.config.solver_max_iter}};
  if (exp.config.plan)
    j["plan"] = json{{"epsilon", exp.config.plan->epsilon},
                     {"eta", exp.config.plan->eta},
                     {"samples", exp.config.plan->samples}};
  else
    j["plan"] = nullptr;

  json pairs = json::array();
  json nonconverged = json::array();
  for (size_t p = 0; p < exp.pairs.size(); ++p) {
    const PairSummary& s = exp.pairs[p];
    pairs.push_back(
        json{{"pair", p + 1},
             {"reference_x_star",
              std::vector<double>(s.reference_x_star.data(),
                                  s.reference_x_star.data() +
                                      s.reference_x_star.size())},
             {"mismatch_count", s.mismatch_count},
             {"max_spread", s.max_spread},
             {"bound_violations", s.bound_violations}});
    for (int init : s.nonconverged_inits)
      nonconverged.push_back(json::array({p + 1, init}));
  }
  j["pairs"] = pairs;
  j["nonconverged_cells"] = nonconverged;
  j["total_matches"] = exp.total_matches;
  j["total_comparisons"] = exp.total_comparisons;
  j["empirical_probability"] = exp.empirical_probability;
  j["total_bound_violations"] = exp.total_bound_violations;
  return j;
}

json trajectory_summary(const Trajectory& traj) {
  json j;
  j["steps"] = traj.points.size() - 1;
  j["converged"] = traj.converged;
  j["final_residual"] = traj.final_residual;
  j["renormalizations"] = traj.renormalizations;
  const Vector& last = traj.points.back().values();
  j["final_x"] = std::vector<double>(last.data(), last.data() + last.size());
  return j;
}

}  // namespace socialpower
