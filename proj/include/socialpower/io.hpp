#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "socialpower/equilibrium.hpp"
#include "socialpower/montecarlo.hpp"

namespace socialpower {

using nlohmann::json;

struct NetworkConfig {
  InfluenceNetwork net;
  StubbornnessProfile prof;
};

// Network config schema: {"n": int, "C": [[real]], "theta": [real]}.
// Unknown keys are rejected. Parse/shape problems raise ConfigError;
// invariant violations raise the corresponding DomainError.
NetworkConfig parse_network_config(const json& j);
NetworkConfig load_network_config(const std::string& path);

// Initial-condition grammar: "uniform" | "vertex:K" (1-based K) |
// "random" (seeded) | comma-separated components. stream_id keeps
// repeated random draws under one seed distinct.
PowerVector parse_x0_spec(const std::string& spec, int n, std::uint64_t seed,
                          std::uint64_t stream_id = 0);

// Same grammar plus "zero"; perceived power starts anywhere in R^n, so
// explicit components are not simplex-validated.
Vector parse_p0_spec(const std::string& spec, int n, std::uint64_t seed,
                     std::uint64_t stream_id = 0);

// Trajectory CSV: header "step,x_1,...,x_n", one row per iterate,
// %.17g decimals (lossless for binary64).
void write_csv(std::ostream& os, const std::vector<Vector>& rows);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
std::vector<Vector> read_trajectory_csv(std::istream& is);

json to_json(const GraphStructure& gs);               // 1-based node indices
json to_json(const CertificateSet& cs);
json to_json(const PropertyReport& pr);
json to_json(const EquilibriumReport& report);
json to_json(const UniquenessExperiment& exp);
json trajectory_summary(const Trajectory& traj);

}  // namespace socialpower
