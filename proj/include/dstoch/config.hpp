#pragma once

#include "dstoch/algorithms.hpp"
#include "dstoch/netgraph.hpp"
#include "dstoch/noise.hpp"
#include "dstoch/objectives.hpp"

#include <optional>
#include <string>
#include <vector>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace dstoch {

using Json = nlohmann::ordered_json;

struct ObjectiveSpec {
  std::string kind;  // "quadratic" | "logistic"
  int nodes = 0;
  int dim = 0;
  std::uint64_t seed = 0;
  // quadratic
  double mu = 1.0;
  double lipschitz = 10.0;
  // logistic
  int n_total = 1000;
  double sigma_x2 = 5.0;
  double lambda = 0.05;
  std::optional<double> mu_override;

  ObjectiveSuite build() const;
};

struct TopologySpec {
  std::string kind = "ring";
  int n = 0;
  int rows = 0, cols = 0;
  std::vector<std::pair<int, int>> edges;

  Topology build() const;
};

enum class MethodKind { Dsg, Dasg, Dmasg };

struct MasgSpec {
  std::optional<long> k1;  // defaults to the balanced choice
  double p = 7.0;
  int stages = 3;
};

// One experiment: a single (objective, noise, method) with optional sweep
// axes over stepsize, batch proportion and topology. The seed is mandatory;
// nothing in the harness falls back to wall-clock seeding.
struct ExperimentConfig {
  ObjectiveSpec objective;
  TopologySpec topology;
  WeightRule weight_rule = WeightRule::Metropolis;
  std::optional<double> shift_tau;
  NoiseSpec noise;
  MethodKind method = MethodKind::Dsg;
  double alpha = 0.1;
  std::optional<double> beta;
  MasgSpec masg;
  long iters = 1000;
  int replicates = 1;
  long record_every = 1;
  std::uint64_t seed = 0;
  bool track_fixed_point = true;
  std::string out;  // default output path; the CLI flag overrides it

  std::vector<double> sweep_alphas;          // defaults to {alpha}
  std::vector<double> sweep_batches;         // defaults to {noise.batch}
  std::vector<TopologySpec> sweep_topologies;  // defaults to {topology}
};

ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::string& path);

NoiseSpec parse_noise(const Json& j);
TopologySpec parse_topology(const Json& j);

}  // namespace dstoch
