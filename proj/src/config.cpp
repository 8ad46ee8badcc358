#include "dstoch/config.hpp"

#include <fstream>

namespace dstoch {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("config: " + what);
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

ObjectiveSuite ObjectiveSpec::build() const {
  if (kind == "quadratic")
    return make_random_quadratic_suite(nodes, dim, mu, lipschitz, seed);
  if (kind == "logistic")
    return make_synthetic_logistic_suite(nodes, dim, n_total, sigma_x2, lambda, seed,
                                         mu_override);
  throw ConfigError("config: unknown objective kind '" + kind + "'");
}

Topology TopologySpec::build() const {
  if (kind == "complete") return Topology::complete(n);
  if (kind == "star") return Topology::star(n);
  if (kind == "ring") return Topology::ring(n);
  if (kind == "grid") return Topology::grid(rows, cols);
  if (kind == "disconnected") return Topology::disconnected(n);
  if (kind == "custom") return Topology::custom(n, edges);
  throw ConfigError("config: unknown topology kind '" + kind + "'");
}

TopologySpec parse_topology(const Json& j) {
  require(j.is_object() && j.contains("kind"), "topology needs a 'kind'");
  TopologySpec t;
  t.kind = j.at("kind").get<std::string>();
  if (t.kind == "grid") {
    require(j.contains("rows") && j.contains("cols"), "grid topology needs rows and cols");
    t.rows = j.at("rows").get<int>();
    t.cols = j.at("cols").get<int>();
    t.n = get_or(j, "n", t.rows * t.cols);
    require(t.n == t.rows * t.cols, "grid rows*cols must equal n");
  } else {
    require(j.contains("n"), "topology needs 'n'");
    t.n = j.at("n").get<int>();
  }
  if (t.kind == "custom") {
    require(j.contains("edges"), "custom topology needs 'edges'");
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, "each edge must be a pair");
      t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
  }
  return t;
}

NoiseSpec parse_noise(const Json& j) {
  require(j.is_object() && j.contains("kind"), "noise needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "exact") return NoiseSpec::exact();
  if (kind == "gaussian_iso") return NoiseSpec::gaussian_iso(j.at("sigma").get<double>());
  if (kind == "relative")
    return NoiseSpec::relative(j.at("sigma").get<double>(), j.at("eta").get<double>());
  if (kind == "minibatch") return NoiseSpec::minibatch(j.at("b").get<double>());
  throw ConfigError("config: unknown noise kind '" + kind + "'");
}

ExperimentConfig parse_config(const Json& j) {
  require(j.is_object(), "top level must be an object");
  require(j.contains("seed"), "'seed' is mandatory (no wall-clock seeding)");
  require(j.contains("objective"), "'objective' is mandatory");
  require(j.contains("topology"), "'topology' is mandatory");

  ExperimentConfig cfg;
  cfg.seed = j.at("seed").get<std::uint64_t>();

  const Json& obj = j.at("objective");
  require(obj.contains("kind"), "objective needs a 'kind'");
  cfg.objective.kind = obj.at("kind").get<std::string>();
  require(cfg.objective.kind == "quadratic" || cfg.objective.kind == "logistic",
          "objective kind must be quadratic or logistic");
  cfg.objective.dim = obj.at("dim").get<int>();
  cfg.objective.seed = get_or<std::uint64_t>(obj, "seed", cfg.seed);
  if (cfg.objective.kind == "quadratic") {
    cfg.objective.mu = get_or(obj, "mu", 1.0);
    cfg.objective.lipschitz = get_or(obj, "L", 10.0);
  } else {
    cfg.objective.n_total = get_or(obj, "n", 1000);
    cfg.objective.sigma_x2 = get_or(obj, "sigma_x2", 5.0);
    cfg.objective.lambda = get_or(obj, "lambda", 0.05);
    if (obj.contains("mu_override"))
      cfg.objective.mu_override = obj.at("mu_override").get<double>();
  }

  cfg.topology = parse_topology(j.at("topology"));
  cfg.objective.nodes = get_or(obj, "nodes", cfg.topology.n);
  require(cfg.objective.nodes == cfg.topology.n,
          "objective nodes must match topology n");

  const auto rule = get_or<std::string>(j, "weight_rule", "metropolis");
  if (rule == "metropolis")
    cfg.weight_rule = WeightRule::Metropolis;
  else if (rule == "equal_neighbor")
    cfg.weight_rule = WeightRule::EqualNeighbor;
  else
    throw ConfigError("config: unknown weight_rule '" + rule + "'");
  if (j.contains("shift_tau")) cfg.shift_tau = j.at("shift_tau").get<double>();

  cfg.noise = j.contains("noise") ? parse_noise(j.at("noise")) : NoiseSpec::exact();

  const auto method = get_or<std::string>(j, "method", "dsg");
  if (method == "dsg")
    cfg.method = MethodKind::Dsg;
  else if (method == "dasg")
    cfg.method = MethodKind::Dasg;
  else if (method == "dmasg")
    cfg.method = MethodKind::Dmasg;
  else
    throw ConfigError("config: unknown method '" + method + "'");

  cfg.alpha = get_or(j, "alpha", 0.1);
  if (j.contains("beta")) cfg.beta = j.at("beta").get<double>();
  if (j.contains("masg")) {
    const Json& m = j.at("masg");
    if (m.contains("k1")) cfg.masg.k1 = m.at("k1").get<long>();
    cfg.masg.p = get_or(m, "p", 7.0);
    cfg.masg.stages = get_or(m, "stages", 3);
  }

  cfg.iters = get_or<long>(j, "iters", 1000);
  cfg.replicates = get_or(j, "replicates", 1);
  cfg.record_every = get_or<long>(j, "record_every", 1);
  cfg.track_fixed_point =
      get_or(j, "track_fixed_point", cfg.method != MethodKind::Dmasg);
  cfg.out = get_or<std::string>(j, "out", "");
  require(cfg.iters >= 0 && cfg.replicates >= 1 && cfg.record_every >= 1,
          "iters/replicates/record_every out of range");

  cfg.sweep_alphas = {cfg.alpha};
  cfg.sweep_batches = {cfg.noise.batch};
  cfg.sweep_topologies = {cfg.topology};
  if (j.contains("sweep")) {
    const Json& s = j.at("sweep");
    if (s.contains("alphas")) {
      cfg.sweep_alphas = s.at("alphas").get<std::vector<double>>();
      require(!cfg.sweep_alphas.empty(), "sweep.alphas must be nonempty");
      require(cfg.method != MethodKind::Dmasg,
              "stepsize sweeps do not apply to dmasg (the schedule sets them)");
    }
    if (s.contains("batches")) {
      cfg.sweep_batches = s.at("batches").get<std::vector<double>>();
      require(!cfg.sweep_batches.empty(), "sweep.batches must be nonempty");
      require(cfg.noise.kind == NoiseKind::Minibatch,
              "sweep.batches needs minibatch noise");
    }
    if (s.contains("topologies")) {
      cfg.sweep_topologies.clear();
      for (const auto& t : s.at("topologies")) cfg.sweep_topologies.push_back(parse_topology(t));
      require(!cfg.sweep_topologies.empty(), "sweep.topologies must be nonempty");
      for (const auto& t : cfg.sweep_topologies)
        require(t.n == cfg.objective.nodes, "sweep topology n must match objective nodes");
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace dstoch
