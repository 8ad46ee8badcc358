#include "dstoch/config.hpp"
#include "dstoch/sweep.hpp"

#include "doctest.h"

#include <sstream>

using namespace dstoch;

namespace {

Json base_config() {
  return Json::parse(R"({
    "seed": 7,
    "objective": {"kind": "quadratic", "dim": 2, "mu": 1.0, "L": 10.0, "seed": 11},
    "topology": {"kind": "ring", "n": 3},
    "shift_tau": 1.0,
    "noise": {"kind": "gaussian_iso", "sigma": 1.0},
    "method": "dsg",
    "alpha": 0.02,
    "iters": 60,
    "replicates": 2,
    "record_every": 10
  })");
}

std::string csv_of(const ResultTable& table) {
  std::ostringstream os;
  write_csv(table, os);
  return os.str();
}

}  // namespace

TEST_SUITE_BEGIN("harness");

TEST_CASE("configs parse and validate") {
  CHECK_NOTHROW(parse_config(base_config()));

  SUBCASE("seed is mandatory") {
    auto j = base_config();
    j.erase("seed");
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SUBCASE("unknown kinds are rejected") {
    auto j = base_config();
    j["objective"]["kind"] = "cubic";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["noise"]["kind"] = "cauchy";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = base_config();
    j["method"] = "momentumless";
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SUBCASE("batch sweeps need minibatch noise") {
    auto j = base_config();
    j["sweep"] = {{"batches", {0.1, 0.5}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SUBCASE("sweep topologies must keep the node count") {
    auto j = base_config();
    j["sweep"] = {{"topologies", {{{"kind", "ring"}, {"n", 5}}}}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
  }
  SUBCASE("custom topologies parse edges") {
    auto j = base_config();
    j["topology"] = {{"kind", "custom"},
                     {"n", 3},
                     {"edges", {{0, 1}, {1, 2}, {2, 0}}}};
    const auto cfg = parse_config(j);
    CHECK(cfg.topology.edges.size() == 3);
    CHECK_NOTHROW(build_mixing(cfg.topology.build()));
  }
}

TEST_CASE("sweep emits the pinned CSV schema") {
  const auto cfg = parse_config(base_config());
  const auto table = run_sweep(cfg, 1);
  const std::string csv = csv_of(table);

  CHECK(csv.rfind("sweep_id,method,alpha,beta,k,dist2_opt,dist2_fixed,avg_dist2_opt,"
                  "consensus_err\n", 0) == 0);
  // 1 sweep point x recorded iterations {0, 10, ..., 60}
  std::size_t rows = 0;
  for (char c : csv) rows += c == '\n';
  CHECK(rows == 1 + 7);
  CHECK(table.rows.front().method == "dsg");
  CHECK(table.rows.front().k == 0);
  CHECK(table.rows.back().k == 60);
}

TEST_CASE("same config and seed give identical bytes, any job count") {
  auto j = base_config();
  j["replicates"] = 4;
  const auto cfg = parse_config(j);
  const std::string a = csv_of(run_sweep(cfg, 1));
  const std::string b = csv_of(run_sweep(cfg, 2));
  CHECK(a == b);
}

TEST_CASE("a single-point sweep matches a direct run") {
  const auto cfg = parse_config(base_config());
  const auto table = run_sweep(cfg, 1);

  const auto suite = cfg.objective.build();
  auto w = build_mixing(cfg.topology.build(), cfg.weight_rule);
  w = shift_mixing(w, *cfg.shift_tau);
  RunConfig rc;
  rc.method = RunConfig::Method::Dsg;
  rc.alpha = cfg.alpha;
  rc.iters = cfg.iters;
  rc.replicates = cfg.replicates;
  rc.record_every = cfg.record_every;
  const RunContext ctx{w, suite, cfg.noise, cfg.seed, 1};
  const Vector x_inf = fixed_point(w, cfg.alpha, suite);
  const Trace t = run(rc, ctx, Vector::Zero(6), &x_inf);

  REQUIRE(table.rows.size() == t.ks.size());
  for (std::size_t s = 0; s < t.ks.size(); ++s) {
    CHECK(table.rows[s].k == t.ks[s]);
    CHECK(table.rows[s].dist2_opt == t.dist2_opt[s]);
    CHECK(table.rows[s].dist2_fixed == t.dist2_fixed[s]);
  }
}

TEST_CASE("stepsize sweeps order plateaus and survive divergence") {
  auto j = base_config();
  j["iters"] = 400;
  j["record_every"] = 20;
  j["replicates"] = 8;
  j["sweep"] = {{"alphas", {0.01, 0.04, 5.0}}};  // the last one diverges
  const auto cfg = parse_config(j);
  const auto table = run_sweep(cfg, 2);

  // tail plateau of dist2_fixed grows with alpha (stable points only)
  double tail[2] = {0.0, 0.0};
  int counts[2] = {0, 0};
  for (const auto& r : table.rows) {
    if (r.sweep_id < 2 && r.k >= 300) {
      tail[r.sweep_id] += r.dist2_fixed;
      ++counts[r.sweep_id];
    }
  }
  CHECK(tail[0] / counts[0] < tail[1] / counts[1]);

  // the divergent point records inf but the sweep completes
  bool saw_inf = false;
  for (const auto& r : table.rows)
    if (r.sweep_id == 2 && std::isinf(r.dist2_opt)) saw_inf = true;
  CHECK(saw_inf);
  const std::string csv = csv_of(table);
  CHECK(csv.find("inf") != std::string::npos);
}

TEST_CASE("requested bound columns dominate the empirical columns") {
  auto j = base_config();
  j["iters"] = 300;
  j["record_every"] = 30;
  j["replicates"] = 64;
  const auto cfg = parse_config(j);
  const auto table = run_sweep(cfg, 2, true);
  REQUIRE(table.with_bounds);
  for (const auto& r : table.rows) {
    REQUIRE(std::isfinite(r.bound_dist2_fixed));
    // generous Monte-Carlo slack at this replicate count
    CHECK(r.dist2_fixed <= r.bound_dist2_fixed * 1.2 + 1e-9);
    CHECK(r.dist2_opt <= r.bound_dist2_opt * 1.2 + 1e-9);
  }
}

TEST_CASE("multistage sweeps report stage parameters per iteration") {
  auto j = base_config();
  j["method"] = "dmasg";
  j["masg"] = {{"k1", 8}, {"p", 7.0}, {"stages", 2}};
  j["record_every"] = 4;
  j["iters"] = 0;  // ignored for schedules
  const auto cfg = parse_config(j);
  const auto table = run_sweep(cfg, 1);

  REQUIRE(!table.rows.empty());
  // dist2_fixed has no meaning for a stage-varying stepsize
  for (const auto& r : table.rows) CHECK(std::isnan(r.dist2_fixed));
  // alpha shrinks when crossing into stage two
  const double alpha_first = table.rows[1].alpha;
  const double alpha_last = table.rows.back().alpha;
  CHECK(alpha_last < alpha_first);
  CHECK(table.rows.back().method == "dmasg");
}

TEST_SUITE_END();
