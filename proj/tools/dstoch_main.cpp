// Command-line front end: simulate sweeps to CSV, evaluate closed-form
// bounds, certify matrix-inequality rates, optimize the robustness trade-off,
// dump spectra and run the oracle self-test.

#include "dstoch/analysis.hpp"
#include "dstoch/config.hpp"
#include "dstoch/linalg.hpp"
#include "dstoch/oracles.hpp"
#include "dstoch/quadratic_exact.hpp"
#include "dstoch/sweep.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

namespace {

using dstoch::Json;

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw dstoch::ConfigError("cannot open output file '" + path + "'");
  return file;
}

Json series_to_json(const dstoch::BoundSeries& s) {
  Json j;
  j["k"] = s.ks;
  j["bias"] = s.bias;
  j["variance"] = s.variance;
  j["network"] = s.network;
  j["total"] = s.total;
  return j;
}

Json inputs_to_json(const dstoch::BoundInputs& in) {
  Json j;
  j["mu"] = in.mu;
  j["L"] = in.lipschitz;
  j["lambda_N"] = in.lambda_min;
  j["gamma"] = in.gamma;
  j["sigma"] = in.sigma;
  j["C1"] = in.c1;
  j["N"] = in.nodes;
  j["dist0_fixed_sq"] = in.dist0_fixed_sq;
  j["dist0_opt_sq"] = in.dist0_opt_sq;
  j["v_s_alpha0"] = in.v_s_alpha0;
  return j;
}

struct CommonState {
  dstoch::ExperimentConfig cfg;
  std::unique_ptr<dstoch::ObjectiveSuite> suite;
  std::unique_ptr<dstoch::MixingMatrix> w;

  void build() {
    suite = std::make_unique<dstoch::ObjectiveSuite>(cfg.objective.build());
    auto mixing = dstoch::build_mixing(cfg.topology.build(), cfg.weight_rule);
    if (cfg.shift_tau) mixing = dstoch::shift_mixing(mixing, *cfg.shift_tau);
    w = std::make_unique<dstoch::MixingMatrix>(std::move(mixing));
  }
};

std::vector<long> recorded_ks(long iters, long stride) {
  std::vector<long> ks;
  for (long k = 0; k <= iters; ++k)
    if (k == 0 || k == iters || k % stride == 0) ks.push_back(k);
  return ks;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path, int jobs,
                 std::optional<std::uint64_t> seed_override, bool with_bounds) {
  auto cfg = dstoch::load_config(config_path);
  if (seed_override) cfg.seed = *seed_override;
  const auto table = dstoch::run_sweep(cfg, jobs, with_bounds);
  std::ofstream file;
  dstoch::write_csv(table, open_output(out_path.empty() ? cfg.out : out_path, file));
  return 0;
}

int cmd_analyze(const std::string& config_path, const std::string& out_path,
                bool quadratic_exact) {
  CommonState st;
  st.cfg = dstoch::load_config(config_path);
  st.build();
  const auto& cfg = st.cfg;
  const auto& suite = *st.suite;
  const auto& w = *st.w;

  Json out;
  if (quadratic_exact) {
    const auto spectrum = dstoch::aq_spectrum(w, cfg.alpha, suite);
    const double beta =
        cfg.beta ? *cfg.beta : dstoch::nesterov_momentum(cfg.alpha, suite.mu());
    const double sigma = std::sqrt(dstoch::estimate_noise_sigma_sq(
        cfg.noise, suite, suite.x_star(), 1000, cfg.seed ^ 0x5157ULL));
    const auto dsg = dstoch::var_dsg_exact(spectrum, sigma, suite.dim());
    const auto dasg = dstoch::var_dasg_exact(spectrum, beta, sigma, suite.dim());
    out["alpha"] = cfg.alpha;
    out["beta"] = beta;
    out["sigma"] = sigma;
    out["spectrum"] = std::vector<double>(
        spectrum.mu_list.data(), spectrum.mu_list.data() + spectrum.mu_list.size());
    out["rho_dsg"] =
        dstoch::rho_dsg(cfg.alpha, suite.mu(), suite.lipschitz(), w.lambda_min);
    out["rho_dasg"] = dstoch::rho_dasg_quadratic(spectrum, beta);
    out["var_dsg"] = dsg.limit_variance;
    out["var_dasg"] = dasg.limit_variance;
    out["j_inf_dsg"] = dsg.j_inf;
    out["j_inf_dasg"] = dasg.j_inf;
    out["node_avg_bound"] =
        dstoch::node_avg_var_bound(spectrum, beta, sigma, w.size(), suite.dim());
  } else {
    const dstoch::Vector x0 =
        dstoch::Vector::Zero(static_cast<long>(w.size()) * suite.dim());
    const double sigma = std::sqrt(dstoch::estimate_noise_sigma_sq(
        cfg.noise, suite, suite.x_star(), 1000, cfg.seed ^ 0x5157ULL));
    const auto ks = recorded_ks(cfg.iters, cfg.record_every);
    if (cfg.method == dstoch::MethodKind::Dmasg) {
      const long k1 = cfg.masg.k1 ? *cfg.masg.k1
                                  : dstoch::masg_k1_balanced(
                                        cfg.masg.p, dstoch::kappa_tilde(suite, w));
      const auto schedule =
          dstoch::build_masg_schedule(k1, cfg.masg.p, suite, w, cfg.masg.stages);
      const auto in =
          dstoch::make_bound_inputs(w, suite, sigma, x0, schedule.stages[0].alpha);
      const auto rep = dstoch::masg_bound(schedule, cfg.masg.p, in, ks);
      out["method"] = "dmasg";
      out["k1"] = k1;
      out["p"] = cfg.masg.p;
      out["inputs"] = inputs_to_json(in);
      out["stage_t"] = rep.stage_t;
      out["boundary_k"] = rep.boundary_k;
      out["stage_bias"] = rep.bias;
      out["stage_variance"] = rep.variance;
      out["stage_network"] = rep.network;
      out["stage_total"] = rep.total;
      out["per_k"] = series_to_json(rep.per_k);
      out["per_k_up_to_constant"] = rep.per_k_up_to_constant;
    } else {
      const auto in = dstoch::make_bound_inputs(w, suite, sigma, x0, cfg.alpha);
      const auto rep = cfg.method == dstoch::MethodKind::Dsg
                           ? dstoch::dsg_bound(ks, cfg.alpha, in)
                           : dstoch::dasg_bound(ks, cfg.alpha, in);
      out["method"] = rep.method;
      out["alpha"] = rep.alpha;
      out["beta"] = rep.beta;
      out["inputs"] = inputs_to_json(rep.inputs);
      out["to_fixed_point"] = series_to_json(rep.to_fixed_point);
      if (!rep.to_optimum.empty()) out["to_optimum"] = series_to_json(rep.to_optimum);
      out["j_inf_rate"] = rep.j_inf_rate;
      if (rep.method == "dsg") out["j_inf_small_alpha"] = rep.j_inf_small_alpha;
    }
  }
  std::ofstream file;
  open_output(out_path, file) << out.dump(2) << "\n";
  return 0;
}

Json certificate_to_json(const dstoch::MICertificate& cert, bool oracle) {
  Json j;
  j["alpha"] = cert.alpha;
  j["beta"] = cert.beta;
  j["rho"] = cert.rho;
  j["p_tilde"] = {{cert.p_tilde(0, 0), cert.p_tilde(0, 1)},
                  {cert.p_tilde(1, 0), cert.p_tilde(1, 1)}};
  j["min_eig_slack"] = cert.min_eig_slack;
  j["feasible"] = cert.feasible();
  if (oracle) {
    j["oracle_min_eig"] = dstoch::oracles::jacobi_eigenvalues(cert.residual)
                              .eigenvalues.minCoeff();
  }
  return j;
}

int cmd_certify(const std::string& config_path, const std::string& out_path,
                std::optional<double> alpha, std::optional<double> rho,
                std::optional<double> beta, bool auto_grid, bool oracle) {
  CommonState st;
  st.cfg = dstoch::load_config(config_path);
  st.build();
  const auto& suite = *st.suite;
  const auto& w = *st.w;
  const double mu = suite.mu(), lips = suite.lipschitz(), lam = w.lambda_min;
  if (lam <= 0.0)
    throw dstoch::Assumption3Violated(
        "certify needs lambda_N > 0; add \"shift_tau\" to the config");

  const auto check = [&](double a) {
    const double b = beta ? *beta : dstoch::nesterov_momentum(a, mu);
    const double r = rho ? *rho : 1.0 - std::sqrt(a * mu);
    return dstoch::mi_check(a, b, r, dstoch::s_alpha(a, mu), mu, lips, lam);
  };

  Json out;
  bool all_feasible = true;
  if (auto_grid) {
    const double hi = std::min(lam / lips, 1.0 / (lips + mu));
    Json list = Json::array();
    for (int i = 0; i < 20; ++i) {
      const double a = hi * std::pow(10.0, -3.0 * (19 - i) / 19.0);  // log grid
      const auto cert = check(a);
      all_feasible = all_feasible && cert.feasible();
      list.push_back(certificate_to_json(cert, oracle));
    }
    out["grid"] = list;
    out["all_feasible"] = all_feasible;
  } else {
    if (!alpha) throw dstoch::ConfigError("certify needs --alpha or --auto");
    const auto cert = check(*alpha);
    all_feasible = cert.feasible();
    out = certificate_to_json(cert, oracle);
  }
  std::ofstream file;
  open_output(out_path, file) << out.dump(2) << "\n";
  return all_feasible ? 0 : 2;
}

int cmd_tradeoff(const std::string& config_path, const std::string& out_path,
                 double delta) {
  CommonState st;
  st.cfg = dstoch::load_config(config_path);
  st.build();
  const auto& suite = *st.suite;
  const auto& w = *st.w;
  dstoch::TradeoffParams p;
  p.mu = suite.mu();
  p.lipschitz = suite.lipschitz();
  p.lambda_min = w.lambda_min;
  p.gamma = w.gamma;
  p.c1 = suite.c1_constant();
  p.nodes = w.size();
  p.sigma = std::sqrt(dstoch::estimate_noise_sigma_sq(
      st.cfg.noise, suite, suite.x_star(), 1000, st.cfg.seed ^ 0x5157ULL));

  const auto res = dstoch::tradeoff_alpha(delta, p);
  Json out;
  out["delta"] = delta;
  out["alpha_star"] = res.alpha_star;
  out["j_tot"] = res.j_tot;
  out["alpha_bar"] = res.alpha_bar;
  out["rho_star"] = res.rho_star;
  std::ofstream file;
  open_output(out_path, file) << out.dump(2) << "\n";
  return 0;
}

int cmd_spectrum(const std::string& config_path, const std::string& out_path,
                 bool aq, std::optional<double> alpha) {
  CommonState st;
  st.cfg = dstoch::load_config(config_path);
  st.build();
  std::ofstream file;
  auto& os = open_output(out_path, file);
  if (aq) {
    const double a = alpha ? *alpha : st.cfg.alpha;
    dstoch::write_spectrum_csv(dstoch::aq_spectrum(*st.w, a, *st.suite).mu_list, os);
  } else {
    dstoch::write_spectrum_csv(st.w->spectrum, os);
  }
  return 0;
}

int cmd_selftest();

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized stochastic gradient simulator and analyzer"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  int jobs = 1;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> alpha_flag, rho_flag, beta_flag;
  double delta = 0.0;
  bool with_bounds = false, quadratic_exact = false, auto_grid = false,
       oracle = false, aq = false;

  auto* sim = app.add_subcommand("simulate", "run a sweep and emit CSV");
  sim->add_option("--config", config_path, "JSON config path")->required();
  sim->add_option("--out", out_path, "output CSV path ('-' for stdout)");
  sim->add_option("--jobs", jobs, "max concurrent replicates");
  sim->add_option("--seed", seed_override, "override the config seed");
  sim->add_flag("--bounds", with_bounds, "append closed-form bound columns");

  auto* ana = app.add_subcommand("analyze", "emit a bound report as JSON");
  ana->add_option("--config", config_path, "JSON config path")->required();
  ana->add_option("--out", out_path, "output JSON path ('-' for stdout)");
  ana->add_flag("--quadratic-exact", quadratic_exact,
                "emit the exact quadratic spectrum/variance report");

  auto* cert = app.add_subcommand("certify", "check the rate matrix inequality");
  cert->add_option("--config", config_path, "JSON config path")->required();
  cert->add_option("--out", out_path, "output JSON path ('-' for stdout)");
  cert->add_option("--alpha", alpha_flag, "stepsize to certify");
  cert->add_option("--rho", rho_flag, "rate to certify (default 1 - sqrt(alpha mu))");
  cert->add_option("--beta", beta_flag, "momentum (default the standard value)");
  cert->add_flag("--auto", auto_grid, "certify 20 log-spaced stepsizes in range");
  cert->add_flag("--oracle", oracle, "cross-check the slack with the Jacobi oracle");

  auto* trade = app.add_subcommand("tradeoff", "closed-form stepsize trade-off");
  trade->add_option("--config", config_path, "JSON config path")->required();
  trade->add_option("--out", out_path, "output JSON path ('-' for stdout)");
  trade->add_option("--delta", delta, "rate slack in [0, 1/rho*-1]")->required();

  auto* spec = app.add_subcommand("spectrum", "emit eigenvalues as CSV");
  spec->add_option("--config", config_path, "JSON config path")->required();
  spec->add_option("--out", out_path, "output CSV path ('-' for stdout)");
  spec->add_flag("--aq", aq, "spectrum of the quadratic iteration matrix");
  spec->add_option("--alpha", alpha_flag, "stepsize for --aq (default config alpha)");

  auto* self = app.add_subcommand("selftest", "run the oracle cross-check suite");
  (void)self;

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate(config_path, out_path, jobs, seed_override, with_bounds);
    if (ana->parsed()) return cmd_analyze(config_path, out_path, quadratic_exact);
    if (cert->parsed())
      return cmd_certify(config_path, out_path, alpha_flag, rho_flag, beta_flag,
                         auto_grid, oracle);
    if (trade->parsed()) return cmd_tradeoff(config_path, out_path, delta);
    if (spec->parsed()) return cmd_spectrum(config_path, out_path, aq, alpha_flag);
    if (self->parsed()) return cmd_selftest();
  } catch (const dstoch::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const dstoch::Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

namespace {

int cmd_selftest() {
  using namespace dstoch;
  int failures = 0;
  const auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    Matrix a(2, 2);
    a << 2.0, 1.0, 1.0, 2.0;
    const auto eig = oracles::jacobi_eigenvalues(a);
    report("jacobi 2x2 analytic", std::abs(eig.eigenvalues(0) - 3.0) < 1e-12 &&
                                      std::abs(eig.eigenvalues(1) - 1.0) < 1e-12);
  }
  {
    Matrix a(2, 2);
    a << 0.3, 0.0, 0.0, -0.9;
    report("power radius diag", std::abs(oracles::power_spectral_radius(a) - 0.9) < 1e-8);
  }
  {
    Matrix a(1, 1), q(1, 1);
    a << 0.5;
    q << 1.0;
    const auto lyap = oracles::lyapunov_iterate(a, q);
    report("lyapunov scalar 1/(1-a^2)", std::abs(lyap.trace - 4.0 / 3.0) < 1e-10);
  }
  {
    const auto suite = make_shared_quadratic_suite(3, 2, 1.0, 10.0, 7);
    const auto w = shift_mixing(build_mixing(Topology::ring(3)), 1.0);
    const double alpha = 0.5 * (1.0 + w.lambda_min) / (suite.lipschitz() + suite.mu());
    const auto spectrum = aq_spectrum(w, alpha, suite);
    const double rho = rho_dsg(alpha, suite.mu(), suite.lipschitz(), w.lambda_min);
    report("rho_dsg equals spectral radius",
           std::abs(spectrum.mu_list.cwiseAbs().maxCoeff() - rho) < 1e-10);

    const auto var = var_dsg_exact(spectrum, 1.0, suite.dim());
    Matrix a_q = kron_with_identity(w.w, suite.dim());
    for (int i = 0; i < 3; ++i)
      a_q.block(2 * i, 2 * i, 2, 2) -= alpha * suite.quad(i).q;
    const auto lyap = oracles::lyapunov_iterate(
        a_q, alpha * alpha / 2.0 * Matrix::Identity(6, 6), 1e-13);
    report("var_dsg_exact vs lyapunov",
           std::abs(var.limit_variance - lyap.trace) < 1e-8 * lyap.trace);

    bool feasible = true;
    const double hi = std::min(w.lambda_min / suite.lipschitz(),
                               1.0 / (suite.lipschitz() + suite.mu()));
    for (int i = 1; i <= 10; ++i) {
      const double a = hi * i / 10.0;
      feasible = feasible &&
                 mi_check(a, nesterov_momentum(a, suite.mu()), 1.0 - std::sqrt(a * suite.mu()),
                          s_alpha(a, suite.mu()), suite.mu(), suite.lipschitz(),
                          w.lambda_min)
                     .feasible();
    }
    report("mi certificate grid", feasible);
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 2;
}

}  // namespace
