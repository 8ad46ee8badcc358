#include "dstoch/sweep.hpp"

#include "dstoch/quadratic_exact.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <ostream>

namespace dstoch {

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Per-k upper bounds on E||x-x_inf||^2 and E||x-x*||^2 for one sweep point;
// entries are NaN wherever no closed form applies at this stepsize.
struct BoundColumns {
  std::vector<double> fixed, opt;
};

BoundColumns bound_columns(const ExperimentConfig& cfg, const MixingMatrix& w,
                           const ObjectiveSuite& suite, double alpha,
                           const NoiseSpec& noise, const std::vector<long>& ks,
                           const MasgSchedule* schedule) {
  BoundColumns cols;
  cols.fixed.assign(ks.size(), std::numeric_limits<double>::quiet_NaN());
  cols.opt.assign(ks.size(), std::numeric_limits<double>::quiet_NaN());
  const Vector x0 = Vector::Zero(static_cast<long>(w.size()) * suite.dim());
  const double sigma = std::sqrt(
      estimate_noise_sigma_sq(noise, suite, suite.x_star(), 1000, cfg.seed ^ 0x5157ULL));
  try {
    if (cfg.method == MethodKind::Dmasg) {
      BoundInputs in = make_bound_inputs(w, suite, sigma, x0, schedule->stages[0].alpha);
      const auto rep = masg_bound(*schedule, cfg.masg.p, in, ks);
      for (std::size_t s = 0; s < ks.size(); ++s) {
        for (std::size_t q = 0; q < rep.per_k.ks.size(); ++q)
          if (rep.per_k.ks[q] == ks[s]) cols.opt[s] = rep.per_k.total[q];
      }
      return cols;
    }
    BoundInputs in = make_bound_inputs(w, suite, sigma, x0, alpha);
    const BoundReport rep = cfg.method == MethodKind::Dsg ? dsg_bound(ks, alpha, in)
                                                          : dasg_bound(ks, alpha, in);
    for (std::size_t s = 0; s < ks.size(); ++s) {
      cols.fixed[s] = rep.to_fixed_point.total[s];
      if (!rep.to_optimum.empty()) cols.opt[s] = rep.to_optimum.total[s];
    }
  } catch (const Error& e) {
    std::cerr << "warning: bound columns unavailable for alpha=" << alpha << ": "
              << e.what() << "\n";
  }
  return cols;
}

}  // namespace

ResultTable run_sweep(const ExperimentConfig& cfg, int jobs, bool with_bounds) {
  const ObjectiveSuite suite = cfg.objective.build();

  ResultTable table;
  table.with_bounds = with_bounds;
  int sweep_id = 0;
  for (const auto& topo_spec : cfg.sweep_topologies) {
    MixingMatrix w = build_mixing(topo_spec.build(), cfg.weight_rule);
    if (cfg.shift_tau) w = shift_mixing(w, *cfg.shift_tau);
    const Vector x0 = Vector::Zero(static_cast<long>(w.size()) * suite.dim());

    for (double alpha : cfg.sweep_alphas) {
      for (double batch : cfg.sweep_batches) {
        NoiseSpec noise = cfg.noise;
        if (noise.kind == NoiseKind::Minibatch) noise.batch = batch;
        const RunContext ctx{w, suite, noise, cfg.seed, jobs};

        Trace trace;
        MasgSchedule schedule;
        std::string method_name;
        double beta = 0.0;
        if (cfg.method == MethodKind::Dmasg) {
          method_name = "dmasg";
          const long k1 = cfg.masg.k1 ? *cfg.masg.k1
                                      : masg_k1_balanced(cfg.masg.p, kappa_tilde(suite, w));
          schedule = build_masg_schedule(k1, cfg.masg.p, suite, w, cfg.masg.stages);
          trace = masg_run(schedule, ctx, x0, cfg.replicates, cfg.record_every);
        } else {
          RunConfig rc;
          rc.method = cfg.method == MethodKind::Dsg ? RunConfig::Method::Dsg
                                                    : RunConfig::Method::Dasg;
          rc.alpha = alpha;
          rc.beta = cfg.beta;
          rc.iters = cfg.iters;
          rc.replicates = cfg.replicates;
          rc.record_every = cfg.record_every;
          method_name = cfg.method == MethodKind::Dsg ? "dsg" : "dasg";
          beta = rc.resolved_beta(suite.mu());

          Vector x_inf;
          bool have_inf = false;
          if (cfg.track_fixed_point) {
            try {
              x_inf = fixed_point(w, alpha, suite);
              have_inf = true;
            } catch (const Error& e) {
              std::cerr << "warning: fixed point unavailable for alpha=" << alpha
                        << ": " << e.what() << "\n";
            }
          }
          trace = run(rc, ctx, x0, have_inf ? &x_inf : nullptr);
        }

        BoundColumns bounds;
        if (with_bounds)
          bounds = bound_columns(cfg, w, suite, alpha, noise, trace.ks,
                                 cfg.method == MethodKind::Dmasg ? &schedule : nullptr);

        table.points.push_back({sweep_id, topo_spec.kind, alpha, batch});
        for (std::size_t s = 0; s < trace.ks.size(); ++s) {
          ResultRow row;
          row.sweep_id = sweep_id;
          row.method = method_name;
          if (cfg.method == MethodKind::Dmasg) {
            // report the stage parameters in effect at iteration k
            long boundary = 0;
            for (const auto& st : schedule.stages) {
              boundary += st.length;
              row.alpha = st.alpha;
              row.beta = st.beta;
              if (trace.ks[s] <= boundary) break;
            }
          } else {
            row.alpha = alpha;
            row.beta = beta;
          }
          row.k = trace.ks[s];
          row.dist2_opt = trace.dist2_opt[s];
          row.dist2_fixed = trace.dist2_fixed[s];
          row.avg_dist2_opt = trace.avg_dist2_opt[s];
          row.consensus_err = trace.consensus_err[s];
          if (with_bounds) {
            row.bound_dist2_fixed = bounds.fixed[s];
            row.bound_dist2_opt = bounds.opt[s];
          }
          table.rows.push_back(std::move(row));
        }
        ++sweep_id;
      }
    }
  }
  return table;
}

void write_csv(const ResultTable& table, std::ostream& os) {
  os << "sweep_id,method,alpha,beta,k,dist2_opt,dist2_fixed,avg_dist2_opt,consensus_err";
  if (table.with_bounds) os << ",bound_dist2_fixed,bound_dist2_opt";
  os << "\n";
  for (const auto& r : table.rows) {
    os << r.sweep_id << ',' << r.method << ',' << format_double(r.alpha) << ','
       << format_double(r.beta) << ',' << r.k << ',' << format_double(r.dist2_opt)
       << ',' << format_double(r.dist2_fixed) << ',' << format_double(r.avg_dist2_opt)
       << ',' << format_double(r.consensus_err);
    if (table.with_bounds)
      os << ',' << format_double(r.bound_dist2_fixed) << ','
         << format_double(r.bound_dist2_opt);
    os << "\n";
  }
}

void write_spectrum_csv(const Vector& eigenvalues, std::ostream& os) {
  os << "index,eigenvalue\n";
  for (int i = 0; i < eigenvalues.size(); ++i)
    os << i << ',' << format_double(eigenvalues(i)) << "\n";
}

}  // namespace dstoch
