#include "dstoch/algorithms.hpp"

#include "dstoch/parallel.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace dstoch {

namespace {

constexpr double kDivergenceThreshold = 1e100;

void check_state(const RunState& state, const MixingMatrix& w,
                 const ObjectiveSuite& suite) {
  const long nd = static_cast<long>(w.size()) * suite.dim();
  if (state.x_curr.size() != nd || state.x_prev.size() != nd)
    throw DimensionMismatch("run state dimension does not match N*d");
  if (w.size() != suite.nodes())
    throw DimensionMismatch("mixing matrix and suite disagree on node count");
}

// Shared workspace so the hot loop does not reallocate per step.
struct Stepper {
  Stepper(const MixingMatrix& w, const ObjectiveSuite& suite, const NoiseSpec& noise,
          NoiseStream stream)
      : w_(w), suite_(suite), noise_(noise), stream_(stream),
        n_(w.size()), d_(suite.dim()),
        y_(static_cast<long>(n_) * d_), grads_(static_cast<long>(n_) * d_),
        next_(static_cast<long>(n_) * d_) {}

  void dsg(RunState& s, double alpha) { advance(s, s.x_curr, alpha); }

  void dasg(RunState& s, double alpha, double beta) {
    y_ = (1.0 + beta) * s.x_curr - beta * s.x_prev;
    advance(s, y_, alpha);
  }

 private:
  void advance(RunState& s, const Vector& at, double alpha) {
    for (int i = 0; i < n_; ++i)
      sample_gradient_into(noise_, suite_, i, at.segment(static_cast<long>(i) * d_, d_),
                           {stream_.seed, stream_.replicate, static_cast<std::uint64_t>(s.k)},
                           grads_.segment(static_cast<long>(i) * d_, d_));
    // (W (x) I_d) at == At * W with At laid out d-by-N column-per-node
    Eigen::Map<const Matrix> at_mat(at.data(), d_, n_);
    Eigen::Map<Matrix> next_mat(next_.data(), d_, n_);
    next_mat.noalias() = at_mat * w_.w;
    next_ -= alpha * grads_;
    s.x_prev.swap(s.x_curr);
    s.x_curr.swap(next_);
    ++s.k;
  }

  const MixingMatrix& w_;
  const ObjectiveSuite& suite_;
  const NoiseSpec& noise_;
  NoiseStream stream_;
  int n_, d_;
  Vector y_, grads_, next_;
};

struct Metrics {
  double dist2_opt = 0.0;
  double dist2_fixed = 0.0;
  double avg_dist2_opt = 0.0;
  double consensus = 0.0;
};

Metrics compute_metrics(const Vector& x, const ObjectiveSuite& suite,
                        const Vector* x_inf) {
  const int n = static_cast<int>(x.size()) / suite.dim();
  const int d = suite.dim();
  Metrics m;
  Vector bar = Vector::Zero(d);
  for (int i = 0; i < n; ++i) bar += x.segment(static_cast<long>(i) * d, d);
  bar /= static_cast<double>(n);
  const Vector& opt = suite.x_star();
  for (int i = 0; i < n; ++i) {
    const auto xi = x.segment(static_cast<long>(i) * d, d);
    m.dist2_opt += (xi - opt).squaredNorm();
    m.consensus += (xi - bar).squaredNorm();
  }
  m.avg_dist2_opt = (bar - opt).squaredNorm();
  m.dist2_fixed = x_inf ? (x - *x_inf).squaredNorm()
                        : std::numeric_limits<double>::quiet_NaN();
  return m;
}

bool diverged(const Metrics& m) {
  return !(m.dist2_opt < kDivergenceThreshold) || !std::isfinite(m.consensus);
}

struct ReplicateRecord {
  std::vector<double> dist2_opt, dist2_fixed, avg_dist2_opt, consensus;
};

// Drives one replicate over an arbitrary per-iteration action and records at
// the requested strides; on divergence the remaining records are inf.
template <typename StepFn>
ReplicateRecord run_replicate(const std::vector<long>& ks, long total_iters,
                              const ObjectiveSuite& suite, const Vector& x0,
                              const Vector* x_inf, StepFn&& step) {
  ReplicateRecord rec;
  const std::size_t n_rec = ks.size();
  rec.dist2_opt.resize(n_rec);
  rec.dist2_fixed.resize(n_rec);
  rec.avg_dist2_opt.resize(n_rec);
  rec.consensus.resize(n_rec);

  RunState state{x0, x0, 0};
  std::size_t slot = 0;
  bool dead = false;
  for (long k = 0; k <= total_iters; ++k) {
    if (slot < n_rec && ks[slot] == k) {
      if (!dead) {
        const Metrics m = compute_metrics(state.x_curr, suite, x_inf);
        if (diverged(m)) dead = true;
        rec.dist2_opt[slot] = dead ? INFINITY : m.dist2_opt;
        rec.dist2_fixed[slot] = dead ? INFINITY : m.dist2_fixed;
        rec.avg_dist2_opt[slot] = dead ? INFINITY : m.avg_dist2_opt;
        rec.consensus[slot] = dead ? INFINITY : m.consensus;
      } else {
        rec.dist2_opt[slot] = rec.dist2_fixed[slot] = INFINITY;
        rec.avg_dist2_opt[slot] = rec.consensus[slot] = INFINITY;
      }
      ++slot;
    }
    if (k == total_iters || dead) {
      if (dead) {
        for (; slot < n_rec; ++slot) {
          rec.dist2_opt[slot] = rec.dist2_fixed[slot] = INFINITY;
          rec.avg_dist2_opt[slot] = rec.consensus[slot] = INFINITY;
        }
        break;
      }
      continue;
    }
    step(state, k);
  }
  return rec;
}

std::vector<long> recorded_iterations(long total_iters, long stride) {
  std::vector<long> ks;
  if (stride < 1) stride = 1;
  for (long k = 0; k <= total_iters; ++k)
    if (k == 0 || k == total_iters || k % stride == 0) ks.push_back(k);
  return ks;
}

Trace reduce(const std::vector<long>& ks, const std::vector<ReplicateRecord>& recs,
             bool has_fixed_point) {
  Trace t;
  t.ks = ks;
  t.replicates = static_cast<int>(recs.size());
  t.has_fixed_point = has_fixed_point;
  const std::size_t n = ks.size();
  const double r = static_cast<double>(recs.size());
  t.dist2_opt.assign(n, 0.0);
  t.dist2_fixed.assign(n, 0.0);
  t.avg_dist2_opt.assign(n, 0.0);
  t.consensus_err.assign(n, 0.0);
  t.se_dist2_opt.assign(n, 0.0);
  t.se_dist2_fixed.assign(n, 0.0);
  for (const auto& rec : recs) {
    for (std::size_t s = 0; s < n; ++s) {
      t.dist2_opt[s] += rec.dist2_opt[s];
      t.dist2_fixed[s] += rec.dist2_fixed[s];
      t.avg_dist2_opt[s] += rec.avg_dist2_opt[s];
      t.consensus_err[s] += rec.consensus[s];
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    t.dist2_opt[s] /= r;
    t.dist2_fixed[s] /= r;
    t.avg_dist2_opt[s] /= r;
    t.consensus_err[s] /= r;
  }
  if (recs.size() > 1) {
    for (const auto& rec : recs) {
      for (std::size_t s = 0; s < n; ++s) {
        const double d1 = rec.dist2_opt[s] - t.dist2_opt[s];
        const double d2 = rec.dist2_fixed[s] - t.dist2_fixed[s];
        t.se_dist2_opt[s] += d1 * d1;
        t.se_dist2_fixed[s] += d2 * d2;
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      t.se_dist2_opt[s] = std::sqrt(t.se_dist2_opt[s] / (r - 1.0) / r);
      t.se_dist2_fixed[s] = std::sqrt(t.se_dist2_fixed[s] / (r - 1.0) / r);
    }
  }
  return t;
}

}  // namespace

double RunConfig::resolved_beta(double mu) const {
  if (method == Method::Dsg) return 0.0;
  if (beta) return *beta;
  return nesterov_momentum(alpha, mu);
}

void RunConfig::warn_if_alpha_out_of_range(const MixingMatrix& w,
                                           const ObjectiveSuite& suite) const {
  const double limit = method == Method::Dsg
                           ? (1.0 + w.lambda_min) / suite.lipschitz()
                           : w.lambda_min / suite.lipschitz();
  if (alpha <= 0.0 || alpha > limit)
    std::cerr << "warning: alpha=" << alpha << " outside the certified range (0, "
              << limit << "] for this method; running anyway\n";
}

long MasgSchedule::total_iterations() const {
  long total = 0;
  for (const auto& s : stages) total += s.length;
  return total;
}

double kappa_tilde(const ObjectiveSuite& suite, const MixingMatrix& w) {
  if (!assumption3_holds(w))
    throw Assumption3Violated(
        "kappa_tilde needs lambda_N > 0; apply shift_mixing to the weight matrix");
  return (suite.kappa() + 1.0) / w.lambda_min;
}

MasgSchedule build_masg_schedule(long k1, double p, const ObjectiveSuite& suite,
                                 const MixingMatrix& w, int num_stages) {
  if (!assumption3_holds(w))
    throw Assumption3Violated(
        "build_masg_schedule needs lambda_N > 0; apply shift_mixing first");
  if (k1 < 1) throw ParameterOutOfRange("stage 1 length must be >= 1");
  if (num_stages < 1) throw ParameterOutOfRange("need at least one stage");
  if (p < 7.0)
    std::cerr << "warning: p=" << p << " < 7 is outside the certified schedule regime\n";

  const double kt = kappa_tilde(suite, w);
  const double lm = w.lambda_min;
  const double l_plus_mu = suite.lipschitz() + suite.mu();
  const long base = static_cast<long>(std::ceil(p * std::sqrt(kt) * std::log(2.0)));

  MasgSchedule schedule;
  schedule.stages.reserve(static_cast<std::size_t>(num_stages));
  for (int t = 1; t <= num_stages; ++t) {
    MasgStage stage;
    if (t == 1) {
      stage.length = k1;
      stage.alpha = lm / l_plus_mu;
    } else {
      stage.length = base << t;  // 2^t * ceil(p sqrt(kt) log 2)
      stage.alpha = lm / (std::pow(2.0, 2 * t) * l_plus_mu);
    }
    stage.beta = nesterov_momentum(stage.alpha, suite.mu());
    schedule.stages.push_back(stage);
  }
  return schedule;
}

long masg_k1_balanced(double p, double kappa_tilde_value) {
  if (p <= 2.0 || kappa_tilde_value <= 0.0)
    throw ParameterOutOfRange("masg_k1_balanced needs p > 2 and kappa_tilde > 0");
  return static_cast<long>(std::ceil(
      (p - 2.0) * std::log(6.0 * p * kappa_tilde_value) * std::sqrt(kappa_tilde_value)));
}

void dsg_step(RunState& state, const MixingMatrix& w, const ObjectiveSuite& suite,
              const NoiseSpec& noise, double alpha, const NoiseStream& stream) {
  check_state(state, w, suite);
  Stepper(w, suite, noise, stream).dsg(state, alpha);
}

void dasg_step(RunState& state, const MixingMatrix& w, const ObjectiveSuite& suite,
               const NoiseSpec& noise, double alpha, double beta,
               const NoiseStream& stream) {
  check_state(state, w, suite);
  Stepper(w, suite, noise, stream).dasg(state, alpha, beta);
}

Trace run(const RunConfig& config, const RunContext& ctx, const Vector& x0,
          const Vector* x_inf) {
  const long nd = static_cast<long>(ctx.w.size()) * ctx.suite.dim();
  if (x0.size() != nd) throw DimensionMismatch("x0 must have length N*d");
  if (config.replicates < 1) throw ParameterOutOfRange("need >= 1 replicate");
  config.warn_if_alpha_out_of_range(ctx.w, ctx.suite);

  const double beta = config.resolved_beta(ctx.suite.mu());
  const auto ks = recorded_iterations(config.iters, config.record_every);
  std::vector<ReplicateRecord> recs(static_cast<std::size_t>(config.replicates));
  parallel_for(config.replicates, ctx.jobs, [&](int r) {
    Stepper stepper(ctx.w, ctx.suite, ctx.noise,
                    {ctx.seed, static_cast<std::uint64_t>(r)});
    recs[static_cast<std::size_t>(r)] = run_replicate(
        ks, config.iters, ctx.suite, x0, x_inf, [&](RunState& s, long) {
          if (config.method == RunConfig::Method::Dsg)
            stepper.dsg(s, config.alpha);
          else
            stepper.dasg(s, config.alpha, beta);
        });
  });
  return reduce(ks, recs, x_inf != nullptr);
}

Trace masg_run(const MasgSchedule& schedule, const RunContext& ctx, const Vector& x0,
               int replicates, long record_every) {
  const long nd = static_cast<long>(ctx.w.size()) * ctx.suite.dim();
  if (x0.size() != nd) throw DimensionMismatch("x0 must have length N*d");
  if (replicates < 1) throw ParameterOutOfRange("need >= 1 replicate");
  if (schedule.stages.empty()) throw ParameterOutOfRange("schedule has no stages");

  // stage lookup per global iteration
  const long total = schedule.total_iterations();
  const auto ks = recorded_iterations(total, record_every);

  std::vector<ReplicateRecord> recs(static_cast<std::size_t>(replicates));
  parallel_for(replicates, ctx.jobs, [&](int r) {
    Stepper stepper(ctx.w, ctx.suite, ctx.noise,
                    {ctx.seed, static_cast<std::uint64_t>(r)});
    std::size_t stage_idx = 0;
    long stage_start = 0;
    recs[static_cast<std::size_t>(r)] = run_replicate(
        ks, total, ctx.suite, x0, nullptr, [&](RunState& s, long k) {
          while (k >= stage_start + schedule.stages[stage_idx].length) {
            stage_start += schedule.stages[stage_idx].length;
            ++stage_idx;
          }
          if (k == stage_start) s.x_prev = s.x_curr;  // momentum restart
          const auto& st = schedule.stages[stage_idx];
          stepper.dasg(s, st.alpha, st.beta);
        });
  });
  return reduce(ks, recs, false);
}

}  // namespace dstoch
