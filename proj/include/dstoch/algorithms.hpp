#pragma once

#include "dstoch/netgraph.hpp"
#include "dstoch/noise.hpp"
#include "dstoch/objectives.hpp"
#include "dstoch/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dstoch {

// beta = (1 - sqrt(alpha mu)) / (1 + sqrt(alpha mu))
inline double nesterov_momentum(double alpha, double mu) {
  const double s = std::sqrt(alpha * mu);
  return (1.0 - s) / (1.0 + s);
}

struct RunConfig {
  enum class Method { Dsg, Dasg };
  Method method = Method::Dsg;
  double alpha = 0.1;
  std::optional<double> beta;  // dasg defaults to nesterov_momentum(alpha, mu)
  long iters = 1000;
  int replicates = 1;
  long record_every = 1;

  double resolved_beta(double mu) const;
  // Warns (stderr) when alpha exceeds the admissible range of the method;
  // exploration runs are allowed, so this never throws.
  void warn_if_alpha_out_of_range(const MixingMatrix& w, const ObjectiveSuite& suite) const;
};

struct MasgStage {
  long length = 0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct MasgSchedule {
  std::vector<MasgStage> stages;
  long total_iterations() const;
};

double kappa_tilde(const ObjectiveSuite& suite, const MixingMatrix& w);

// Canonical geometric schedule: stage 1 runs k1 iterations at
// alpha_1 = lambda_N/(L+mu); stage t >= 2 runs 2^t ceil(p sqrt(kt) log 2)
// iterations at alpha_t = lambda_N / (2^(2t) (L+mu)), kt the scaled condition
// number. Momentum is always the standard value for the stage stepsize.
MasgSchedule build_masg_schedule(long k1, double p, const ObjectiveSuite& suite,
                                 const MixingMatrix& w, int num_stages);

// k1 = ceil((p-2) log(6 p kt) sqrt(kt)), the choice that balances the decay
// of all three error terms.
long masg_k1_balanced(double p, double kappa_tilde_value);

struct RunState {
  Vector x_curr;
  Vector x_prev;
  long k = 0;
};

struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint64_t replicate = 0;
};

// One mixing + noisy-gradient step: x_i <- sum_j W_ij x_j - alpha g_i(x_i).
void dsg_step(RunState& state, const MixingMatrix& w, const ObjectiveSuite& suite,
              const NoiseSpec& noise, double alpha, const NoiseStream& stream);

// Momentum variant: extrapolate y = (1+beta) x - beta x_prev, then step at y.
void dasg_step(RunState& state, const MixingMatrix& w, const ObjectiveSuite& suite,
               const NoiseSpec& noise, double alpha, double beta,
               const NoiseStream& stream);

// Per-iteration metrics, replicate-averaged. dist2_fixed tracks the distance
// to a supplied fixed point and is NaN-filled when no fixed point applies
// (multistage schedules change it per stage). Standard errors are across
// replicates.
struct Trace {
  std::vector<long> ks;
  std::vector<double> dist2_opt;
  std::vector<double> dist2_fixed;
  std::vector<double> avg_dist2_opt;
  std::vector<double> consensus_err;
  std::vector<double> se_dist2_opt;
  std::vector<double> se_dist2_fixed;
  bool has_fixed_point = false;
  int replicates = 0;
};

struct RunContext {
  const MixingMatrix& w;
  const ObjectiveSuite& suite;
  NoiseSpec noise;
  std::uint64_t seed = 0;
  int jobs = 1;
};

Trace run(const RunConfig& config, const RunContext& ctx, const Vector& x0,
          const Vector* x_inf = nullptr);

Trace masg_run(const MasgSchedule& schedule, const RunContext& ctx, const Vector& x0,
               int replicates = 1, long record_every = 1);

}  // namespace dstoch
