#pragma once

#include "dstoch/analysis.hpp"
#include "dstoch/config.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dstoch {

struct ResultRow {
  int sweep_id = 0;
  std::string method;
  double alpha = 0.0;
  double beta = 0.0;
  long k = 0;
  double dist2_opt = 0.0;
  double dist2_fixed = 0.0;
  double avg_dist2_opt = 0.0;
  double consensus_err = 0.0;
  // populated only when bounds are requested
  double bound_dist2_fixed = 0.0;
  double bound_dist2_opt = 0.0;
};

struct SweepPointInfo {
  int sweep_id = 0;
  std::string topology;
  double alpha = 0.0;
  double batch = 1.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
  std::vector<SweepPointInfo> points;
  bool with_bounds = false;
};

// Executes the cartesian sweep (topologies x alphas x batches); each point is
// replicate-averaged. A diverging point records inf and does not abort the
// rest of the sweep.
ResultTable run_sweep(const ExperimentConfig& cfg, int jobs = 1,
                      bool with_bounds = false);

// Header: sweep_id,method,alpha,beta,k,dist2_opt,dist2_fixed,avg_dist2_opt,
// consensus_err (plus two bound columns when requested). Full-precision
// floats; non-finite values print as inf/nan.
void write_csv(const ResultTable& table, std::ostream& os);

void write_spectrum_csv(const Vector& eigenvalues, std::ostream& os);

}  // namespace dstoch
