#pragma once

#include "dstoch/types.hpp"

#include <utility>
#include <vector>

namespace dstoch {

enum class TopologyKind { Complete, Star, Ring, Grid, Disconnected, Custom };

// Undirected communication graph. Edges are stored once with i < j and never
// include self-loops; every node is implicitly its own neighbor.
struct Topology {
  TopologyKind kind = TopologyKind::Custom;
  int node_count = 0;
  int rows = 0, cols = 0;  // grid only
  std::vector<std::pair<int, int>> edges;

  static Topology complete(int n);
  static Topology star(int n);  // node 0 is the hub
  static Topology ring(int n);
  static Topology grid(int rows, int cols);  // 4-neighbor adjacency
  static Topology disconnected(int n);
  static Topology custom(int n, std::vector<std::pair<int, int>> edges);

  std::vector<int> degrees() const;
  bool connected() const;
};

enum class WeightRule { Metropolis, EqualNeighbor };

// Symmetric doubly stochastic gossip matrix together with its full spectrum.
// Immutable after construction; safe to share across threads.
struct MixingMatrix {
  Matrix w;
  Vector spectrum;      // descending, spectrum(0) == 1
  double gamma = 0.0;   // max(|lambda_2|, |lambda_N|)
  double lambda_min = 0.0;
  double spectral_gap = 0.0;

  int size() const { return static_cast<int>(w.rows()); }
};

MixingMatrix build_mixing(const Topology& topology,
                          WeightRule rule = WeightRule::Metropolis);

// W_tau = tau/(tau+1) I + 1/(tau+1) W; maps each eigenvalue to
// (tau + lambda)/(tau + 1), pulling the spectrum toward 1.
MixingMatrix shift_mixing(const MixingMatrix& w, double tau);

// True iff all eigenvalues of W are strictly positive.
bool assumption3_holds(const MixingMatrix& w);

}  // namespace dstoch
