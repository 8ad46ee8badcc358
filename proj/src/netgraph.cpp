#include "dstoch/netgraph.hpp"

#include "dstoch/oracles.hpp"

#include <algorithm>
#include <set>

namespace dstoch {

namespace {

void require_nodes(int n) {
  if (n <= 0) throw EmptyGraph("topology needs at least one node");
}

}  // namespace

Topology Topology::complete(int n) {
  require_nodes(n);
  Topology t;
  t.kind = TopologyKind::Complete;
  t.node_count = n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.edges.emplace_back(i, j);
  return t;
}

Topology Topology::star(int n) {
  require_nodes(n);
  Topology t;
  t.kind = TopologyKind::Star;
  t.node_count = n;
  for (int j = 1; j < n; ++j) t.edges.emplace_back(0, j);
  return t;
}

Topology Topology::ring(int n) {
  require_nodes(n);
  Topology t;
  t.kind = TopologyKind::Ring;
  t.node_count = n;
  if (n == 2) {
    t.edges.emplace_back(0, 1);
  } else if (n > 2) {
    for (int i = 0; i < n; ++i) t.edges.emplace_back(std::min(i, (i + 1) % n),
                                                     std::max(i, (i + 1) % n));
    std::sort(t.edges.begin(), t.edges.end());
    t.edges.erase(std::unique(t.edges.begin(), t.edges.end()), t.edges.end());
  }
  return t;
}

Topology Topology::grid(int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw EmptyGraph("grid needs positive rows and cols");
  Topology t;
  t.kind = TopologyKind::Grid;
  t.node_count = rows * cols;
  t.rows = rows;
  t.cols = cols;
  const auto id = [cols](int r, int c) { return r * cols + c; };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) t.edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) t.edges.emplace_back(id(r, c), id(r + 1, c));
    }
  }
  return t;
}

Topology Topology::disconnected(int n) {
  require_nodes(n);
  Topology t;
  t.kind = TopologyKind::Disconnected;
  t.node_count = n;
  return t;
}

Topology Topology::custom(int n, std::vector<std::pair<int, int>> edges) {
  require_nodes(n);
  Topology t;
  t.kind = TopologyKind::Custom;
  t.node_count = n;
  std::set<std::pair<int, int>> dedup;
  for (auto [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw InvalidTopology("custom edge endpoint out of range");
    if (i == j) continue;  // self-loops are implicit
    dedup.insert({std::min(i, j), std::max(i, j)});
  }
  t.edges.assign(dedup.begin(), dedup.end());
  return t;
}

std::vector<int> Topology::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(node_count), 0);
  for (auto [i, j] : edges) {
    ++deg[static_cast<std::size_t>(i)];
    ++deg[static_cast<std::size_t>(j)];
  }
  return deg;
}

bool Topology::connected() const {
  if (node_count <= 1) return true;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(node_count));
  for (auto [i, j] : edges) {
    adj[static_cast<std::size_t>(i)].push_back(j);
    adj[static_cast<std::size_t>(j)].push_back(i);
  }
  std::vector<char> seen(static_cast<std::size_t>(node_count), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == node_count;
}

namespace {

// Computes spectrum and derived quantities, then enforces every invariant of
// a valid mixing matrix.
MixingMatrix finalize(Matrix w, const Topology& topology) {
  const int n = static_cast<int>(w.rows());
  MixingMatrix m;
  m.w = std::move(w);

  if ((m.w - m.w.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidMixingMatrix("mixing matrix is not symmetric");
  const Vector ones = Vector::Ones(n);
  if ((m.w * ones - ones).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidMixingMatrix("mixing matrix rows must sum to 1");
  if ((m.w.transpose() * ones - ones).cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidMixingMatrix("mixing matrix columns must sum to 1");

  // support pattern: positive exactly on edges and the diagonal
  Matrix adjacency = Matrix::Zero(n, n);
  for (auto [i, j] : topology.edges) adjacency(i, j) = adjacency(j, i) = 1.0;
  for (int i = 0; i < n; ++i) {
    if (m.w(i, i) <= 0.0)
      throw InvalidMixingMatrix("diagonal weight must be positive");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool edge = adjacency(i, j) > 0.0;
      if (edge && m.w(i, j) <= 0.0)
        throw InvalidMixingMatrix("edge weight must be positive");
      if (!edge && m.w(i, j) != 0.0)
        throw InvalidMixingMatrix("nonzero weight without an edge");
    }
  }

  const auto eig = oracles::jacobi_eigenvalues(m.w, 1e-12, 100);
  m.spectrum = eig.eigenvalues;
  if (std::abs(m.spectrum(0) - 1.0) > 1e-10)
    throw InvalidMixingMatrix("largest eigenvalue must be 1");
  m.lambda_min = m.spectrum(n - 1);
  if (m.lambda_min <= -1.0 + 1e-12)
    throw InvalidMixingMatrix(
        "smallest eigenvalue is -1 (bipartite-like weights); apply shift_mixing first");
  m.gamma = n > 1 ? std::max(std::abs(m.spectrum(1)), std::abs(m.lambda_min)) : 0.0;
  m.spectral_gap = 1.0 - m.gamma;
  return m;
}

}  // namespace

MixingMatrix build_mixing(const Topology& topology, WeightRule rule) {
  require_nodes(topology.node_count);
  if (topology.kind == TopologyKind::Grid &&
      topology.rows * topology.cols != topology.node_count)
    throw InvalidTopology("grid rows*cols must equal node count");

  const int n = topology.node_count;
  const auto deg = topology.degrees();
  Matrix w = Matrix::Zero(n, n);

  switch (rule) {
    case WeightRule::Metropolis:
      for (auto [i, j] : topology.edges) {
        const double wij = 1.0 / (1.0 + std::max(deg[static_cast<std::size_t>(i)],
                                                 deg[static_cast<std::size_t>(j)]));
        w(i, j) = w(j, i) = wij;
      }
      break;
    case WeightRule::EqualNeighbor: {
      for (int i = 1; i < n; ++i)
        if (deg[static_cast<std::size_t>(i)] != deg[0])
          throw NonRegularGraph("equal-neighbor rule needs a regular graph");
      const double wij = 1.0 / (deg[0] + 1.0);
      for (auto [i, j] : topology.edges) w(i, j) = w(j, i) = wij;
      break;
    }
  }
  for (int i = 0; i < n; ++i) w(i, i) = 1.0 - w.row(i).sum();
  return finalize(std::move(w), topology);
}

MixingMatrix shift_mixing(const MixingMatrix& w, double tau) {
  if (tau <= 0.0) throw NonpositiveTau("shift requires tau > 0");
  const int n = w.size();
  MixingMatrix m;
  m.w = (tau / (tau + 1.0)) * Matrix::Identity(n, n) + (1.0 / (tau + 1.0)) * w.w;
  m.spectrum = (w.spectrum.array() + tau) / (tau + 1.0);
  m.lambda_min = m.spectrum(n - 1);
  m.gamma = n > 1 ? std::max(std::abs(m.spectrum(1)), std::abs(m.lambda_min)) : 0.0;
  m.spectral_gap = 1.0 - m.gamma;
  return m;
}

// Boundary handling: eigenvalues within 1e-12 of zero count as not positive,
// matching the spectrum tolerance used at construction.
bool assumption3_holds(const MixingMatrix& w) { return w.lambda_min > 1e-12; }

}  // namespace dstoch
