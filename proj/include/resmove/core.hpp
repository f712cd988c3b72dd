#pragma once

// Core value types for the resource movement simulator: node-indexed resource
// placements, running demand tallies, and the single-resource moves that
// transform one placement into another. Nodes are dense ids 0..n-1.

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace resmove {

// Thrown when an internal invariant breaks (e.g. the restore loop fails to
// make progress). Distinct from invalid_argument, which callers can provoke.
class internal_error : public std::logic_error {
 public:
  explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

// A feasible placement of resources: counts[v] >= 0, sum(counts) == k.
struct Configuration {
  std::vector<int> counts;

  int nodes() const { return static_cast<int>(counts.size()); }

  long long total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
  }

  bool operator==(const Configuration&) const = default;
};

inline void validate_configuration(const Configuration& c, int n, long long k) {
  if (c.nodes() != n)
    throw std::invalid_argument("configuration has " + std::to_string(c.nodes()) +
                                " nodes, expected " + std::to_string(n));
  for (int v = 0; v < n; ++v)
    if (c.counts[v] < 0)
      throw std::invalid_argument("negative resource count at node " + std::to_string(v));
  if (c.total() != k)
    throw std::invalid_argument("configuration holds " + std::to_string(c.total()) +
                                " resources, expected " + std::to_string(k));
}

// Demands seen so far, one per arrival; total() equals the current time t.
struct DemandState {
  std::vector<long long> counts;

  explicit DemandState(int n = 0) : counts(static_cast<size_t>(n), 0) {}

  int nodes() const { return static_cast<int>(counts.size()); }

  long long total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
  }
};

inline void apply_demand(DemandState& d, int node) {
  if (node < 0 || node >= d.nodes())
    throw std::invalid_argument("demand at node " + std::to_string(node) +
                                " outside [0, " + std::to_string(d.nodes()) + ")");
  ++d.counts[node];
}

// One executed move: the index-th move overall (1-based), taken while serving
// demand `time`, relocating a single resource src -> dst. `improvement` is the
// drop in total service cost the move achieved at that instant.
struct MovementRecord {
  int index = 0;
  long long time = 0;
  int src = 0;
  int dst = 0;
  double improvement = 0.0;
};

inline void apply_move(Configuration& c, int src, int dst) {
  int n = c.nodes();
  if (src < 0 || src >= n || dst < 0 || dst >= n)
    throw std::invalid_argument("move endpoints outside [0, " + std::to_string(n) + ")");
  if (src == dst) throw std::invalid_argument("move with src == dst");
  if (c.counts[src] <= 0)
    throw std::invalid_argument("move from empty node " + std::to_string(src));
  --c.counts[src];
  ++c.counts[dst];
}

// Number of single-resource moves needed to turn `a` into `b`:
// sum_v max(0, a_v - b_v), which equals half the L1 distance when both
// placements hold the same number of resources.
inline long long chi_distance(const Configuration& a, const Configuration& b) {
  if (a.nodes() != b.nodes())
    throw std::invalid_argument("chi_distance: dimension mismatch");
  long long surplus = 0;
  for (int v = 0; v < a.nodes(); ++v) {
    if (a.counts[v] < 0 || b.counts[v] < 0)
      throw std::invalid_argument("chi_distance: negative resource count");
    if (a.counts[v] > b.counts[v]) surplus += a.counts[v] - b.counts[v];
  }
  if (a.total() != b.total())
    throw std::invalid_argument("chi_distance: placements hold different totals");
  return surplus;
}

// Problem instance: n nodes, k movable resources, and where they start.
struct InstanceConfig {
  int n = 0;
  int k = 0;
  Configuration initial_placement;

  void validate() const {
    if (n < 1) throw std::invalid_argument("instance needs at least one node");
    if (k < 1) throw std::invalid_argument("instance needs at least one resource");
    validate_configuration(initial_placement, n, k);
  }
};

}  // namespace resmove
