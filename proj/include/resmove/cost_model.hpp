#pragma once

// Service-cost models sigma_v(x, y): the cost of serving y demands at node v
// with x resources placed there. Four concrete families plus an additive
// "movement charge" augmentation. Models declare evaluation bounds x_max and
// y_max; evaluating outside them is an error, and the structural axioms the
// algorithms rely on are *checked* (check_properties), never assumed.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "resmove/core.hpp"

namespace resmove {

enum class CostFamily { covering, fractional, capped, table, augmented };

inline const char* family_name(CostFamily f) {
  switch (f) {
    case CostFamily::covering: return "covering";
    case CostFamily::fractional: return "fractional";
    case CostFamily::capped: return "capped";
    case CostFamily::table: return "table";
    case CostFamily::augmented: return "augmented";
  }
  return "?";
}

class CostModel {
 public:
  // covering: y if the node is empty, 0 otherwise. All-or-nothing service.
  static CostModel covering(int n, long long x_max, long long y_max) {
    return CostModel(CostFamily::covering, n, x_max, y_max);
  }

  // fractional: y / (x + 1). Each extra resource keeps shrinking the backlog.
  static CostModel fractional(int n, long long x_max, long long y_max) {
    return CostModel(CostFamily::fractional, n, x_max, y_max);
  }

  // capped: max(0, y - c_v * x). A resource at v absorbs c_v demands.
  static CostModel capped(int n, long long x_max, long long y_max,
                          std::vector<double> capacity) {
    CostModel m(CostFamily::capped, n, x_max, y_max);
    if (static_cast<int>(capacity.size()) == 1 && n > 1)
      capacity.assign(static_cast<size_t>(n), capacity[0]);
    if (static_cast<int>(capacity.size()) != n)
      throw std::invalid_argument("capped: capacity needs 1 or n entries");
    for (double c : capacity)
      if (!(c >= 0.0)) throw std::invalid_argument("capped: capacity must be >= 0");
    m.capacity_ = std::move(capacity);
    return m;
  }

  // table: explicit grid cost[v][x][y], dims n x (x_max+1) x (y_max+1).
  static CostModel table(std::vector<std::vector<std::vector<double>>> cost) {
    if (cost.empty()) throw std::invalid_argument("table: empty cost grid");
    int n = static_cast<int>(cost.size());
    size_t xs = cost[0].size();
    if (xs < 1) throw std::invalid_argument("table: empty x dimension");
    size_t ys = cost[0][0].size();
    if (ys < 1) throw std::invalid_argument("table: empty y dimension");
    for (const auto& per_node : cost) {
      if (per_node.size() != xs) throw std::invalid_argument("table: ragged x dimension");
      for (const auto& row : per_node) {
        if (row.size() != ys) throw std::invalid_argument("table: ragged y dimension");
        for (double c : row)
          if (!(c >= 0.0)) throw std::invalid_argument("table: costs must be >= 0");
      }
    }
    CostModel m(CostFamily::table, n, static_cast<long long>(xs) - 1,
                static_cast<long long>(ys) - 1);
    m.table_ = std::move(cost);
    return m;
  }

  CostFamily family() const { return family_; }
  int nodes() const { return n_; }
  long long x_max() const { return x_max_; }
  long long y_max() const { return y_max_; }

  double evaluate(int v, long long x, long long y) const {
    if (v < 0 || v >= n_)
      throw std::invalid_argument("evaluate: node " + std::to_string(v) +
                                  " outside [0, " + std::to_string(n_) + ")");
    if (x < 0 || x > x_max_)
      throw std::invalid_argument("evaluate: x=" + std::to_string(x) +
                                  " outside [0, " + std::to_string(x_max_) + "]");
    if (y < 0 || y > y_max_)
      throw std::invalid_argument("evaluate: y=" + std::to_string(y) +
                                  " outside [0, " + std::to_string(y_max_) + "]");
    switch (family_) {
      case CostFamily::covering:
        return x == 0 ? static_cast<double>(y) : 0.0;
      case CostFamily::fractional:
        return static_cast<double>(y) / static_cast<double>(x + 1);
      case CostFamily::capped: {
        double r = static_cast<double>(y) - capacity_[v] * static_cast<double>(x);
        return r > 0.0 ? r : 0.0;
      }
      case CostFamily::table:
        return table_[v][x][y];
      case CostFamily::augmented:
        return base_->evaluate(v, x, y) +
               0.5 * std::abs(static_cast<double>(x) - anchor_.counts[v]);
    }
    throw internal_error("evaluate: unknown family");
  }

  // Present only for augmented models: the placement the charge is anchored to.
  const Configuration& anchor() const {
    if (family_ != CostFamily::augmented)
      throw std::invalid_argument("anchor: model is not augmented");
    return anchor_;
  }

  const CostModel& base() const {
    if (family_ != CostFamily::augmented)
      throw std::invalid_argument("base: model is not augmented");
    return *base_;
  }

  friend CostModel augment_with_movement_cost(const CostModel& model,
                                              const Configuration& f0);

 private:
  CostModel(CostFamily family, int n, long long x_max, long long y_max)
      : family_(family), n_(n), x_max_(x_max), y_max_(y_max) {
    if (n < 1) throw std::invalid_argument("cost model needs at least one node");
    if (x_max < 1) throw std::invalid_argument("cost model needs x_max >= 1");
    if (y_max < 1) throw std::invalid_argument("cost model needs y_max >= 1");
  }

  CostFamily family_;
  int n_;
  long long x_max_;
  long long y_max_;
  std::vector<double> capacity_;                         // capped
  std::vector<std::vector<std::vector<double>>> table_;  // table
  std::shared_ptr<const CostModel> base_;                // augmented
  Configuration anchor_;                                 // augmented
};

// sigma'_v(x, y) = sigma_v(x, y) + |x - f0_v| / 2. Folds the cost of having
// moved resources away from f0 into the service cost itself, so the total
// cost of any placement F becomes S(F) + chi(f0, F).
inline CostModel augment_with_movement_cost(const CostModel& model,
                                            const Configuration& f0) {
  if (model.family() == CostFamily::augmented)
    throw std::invalid_argument("augment_with_movement_cost: already augmented");
  if (f0.nodes() != model.nodes())
    throw std::invalid_argument("augment_with_movement_cost: anchor dimension mismatch");
  for (int v = 0; v < f0.nodes(); ++v)
    if (f0.counts[v] < 0)
      throw std::invalid_argument("augment_with_movement_cost: negative anchor count");
  CostModel m(CostFamily::augmented, model.nodes(), model.x_max(), model.y_max());
  m.base_ = std::make_shared<const CostModel>(model);
  m.anchor_ = f0;
  return m;
}

inline double total_service_cost(const CostModel& model, const Configuration& f,
                                 const DemandState& d) {
  if (f.nodes() != model.nodes() || d.nodes() != model.nodes())
    throw std::invalid_argument("total_service_cost: dimension mismatch");
  double total = 0.0;
  for (int v = 0; v < model.nodes(); ++v)
    total += model.evaluate(v, f.counts[v], d.counts[v]);
  return total;
}

// ---------------------------------------------------------------------------
// Structural axioms. The algorithms need four properties of sigma:
//   resources help:            sigma(x, y)   >= sigma(x+1, y)
//   demands hurt:              sigma(x, y)   <= sigma(x, y+1)
//   diminishing returns:       sigma(x,y) - sigma(x+1,y) >= sigma(x+1,y) - sigma(x+2,y)
//   load raises marginal value: sigma(x,y) - sigma(x+1,y) <= sigma(x,y+1) - sigma(x+1,y+1)

struct AxiomWitness {
  std::string axiom;
  int v = 0;
  long long x = 0;
  long long y = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct PropertyReport {
  bool monotone_resources = true;
  bool monotone_demands = true;
  bool diminishing_returns = true;
  bool marginal_demand_monotone = true;
  std::vector<AxiomWitness> witnesses;  // first failure per axiom, in order

  bool all_ok() const {
    return monotone_resources && monotone_demands && diminishing_returns &&
           marginal_demand_monotone;
  }
};

// Exhaustive check of the four axioms over v in [0,n), x in [0, x_bound-2],
// y in [0, y_bound-1]. Bounds must fit inside the model's declared bounds.
inline PropertyReport check_properties(const CostModel& model, long long x_bound,
                                       long long y_bound) {
  if (x_bound < 2 || x_bound > model.x_max())
    throw std::invalid_argument("check_properties: x bound outside [2, x_max]");
  if (y_bound < 1 || y_bound > model.y_max())
    throw std::invalid_argument("check_properties: y bound outside [1, y_max]");
  PropertyReport report;
  auto note = [&report](bool& flag, const char* name, int v, long long x,
                        long long y, double lhs, double rhs) {
    if (flag) {
      flag = false;
      report.witnesses.push_back({name, v, x, y, lhs, rhs});
    }
  };
  for (int v = 0; v < model.nodes(); ++v) {
    for (long long x = 0; x + 2 <= x_bound; ++x) {
      for (long long y = 0; y + 1 <= y_bound; ++y) {
        double c00 = model.evaluate(v, x, y);
        double c10 = model.evaluate(v, x + 1, y);
        double c20 = model.evaluate(v, x + 2, y);
        double c01 = model.evaluate(v, x, y + 1);
        double c11 = model.evaluate(v, x + 1, y + 1);
        if (!(c00 >= c10))
          note(report.monotone_resources, "monotone_resources", v, x, y, c00, c10);
        if (!(c00 <= c01))
          note(report.monotone_demands, "monotone_demands", v, x, y, c00, c01);
        if (!(c00 - c10 >= c10 - c20))
          note(report.diminishing_returns, "diminishing_returns", v, x, y,
               c00 - c10, c10 - c20);
        if (!(c00 - c10 <= c01 - c11))
          note(report.marginal_demand_monotone, "marginal_demand_monotone", v, x,
               y, c00 - c10, c01 - c11);
      }
    }
  }
  return report;
}

inline PropertyReport check_properties(const CostModel& model) {
  return check_properties(model, model.x_max(), model.y_max());
}

// Largest single-demand cost jump at an empty node:
//   max over v, r in [0, y_bound) of sigma_v(0, r+1) - sigma_v(0, r).
// Because extra load never shrinks a resource's marginal value, the jump at
// x = 0 dominates the jump at any occupancy, so scanning x = 0 suffices.
inline double delta_max(const CostModel& model, long long y_bound) {
  if (y_bound < 1 || y_bound > model.y_max())
    throw std::invalid_argument("delta_max: y bound outside [1, y_max]");
  double best = 0.0;
  bool first = true;
  for (int v = 0; v < model.nodes(); ++v) {
    double prev = model.evaluate(v, 0, 0);
    for (long long r = 0; r < y_bound; ++r) {
      double next = model.evaluate(v, 0, r + 1);
      double jump = next - prev;
      if (first || jump > best) {
        best = jump;
        first = false;
      }
      prev = next;
    }
  }
  return best;
}

// Derived per-(model, f0) constants, computed once and threaded through the
// session. service_min is the cheapest placement other than f0 itself at zero
// demands; the solver header provides compute_stats.
struct CostModelStats {
  double delta_max = 0.0;
  double service_min = 0.0;
};

// ---------------------------------------------------------------------------
// JSON form: {"family": ..., "params": {...}, "x_max": int, "y_max": int}.
// covering/fractional/capped carry params.n; capped adds params.capacity
// (scalar or per-node array); table carries params.cost = cost[v][x][y] and
// its x_max/y_max must match the grid.

inline CostModel cost_model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("cost model: expected an object");
  std::string family = j.at("family").get<std::string>();
  if (family == "table") {
    auto cost =
        j.at("params").at("cost").get<std::vector<std::vector<std::vector<double>>>>();
    CostModel m = CostModel::table(std::move(cost));
    if (j.contains("x_max") && j.at("x_max").get<long long>() != m.x_max())
      throw std::invalid_argument("cost model: x_max does not match table dims");
    if (j.contains("y_max") && j.at("y_max").get<long long>() != m.y_max())
      throw std::invalid_argument("cost model: y_max does not match table dims");
    return m;
  }
  long long x_max = j.at("x_max").get<long long>();
  long long y_max = j.at("y_max").get<long long>();
  int n = j.at("params").at("n").get<int>();
  if (family == "covering") return CostModel::covering(n, x_max, y_max);
  if (family == "fractional") return CostModel::fractional(n, x_max, y_max);
  if (family == "capped") {
    const auto& cap = j.at("params").at("capacity");
    std::vector<double> capacity;
    if (cap.is_array())
      capacity = cap.get<std::vector<double>>();
    else
      capacity.push_back(cap.get<double>());
    return CostModel::capped(n, x_max, y_max, std::move(capacity));
  }
  throw std::invalid_argument("cost model: unknown family \"" + family + "\"");
}

}  // namespace resmove
