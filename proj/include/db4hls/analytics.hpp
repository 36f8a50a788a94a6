#pragma once

// Quality indicators over implementation point sets (all objectives are
// minimized) and a harness that replays exploration strategies against a
// populated space, using the stored results as a synthesis oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "db4hls/config_space.hpp"
#include "db4hls/datastore.hpp"
#include "db4hls/types.hpp"

namespace db4hls::analytics {

class AnalyticsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// a <= b componentwise with at least one strict component.
inline bool dominates(const DesignPoint& a, const DesignPoint& b) {
  if (a.size() != b.size())
    throw AnalyticsError("dimension mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  bool strict = false;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] > b[j]) return false;
    if (a[j] < b[j]) strict = true;
  }
  return strict;
}

/// Non-dominated subset ordered lexicographically (ascending first objective).
/// Points with identical objective vectors are represented once, by the lowest
/// configuration id; `ids[i]` lists every id sharing `points[i]`.
struct ParetoFront {
  std::vector<DesignPoint> points;
  std::vector<std::vector<std::int64_t>> ids;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const DesignPoint& operator[](std::size_t i) const { return points[i]; }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
};

namespace detail {

inline std::size_t check_points(std::span<const DesignPoint> pts) {
  if (pts.empty()) throw AnalyticsError("empty point set");
  auto dim = pts.front().size();
  if (dim == 0) throw AnalyticsError("zero-dimensional points");
  for (const auto& p : pts) {
    if (p.size() != dim) throw AnalyticsError("points have mixed dimensionality");
    for (double v : p.objectives)
      if (!std::isfinite(v)) throw AnalyticsError("non-finite objective value");
  }
  return dim;
}

}  // namespace detail

inline ParetoFront pareto_front(std::span<const DesignPoint> pts) {
  const auto dim = detail::check_points(pts);
  std::vector<std::size_t> order(pts.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].objectives != pts[b].objectives) return pts[a].objectives < pts[b].objectives;
    return pts[a].configuration_id < pts[b].configuration_id;
  });

  ParetoFront front;
  if (dim == 2) {
    // Lexicographic sweep: a point joins the front iff its second objective
    // beats every earlier point's.
    double best = std::numeric_limits<double>::infinity();
    for (auto i : order) {
      const auto& p = pts[i];
      if (!front.empty() && front.points.back().objectives == p.objectives) {
        front.ids.back().push_back(p.configuration_id);
      } else if (p[1] < best) {
        best = p[1];
        front.points.push_back(p);
        front.ids.push_back({p.configuration_id});
      }
    }
    return front;
  }
  // No point can dominate one that precedes it lexicographically, so each
  // candidate only needs checking against the front built so far.
  for (auto i : order) {
    const auto& p = pts[i];
    bool keep = true;
    for (std::size_t f = front.size(); f-- > 0;) {
      if (front.points[f].objectives == p.objectives) {
        front.ids[f].push_back(p.configuration_id);
        keep = false;
        break;
      }
      if (dominates(front.points[f], p)) {
        keep = false;
        break;
      }
    }
    if (keep) {
      front.points.push_back(p);
      front.ids.push_back({p.configuration_id});
    }
  }
  return front;
}

/// Average Distance from Reference Set:
///   (1/|ref|) * sum_{g in ref} min_{w in approx} max_j max(0, (w_j - g_j) / g_j)
inline double adrs(std::span<const DesignPoint> reference, std::span<const DesignPoint> approx) {
  auto dim = detail::check_points(reference);
  if (detail::check_points(approx) != dim) throw AnalyticsError("reference and approximation differ in dimension");
  for (const auto& g : reference)
    for (double v : g.objectives)
      if (v == 0.0) throw AnalyticsError("reference point has a zero component; relative distance undefined");
  double sum = 0;
  for (const auto& g : reference) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : approx) {
      double d = 0;
      for (std::size_t j = 0; j < dim; ++j) d = std::max(d, (w[j] - g[j]) / g[j]);
      best = std::min(best, d);
      if (best == 0) break;
    }
    sum += best;
  }
  return sum / static_cast<double>(reference.size());
}

inline double adrs(const ParetoFront& reference, std::span<const DesignPoint> approx) {
  return adrs(std::span<const DesignPoint>(reference.points), approx);
}

/// Area dominated by `pts` and bounded by `ref` (2-D only).
inline double hypervolume_2d(std::span<const DesignPoint> pts, const DesignPoint& ref) {
  if (ref.size() != 2) throw AnalyticsError("hypervolume_2d needs a 2-D reference point");
  if (pts.empty()) return 0.0;
  if (detail::check_points(pts) != 2) throw AnalyticsError("hypervolume_2d needs 2-D points");
  for (const auto& p : pts)
    if (p[0] > ref[0] || p[1] > ref[1]) throw AnalyticsError("point lies beyond the reference point");
  std::vector<std::pair<double, double>> xy;
  xy.reserve(pts.size());
  for (const auto& p : pts) xy.emplace_back(p[0], p[1]);
  std::sort(xy.begin(), xy.end());
  double area = 0;
  double ceiling = ref[1];
  for (const auto& [x, y] : xy) {
    if (y >= ceiling) continue;
    area += (ref[0] - x) * (ceiling - y);
    ceiling = y;
  }
  return area;
}

// ---------------------------------------------------------------------------
// Strategy harness

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded() : std::runtime_error("query budget exhausted") {}
};

class UnknownConfiguration : public AnalyticsError {
 public:
  explicit UnknownConfiguration(std::int64_t id)
      : AnalyticsError("configuration " + std::to_string(id) + " is not part of the space") {}
};

/// What a strategy may know about the space: its structure and the
/// configuration id at each index.
struct SpaceView {
  const space::SpaceIndex& index;
  std::span<const std::int64_t> config_ids;  // config_ids[i] is the id at index i

  std::uint64_t size() const { return config_ids.size(); }
};

struct TraceEntry {
  std::int64_t configuration_id;
  std::optional<DesignPoint> point;  // empty when synthesis failed
};

/// Budgeted lookup into the stored results. Repeat queries are free and are
/// not re-recorded.
class QueryOracle {
 public:
  QueryOracle(const std::unordered_map<std::int64_t, std::optional<DesignPoint>>& results, std::uint64_t budget)
      : results_(results), budget_(budget) {}

  std::optional<DesignPoint> query(std::int64_t configuration_id) {
    auto it = results_.find(configuration_id);
    if (it == results_.end()) throw UnknownConfiguration(configuration_id);
    if (seen_.count(configuration_id)) return it->second;
    if (trace_.size() >= budget_) throw BudgetExceeded();
    seen_.insert(configuration_id);
    trace_.push_back({configuration_id, it->second});
    return it->second;
  }

  bool queried(std::int64_t id) const { return seen_.count(id) > 0; }
  std::uint64_t used() const { return trace_.size(); }
  std::uint64_t budget() const { return budget_; }
  std::uint64_t remaining() const { return budget_ - trace_.size(); }
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  const std::unordered_map<std::int64_t, std::optional<DesignPoint>>& results_;
  std::uint64_t budget_;
  std::set<std::int64_t> seen_;
  std::vector<TraceEntry> trace_;
};

/// Plug-in interface for exploration strategies. A strategy sees only the
/// space and the oracle, and returns the configurations it selects.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  virtual std::vector<std::int64_t> explore(const SpaceView& space, QueryOracle& oracle) = 0;
};

class ExhaustiveStrategy final : public Strategy {
 public:
  std::string name() const override { return "exhaustive"; }
  std::vector<std::int64_t> explore(const SpaceView& space, QueryOracle& oracle) override {
    std::vector<std::int64_t> chosen;
    for (auto id : space.config_ids) {
      oracle.query(id);
      chosen.push_back(id);
    }
    return chosen;
  }
};

class RandomStrategy final : public Strategy {
 public:
  explicit RandomStrategy(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "random"; }
  std::vector<std::int64_t> explore(const SpaceView& space, QueryOracle& oracle) override {
    auto n = std::min<std::uint64_t>(oracle.budget(), space.size());
    std::vector<std::int64_t> chosen;
    for (const auto& cfg : space::sample(space.index, n, seed_)) {
      auto id = space.config_ids[cfg.index];
      oracle.query(id);
      chosen.push_back(id);
    }
    return chosen;
  }

 private:
  std::uint64_t seed_;
};

/// Random-restart hill climbing over single-axis +/-1 moves, minimizing a
/// log-scaled weighted sum whose weights are redrawn at every restart.
class HillClimbStrategy final : public Strategy {
 public:
  explicit HillClimbStrategy(std::uint64_t seed) : seed_(seed) {}
  std::string name() const override { return "hill_climb"; }

  std::vector<std::int64_t> explore(const SpaceView& space, QueryOracle& oracle) override {
    std::mt19937_64 rng(seed_);
    const auto& index = space.index;
    std::vector<std::int64_t> chosen;
    auto visit = [&](std::uint64_t i) {
      auto id = space.config_ids[i];
      bool fresh = !oracle.queried(id);
      auto p = oracle.query(id);
      if (fresh) chosen.push_back(id);
      return p;
    };
    std::vector<double> weights;
    auto score = [&](const DesignPoint& p) {
      double s = 0;
      for (std::size_t j = 0; j < p.size(); ++j) s += weights[j] * std::log1p(std::max(0.0, p[j]));
      return s;
    };
    std::uniform_int_distribution<std::uint64_t> any(0, space.size() - 1);
    while (oracle.remaining() > 0 && oracle.used() < space.size()) {
      std::uint64_t cur = any(rng);
      for (int tries = 0; oracle.queried(space.config_ids[cur]) && tries < 64; ++tries) cur = any(rng);
      if (oracle.queried(space.config_ids[cur])) {
        for (cur = 0; cur < space.size() && oracle.queried(space.config_ids[cur]); ++cur) {
        }
      }
      auto cur_pt = visit(cur);
      if (!cur_pt) continue;
      std::exponential_distribution<double> expo(1.0);
      weights.assign(cur_pt->size(), 0.0);
      for (auto& w : weights) w = expo(rng);
      double cur_score = score(*cur_pt);
      bool improved = true;
      while (improved && oracle.remaining() > 0) {
        improved = false;
        auto digits = index.digits(cur);
        std::optional<std::uint64_t> best;
        double best_score = cur_score;
        for (std::size_t a = 0; a < digits.size() && oracle.remaining() > 0; ++a) {
          for (int delta : {-1, 1}) {
            if ((delta < 0 && digits[a] == 0) || (delta > 0 && digits[a] + 1 >= index.axes()[a].radix)) continue;
            auto d = digits;
            d[a] = static_cast<std::uint64_t>(static_cast<std::int64_t>(d[a]) + delta);
            auto nb = index.from_digits(d);
            if (oracle.remaining() == 0 && !oracle.queried(space.config_ids[nb])) break;
            auto p = visit(nb);
            if (p && score(*p) < best_score) {
              best_score = score(*p);
              best = nb;
            }
          }
        }
        if (best) {
          cur = *best;
          cur_score = best_score;
          improved = true;
        }
      }
    }
    return chosen;
  }

 private:
  std::uint64_t seed_;
};

struct Evaluation {
  std::string strategy;
  std::vector<TraceEntry> trace;
  ParetoFront reference_front;
  ParetoFront approx_front;
  std::optional<double> adrs_value;  // empty when no chosen configuration succeeded
  std::uint64_t queries_used = 0;
  std::uint64_t budget = 0;
  bool truncated = false;
};

/// Runs `strategy` with at most `budget` distinct queries. `results` maps
/// every configuration id of the space to its point (empty if it failed).
inline Evaluation evaluate_strategy(const SpaceView& space,
                                    const std::unordered_map<std::int64_t, std::optional<DesignPoint>>& results,
                                    Strategy& strategy, std::uint64_t budget) {
  std::vector<DesignPoint> all;
  for (auto id : space.config_ids) {
    auto it = results.find(id);
    if (it == results.end()) throw UnknownConfiguration(id);
    if (it->second) all.push_back(*it->second);
  }
  Evaluation ev;
  ev.strategy = strategy.name();
  ev.budget = budget;
  ev.reference_front = pareto_front(all);

  QueryOracle oracle(results, budget);
  std::vector<std::int64_t> chosen;
  try {
    chosen = strategy.explore(space, oracle);
  } catch (const BudgetExceeded&) {
    ev.truncated = true;
    for (const auto& t : oracle.trace()) chosen.push_back(t.configuration_id);
  }
  ev.trace = oracle.trace();
  ev.queries_used = oracle.used();

  std::vector<DesignPoint> picked;
  for (auto id : chosen) {
    if (!oracle.queried(id))
      throw AnalyticsError("strategy selected configuration " + std::to_string(id) + " without querying it");
    if (const auto& p = results.at(id)) picked.push_back(*p);
  }
  if (!picked.empty()) {
    ev.approx_front = pareto_front(picked);
    ev.adrs_value = adrs(ev.reference_front, ev.approx_front.points);
  }
  return ev;
}

/// Loads a space from the store and evaluates `strategy` against it.
inline Evaluation evaluate_strategy(store::Store& db, std::int64_t space_id, Strategy& strategy,
                                    std::uint64_t budget, const store::ObjectiveSpec& objectives = {}) {
  auto sp = db.space(space_id);
  space::SpaceIndex index(csd::parse_csd(sp.csd_text));
  std::vector<std::int64_t> ids;
  std::unordered_map<std::int64_t, std::optional<DesignPoint>> results;
  for (const auto& c : db.configurations(space_id)) {
    ids.push_back(c.id);
    results.emplace(c.id, std::nullopt);
  }
  for (auto& p : db.fetch_points(space_id, objectives)) results[p.configuration_id] = p;
  return evaluate_strategy(SpaceView{index, ids}, results, strategy, budget);
}

inline std::unique_ptr<Strategy> make_strategy(const std::string& name, std::uint64_t seed) {
  if (name == "exhaustive") return std::make_unique<ExhaustiveStrategy>();
  if (name == "random") return std::make_unique<RandomStrategy>(seed);
  if (name == "hill_climb" || name == "hill") return std::make_unique<HillClimbStrategy>(seed);
  throw AnalyticsError("unknown strategy '" + name + "'");
}

}  // namespace db4hls::analytics
