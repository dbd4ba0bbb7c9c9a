#pragma once

#include "commentcast/curation.hpp"
#include "commentcast/error.hpp"
#include "commentcast/scoring.hpp"
#include "commentcast/segmentation.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

namespace commentcast {

struct CandidateSet {
  int topic_id = 0;
  std::vector<int> point_ids;  // ascending time
};

struct Assignment {
  std::map<int, std::optional<int>> placements;  // topic id -> point id, nullopt when discarded
  double objective = 0.0;
  std::map<int, std::vector<int>> per_point_order;  // point id -> topic ids in play order
};

namespace optimizer {

inline constexpr double kEps = 1e-9;
// Per component: the load sweep when its state bound is within kLoadBudget,
// else the point sweep when at most kSweepWidth topics are open at once, else
// the load sweep if lengths share a unit, else branch and bound.
inline constexpr double kLoadBudget = 1 << 25;
inline constexpr std::size_t kSweepWidth = 24;

enum class Method { Auto, PointSweep, LoadSweep, BranchAndBound };

/// Up to `before` points at or before `anchor_ms` and up to `after` points
/// strictly after it, nearest first, returned in time order.
inline std::vector<int> candidate_points(std::int64_t anchor_ms, const std::vector<InsertionPoint>& points,
                                         std::size_t before = 2, std::size_t after = 2) {
  std::vector<const InsertionPoint*> sorted;
  for (const auto& p : points) sorted.push_back(&p);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const InsertionPoint* a, const InsertionPoint* b) { return a->time_ms < b->time_ms; });
  const auto split = std::partition_point(sorted.begin(), sorted.end(),
                                          [&](const InsertionPoint* p) { return p->time_ms <= anchor_ms; });
  std::vector<int> out;
  const auto n_before = std::min<std::size_t>(before, static_cast<std::size_t>(split - sorted.begin()));
  for (auto it = split - static_cast<std::ptrdiff_t>(n_before); it != split; ++it) out.push_back((*it)->id);
  const auto n_after = std::min<std::size_t>(after, static_cast<std::size_t>(sorted.end() - split));
  for (auto it = split; it != split + static_cast<std::ptrdiff_t>(n_after); ++it) out.push_back((*it)->id);
  if (out.empty()) throw Error(ErrorCode::NoCandidates, "no insertion point near " + std::to_string(anchor_ms) + " ms");
  return out;
}

struct Option {
  int point = 0;  // index into Problem::capacities
  double reward = 0.0;
};

// Index-based instance: topic i may go to any of options[i] or be discarded.
struct Problem {
  std::vector<double> lengths;
  std::vector<double> capacities;
  std::vector<std::vector<Option>> options;
};

struct Solution {
  std::vector<int> choice;  // point index per topic, -1 when discarded
  double objective = 0.0;
  std::size_t nodes = 0;
};

inline double objective_of(const Problem& problem, const std::vector<int>& choice) {
  double total = 0.0;
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (choice[i] < 0) continue;
    for (const auto& o : problem.options[i]) {
      if (o.point == choice[i]) {
        total += o.reward;
        break;
      }
    }
  }
  return total;
}

inline bool feasible(const Problem& problem, const std::vector<int>& choice) {
  if (choice.size() != problem.lengths.size()) return false;
  std::vector<double> load(problem.capacities.size(), 0.0);
  for (std::size_t i = 0; i < choice.size(); ++i) {
    if (choice[i] < 0) continue;
    const bool offered = std::any_of(problem.options[i].begin(), problem.options[i].end(),
                                     [&](const Option& o) { return o.point == choice[i]; });
    if (!offered) return false;
    load[static_cast<std::size_t>(choice[i])] += problem.lengths[i];
  }
  for (std::size_t j = 0; j < load.size(); ++j) {
    if (load[j] > problem.capacities[j] + kEps) return false;
  }
  return true;
}

namespace detail {

// Max-profit fractional transportation: topic i ships up to l_i seconds, point
// j accepts up to its residual capacity, one second of i at j earns r_ij/l_i.
// Solved as min-cost flow by successive shortest paths (Bellman-Ford queue),
// stopping once no path has negative cost. The optimum bounds every integral
// completion from above.
class TransportBound {
 public:
  void reset(std::size_t nodes) {
    head_.assign(nodes, -1);
    edges_.clear();
  }

  // Returns the forward edge's index.
  int add_edge(int from, int to, double capacity, double cost) {
    const int index = static_cast<int>(edges_.size());
    edges_.push_back({to, head_[static_cast<std::size_t>(from)], capacity, cost});
    head_[static_cast<std::size_t>(from)] = static_cast<int>(edges_.size()) - 1;
    edges_.push_back({from, head_[static_cast<std::size_t>(to)], 0.0, -cost});
    head_[static_cast<std::size_t>(to)] = static_cast<int>(edges_.size()) - 1;
    return index;
  }

  // Flow currently carried by a forward edge.
  double flow(int edge) const { return edges_[static_cast<std::size_t>(edge ^ 1)].capacity; }

  double max_profit(int source, int sink) {
    const auto n = head_.size();
    std::vector<double> dist(n);
    std::vector<int> via(n);
    std::vector<char> queued(n);
    double profit = 0.0;
    while (true) {
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      std::fill(via.begin(), via.end(), -1);
      std::deque<int> queue{source};
      dist[static_cast<std::size_t>(source)] = 0.0;
      queued[static_cast<std::size_t>(source)] = 1;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        queued[static_cast<std::size_t>(u)] = 0;
        for (int e = head_[static_cast<std::size_t>(u)]; e >= 0; e = edges_[static_cast<std::size_t>(e)].next) {
          const auto& edge = edges_[static_cast<std::size_t>(e)];
          if (edge.capacity <= kResidual) continue;
          const double d = dist[static_cast<std::size_t>(u)] + edge.cost;
          // Relative slack: with tied rewards rounding leaves cycles a few
          // ulps negative, and an exact test would chase them forever.
          if (d < dist[static_cast<std::size_t>(edge.to)] - 1e-12 * (1.0 + std::abs(d))) {
            dist[static_cast<std::size_t>(edge.to)] = d;
            via[static_cast<std::size_t>(edge.to)] = e;
            if (!queued[static_cast<std::size_t>(edge.to)]) {
              queued[static_cast<std::size_t>(edge.to)] = 1;
              queue.push_back(edge.to);
            }
          }
        }
      }
      if (via[static_cast<std::size_t>(sink)] < 0 || dist[static_cast<std::size_t>(sink)] >= 0.0) break;
      double push = std::numeric_limits<double>::infinity();
      for (int v = sink; v != source;) {
        const auto& edge = edges_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)])];
        push = std::min(push, edge.capacity);
        v = edges_[static_cast<std::size_t>(via[static_cast<std::size_t>(v)] ^ 1)].to;
      }
      for (int v = sink; v != source;) {
        const int e = via[static_cast<std::size_t>(v)];
        edges_[static_cast<std::size_t>(e)].capacity -= push;
        edges_[static_cast<std::size_t>(e ^ 1)].capacity += push;
        v = edges_[static_cast<std::size_t>(e ^ 1)].to;
      }
      profit -= push * dist[static_cast<std::size_t>(sink)];
    }
    return profit;
  }

 private:
  static constexpr double kResidual = 1e-12;
  struct Edge {
    int to;
    int next;
    double capacity;
    double cost;
  };
  std::vector<int> head_;
  std::vector<Edge> edges_;
};

// Branch and bound over one connected component, guided by the LP
// relaxation. Every node solves the fractional transportation problem over the
// undecided topics. An integral optimum closes the node; otherwise the search
// branches on a fractional topic, trying the point that holds most of its flow
// first and discard last. Rounding each relaxation supplies incumbents early.
// The search order is fixed, so ties resolve the same way on every run.
class ComponentSearch {
 public:
  ComponentSearch(const Problem& problem, std::vector<int> topics, std::vector<double>& residual)
      : problem_(problem), topics_(std::move(topics)), residual_(residual), choice_(topics_.size(), kFree) {}

  std::vector<int> run(std::size_t& nodes) {
    best_choice_ = greedy();
    best_ = value_of(best_choice_);
    search(0.0);
    nodes += nodes_;
    return best_choice_;
  }

 private:
  static constexpr int kFree = -2;
  static constexpr double kIntegral = 1e-9;

  struct Relaxation {
    double value = 0.0;
    std::vector<std::vector<double>> share;  // per topic slot, per option: fraction of the topic placed there
  };

  const Option& option(std::size_t k, std::size_t o) const {
    return problem_.options[static_cast<std::size_t>(topics_[k])][o];
  }
  std::size_t option_count(std::size_t k) const { return problem_.options[static_cast<std::size_t>(topics_[k])].size(); }
  double length(std::size_t k) const { return problem_.lengths[static_cast<std::size_t>(topics_[k])]; }
  bool fits(std::size_t k, const Option& o) const {
    return length(k) <= residual_[static_cast<std::size_t>(o.point)] + kEps;
  }

  std::vector<int> greedy() const {
    std::vector<int> out(topics_.size(), -1);
    std::vector<double> residual = residual_;
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      double best = 0.0;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        const auto& opt = option(k, o);
        if (opt.reward > best && length(k) <= residual[static_cast<std::size_t>(opt.point)] + kEps) {
          best = opt.reward;
          out[k] = opt.point;
        }
      }
      if (out[k] >= 0) residual[static_cast<std::size_t>(out[k])] -= length(k);
    }
    return out;
  }

  double value_of(const std::vector<int>& choice) const {
    double total = 0.0;
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice[k] < 0) continue;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        if (option(k, o).point == choice[k]) total += option(k, o).reward;
      }
    }
    return total;
  }

  double cheap_bound() const {
    double total = 0.0;
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree) continue;
      double best = 0.0;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        if (option(k, o).reward > best && fits(k, option(k, o))) best = option(k, o).reward;
      }
      total += best;
    }
    return total;
  }

  Relaxation relax() {
    Relaxation r;
    r.share.resize(topics_.size());
    const int source = 0;
    const int sink = 1;
    point_node_.assign(residual_.size(), -1);
    int next = 2 + static_cast<int>(topics_.size());
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree) continue;
      r.share[k].assign(option_count(k), 0.0);
      for (std::size_t o = 0; o < option_count(k); ++o) {
        const auto& opt = option(k, o);
        if (fits(k, opt) && point_node_[static_cast<std::size_t>(opt.point)] < 0) {
          point_node_[static_cast<std::size_t>(opt.point)] = next++;
        }
      }
    }
    flow_.reset(static_cast<std::size_t>(next));
    for (std::size_t j = 0; j < residual_.size(); ++j) {
      if (point_node_[j] >= 0) flow_.add_edge(point_node_[j], sink, std::max(residual_[j], 0.0) + kEps, 0.0);
    }
    edge_of_.assign(topics_.size(), {});
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree) continue;
      edge_of_[k].assign(option_count(k), -1);
      const double l = length(k);
      if (l <= 0.0) {
        // Takes no capacity: the best option is free to take.
        std::size_t best = option_count(k);
        for (std::size_t o = 0; o < option_count(k); ++o) {
          if (option(k, o).reward > 0.0 && (best == option_count(k) || option(k, o).reward > option(k, best).reward)) best = o;
        }
        if (best < option_count(k)) {
          r.share[k][best] = 1.0;
          r.value += option(k, best).reward;
        }
        continue;
      }
      const int node = 2 + static_cast<int>(k);
      bool any = false;
      // Added in reverse so the flow search meets lower point ids first.
      for (std::size_t o = option_count(k); o-- > 0;) {
        const auto& opt = option(k, o);
        if (!(opt.reward > 0.0) || !fits(k, opt)) continue;
        edge_of_[k][o] = flow_.add_edge(node, point_node_[static_cast<std::size_t>(opt.point)], l, -opt.reward / l);
        any = true;
      }
      if (any) flow_.add_edge(source, node, l, 0.0);
    }
    r.value += flow_.max_profit(source, sink);
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree || length(k) <= 0.0) continue;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        if (edge_of_[k][o] >= 0) r.share[k][o] = flow_.flow(edge_of_[k][o]) / length(k);
      }
    }
    return r;
  }

  // Keeps every topic the relaxation placed whole, then fits the rest by
  // reward. Returns the completed choice and whether it matches the relaxation.
  std::pair<std::vector<int>, bool> round(const Relaxation& r) const {
    std::vector<int> out = choice_;
    std::vector<double> residual = residual_;
    std::vector<std::size_t> rest;
    bool integral = true;
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree) continue;
      double total = 0.0;
      std::size_t whole = option_count(k);
      for (std::size_t o = 0; o < option_count(k); ++o) {
        total += r.share[k][o];
        if (r.share[k][o] >= 1.0 - kIntegral) whole = o;
      }
      if (whole < option_count(k)) {
        const auto j = static_cast<std::size_t>(option(k, whole).point);
        if (length(k) <= residual[j] + kEps) {
          out[k] = option(k, whole).point;
          residual[j] -= length(k);
          continue;
        }
        integral = false;
      } else if (total > kIntegral) {
        integral = false;
      } else {
        out[k] = -1;
        continue;
      }
      rest.push_back(k);
    }
    for (std::size_t k : rest) {
      out[k] = -1;
      double best = 0.0;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        const auto& opt = option(k, o);
        if (opt.reward > best && length(k) <= residual[static_cast<std::size_t>(opt.point)] + kEps) {
          best = opt.reward;
          out[k] = opt.point;
        }
      }
      if (out[k] >= 0) residual[static_cast<std::size_t>(out[k])] -= length(k);
    }
    return {std::move(out), integral};
  }

  void offer(const std::vector<int>& choice) {
    const double v = value_of(choice);
    if (v > best_) {
      best_ = v;
      best_choice_ = choice;
    }
  }

  void search(double value) {
    ++nodes_;
    if (value + cheap_bound() <= best_) return;
    const auto r = relax();
    // Compared without slack; the kEps added to each capacity keeps the
    // relaxation an upper bound despite rounding in the flow.
    if (value + r.value <= best_) return;
    auto [rounded, integral] = round(r);
    offer(rounded);
    if (integral) return;

    // Branch on the fractional topic with the most reward at stake.
    std::size_t pick = topics_.size();
    double stake = -1.0;
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      if (choice_[k] != kFree) continue;
      double top = 0.0;
      double total = 0.0;
      double weighted = 0.0;
      for (std::size_t o = 0; o < option_count(k); ++o) {
        top = std::max(top, r.share[k][o]);
        total += r.share[k][o];
        weighted += r.share[k][o] * option(k, o).reward;
      }
      const bool fractional = top < 1.0 - kIntegral && total > kIntegral;
      if (fractional && weighted > stake) {
        stake = weighted;
        pick = k;
      }
    }
    if (pick == topics_.size()) return;

    std::vector<std::size_t> order(option_count(pick));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (r.share[pick][a] != r.share[pick][b]) return r.share[pick][a] > r.share[pick][b];
      return option(pick, a).reward > option(pick, b).reward;
    });
    for (std::size_t o : order) {
      const auto& opt = option(pick, o);
      if (!fits(pick, opt)) continue;
      residual_[static_cast<std::size_t>(opt.point)] -= length(pick);
      choice_[pick] = opt.point;
      search(value + opt.reward);
      residual_[static_cast<std::size_t>(opt.point)] += length(pick);
    }
    choice_[pick] = -1;
    search(value);
    choice_[pick] = kFree;
  }

  const Problem& problem_;
  std::vector<int> topics_;
  std::vector<double>& residual_;
  std::vector<int> choice_;
  std::vector<int> best_choice_;
  double best_ = 0.0;
  std::size_t nodes_ = 0;
  std::vector<int> point_node_;
  std::vector<std::vector<int>> edge_of_;
  TransportBound flow_;
};

// Exact sweep over one component's points in index order. A topic is open
// from its first offered point to its last, and the state is the set of open
// topics already placed. Work grows with 2^width, where width is the largest
// number of topics open at once; timeline candidates are short contiguous
// runs, so the width stays small there.
class PointSweep {
 public:
  PointSweep(const Problem& problem, const std::vector<int>& topics, const std::vector<double>& residual)
      : problem_(problem), topics_(topics), residual_(residual) {
    for (int t : topics_) {
      for (const auto& o : problem_.options[static_cast<std::size_t>(t)]) points_.push_back(o.point);
    }
    std::sort(points_.begin(), points_.end());
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
    open_.resize(points_.size());
    for (std::size_t k = 0; k < topics_.size(); ++k) {
      const auto& opts = problem_.options[static_cast<std::size_t>(topics_[k])];
      const auto first = position(opts.front().point);
      const auto last = position(opts.back().point);
      for (std::size_t p = first; p <= last; ++p) open_[p].push_back(k);
    }
    for (const auto& o : open_) width_ = std::max(width_, o.size());
  }

  std::size_t width() const { return width_; }


  std::vector<int> run(std::size_t& nodes) {
    struct Entry {
      double value;
      std::size_t from;  // index in the previous layer
      std::uint64_t taken;  // open-topic bits placed at this point
    };
    std::vector<std::vector<Entry>> layers;
    std::unordered_map<std::uint64_t, std::size_t> index;
    std::vector<std::uint64_t> prev_masks = {0};
    std::vector<std::size_t> prev_open;

    for (std::size_t p = 0; p < points_.size(); ++p) {
      const auto& open = open_[p];
      // Carry each state's placed bits onto this point's open list; topics that
      // closed drop out, merging states that differ only in them.
      std::vector<int> bit_now(topics_.size(), -1);
      for (std::size_t b = 0; b < open.size(); ++b) bit_now[open[b]] = static_cast<int>(b);
      std::vector<Entry> carried;
      std::vector<std::uint64_t> carried_masks;
      index.clear();
      for (std::size_t s = 0; s < prev_masks.size(); ++s) {
        std::uint64_t mask = 0;
        for (std::size_t b = 0; b < prev_open.size(); ++b) {
          if ((prev_masks[s] >> b & 1U) && bit_now[prev_open[b]] >= 0) mask |= std::uint64_t{1} << bit_now[prev_open[b]];
        }
        const double v = p == 0 ? 0.0 : layers.back()[s].value;
        const auto [it, fresh] = index.try_emplace(mask, carried.size());
        if (fresh) {
          carried.push_back({v, s, 0});
          carried_masks.push_back(mask);
        } else if (v > carried[it->second].value) {
          carried[it->second] = {v, s, 0};
        }
      }
      layers.push_back(std::move(carried));

      // Place subsets of the unplaced open topics offered this point.
      const int point = points_[p];
      const double capacity = residual_[static_cast<std::size_t>(point)] + kEps;
      struct Item {
        int bit;
        double length;
        double reward;
      };
      std::vector<Item> items;
      for (std::size_t b = 0; b < open.size(); ++b) {
        for (const auto& o : problem_.options[static_cast<std::size_t>(topics_[open[b]])]) {
          if (o.point == point && o.reward > 0.0) items.push_back({static_cast<int>(b), length(open[b]), o.reward});
        }
      }
      std::vector<Entry> placed;
      std::vector<std::uint64_t> placed_masks;
      index.clear();
      const auto& base = layers.back();
      for (std::size_t s = 0; s < base.size(); ++s) {
        const std::uint64_t mask = carried_masks[s];
        const auto visit = [&](const auto& self, std::size_t i, std::uint64_t taken, double load, double gain) -> void {
          if (i == items.size()) {
            ++nodes;
            const double v = base[s].value + gain;
            const auto [it, fresh] = index.try_emplace(mask | taken, placed.size());
            if (fresh) {
              placed.push_back({v, s, taken});
              placed_masks.push_back(mask | taken);
            } else if (v > placed[it->second].value) {
              placed[it->second] = {v, s, taken};
            }
            return;
          }
          const auto& item = items[i];
          const auto bit = std::uint64_t{1} << item.bit;
          if (!(mask & bit) && !(taken & bit) && load + item.length <= capacity) {
            self(self, i + 1, taken | bit, load + item.length, gain + item.reward);
          }
          self(self, i + 1, taken, load, gain);
        };
        visit(visit, 0, 0, 0.0, 0.0);
      }
      layers.push_back(std::move(placed));
      prev_masks = std::move(placed_masks);
      prev_open = open;
    }

    // Best final state, then walk the layers back.
    std::vector<int> out(topics_.size(), -1);
    const auto& last = layers.back();
    std::size_t at = 0;
    for (std::size_t s = 1; s < last.size(); ++s) {
      if (last[s].value > last[at].value) at = s;
    }
    for (std::size_t p = points_.size(); p-- > 0;) {
      const auto& entry = layers[2 * p + 1][at];
      for (std::size_t b = 0; b < open_[p].size(); ++b) {
        if (entry.taken >> b & 1U) out[open_[p][b]] = points_[p];
      }
      at = layers[2 * p][entry.from].from;
    }
    return out;
  }

 private:
  std::size_t position(int point) const {
    return static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), point) - points_.begin());
  }
  double length(std::size_t k) const { return problem_.lengths[static_cast<std::size_t>(topics_[k])]; }

  const Problem& problem_;
  const std::vector<int>& topics_;
  const std::vector<double>& residual_;
  std::vector<int> points_;
  std::vector<std::vector<std::size_t>> open_;
  std::size_t width_ = 0;
};

// Exact sweep over one component's topics, ordered by first offered point,
// for lengths that are whole multiples of a common unit (speech lengths are
// word counts over a fixed rate). The state is the load, in units, of every
// point that both an earlier and a later topic can use.
class LoadSweep {
 public:
  static constexpr int kMaxDenominator = 1000;

  LoadSweep(const Problem& problem, const std::vector<int>& topics, const std::vector<double>& residual)
      : problem_(problem), residual_(residual) {
    order_ = topics;
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      const auto& oa = problem_.options[static_cast<std::size_t>(a)];
      const auto& ob = problem_.options[static_cast<std::size_t>(b)];
      return std::pair(oa.front().point, oa.back().point) < std::pair(ob.front().point, ob.back().point);
    });
    if (!find_unit()) return;
    usable_ = true;
    std::vector<std::int64_t> demand(residual_.size(), 0);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      for (const auto& o : options(i)) demand[static_cast<std::size_t>(o.point)] += units_[i];
    }
    capacity_.assign(residual_.size(), 0);
    for (std::size_t j = 0; j < residual_.size(); ++j) {
      if (demand[j] == 0) continue;
      const auto cap = static_cast<std::int64_t>(std::floor((residual_[j] + kEps) * denominator_));
      capacity_[j] = std::min(cap, demand[j]);
    }
    // live_[i]: points carried into step i, used both before and from i on.
    const std::size_t n = order_.size();
    std::vector<std::set<int>> after(n + 1);
    for (std::size_t i = n; i-- > 0;) {
      after[i] = after[i + 1];
      for (const auto& o : options(i)) after[i].insert(o.point);
    }
    std::set<int> before;
    live_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
      for (int j : before) {
        if (after[i].contains(j)) live_[i].push_back(j);
      }
      if (i < n) {
        for (const auto& o : options(i)) before.insert(o.point);
      }
    }
  }

  bool usable() const { return usable_; }

  // Upper bound on the transitions run() makes.
  double cost() const {
    if (!usable_) return std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      double states = 1.0;
      for (int j : live_[i]) states *= static_cast<double>(capacity_[static_cast<std::size_t>(j)] + 1);
      total += states * static_cast<double>(options(i).size() + 1);
    }
    return total;
  }

  // Choice per topic in the order the constructor received them.
  std::vector<int> run(const std::vector<int>& topics, std::size_t& nodes) {
    struct Entry {
      double value;
      std::size_t from;
      int point;  // choice for the step's topic, -1 discard
    };
    const std::size_t n = order_.size();
    prepare_bounds();
    std::vector<std::int64_t> loads(capacity_.size(), 0);
    double floor_value = 0.0;

    std::vector<std::vector<Entry>> layers(n + 1);
    std::vector<std::uint64_t> keys = {0};
    layers[0].push_back({0.0, 0, -1});
    std::unordered_map<std::uint64_t, std::size_t> index;
    const auto decode = [&](const std::vector<int>& live, const std::vector<std::uint64_t>& stride, std::uint64_t key) {
      std::int64_t total = 0;
      for (std::size_t d = live.size(); d-- > 0;) {
        const auto v = static_cast<std::int64_t>(key / stride[d]);
        loads[static_cast<std::size_t>(live[d])] = v;
        total += v;
        key %= stride[d];
      }
      return total;
    };
    for (std::size_t i = 0; i < n; ++i) {
      const auto& from_live = live_[i];
      const auto& to_live = live_[i + 1];
      const auto from_strides = strides(from_live);
      const auto to_strides = strides(to_live);

      // Complete the best state so far greedily; its value is a floor.
      std::size_t leader = 0;
      for (std::size_t s = 1; s < layers[i].size(); ++s) {
        if (layers[i][s].value > layers[i][leader].value) leader = s;
      }
      std::fill(loads.begin(), loads.end(), 0);
      decode(from_live, from_strides, keys[leader]);
      floor_value = std::max(floor_value, layers[i][leader].value + complete_greedily(i, loads));

      std::vector<std::uint64_t> next_keys;
      index.clear();
      const auto emit = [&](std::size_t s, int point, double value) {
        std::uint64_t key = 0;
        for (std::size_t d = 0; d < to_live.size(); ++d) {
          key += static_cast<std::uint64_t>(loads[static_cast<std::size_t>(to_live[d])]) * to_strides[d];
        }
        const auto [it, fresh] = index.try_emplace(key, layers[i + 1].size());
        if (fresh) {
          layers[i + 1].push_back({value, s, point});
          next_keys.push_back(key);
        } else if (value > layers[i + 1][it->second].value) {
          layers[i + 1][it->second] = {value, s, point};
        }
      };
      std::fill(loads.begin(), loads.end(), 0);
      for (std::size_t s = 0; s < layers[i].size(); ++s) {
        const double value = layers[i][s].value;
        const auto used = decode(from_live, from_strides, keys[s]);
        // Strictly worse than a known assignment whatever follows.
        if (value + fractional_bound(i, free_after_[i] - used) < floor_value - kEps) continue;
        ++nodes;
        emit(s, -1, value);
        for (const auto& o : options(i)) {
          if (!(o.reward > 0.0)) continue;
          auto& load = loads[static_cast<std::size_t>(o.point)];
          if (load + units_[i] > capacity_[static_cast<std::size_t>(o.point)]) continue;
          load += units_[i];
          ++nodes;
          emit(s, o.point, value + o.reward);
          load -= units_[i];
        }
        for (const auto& o : options(i)) loads[static_cast<std::size_t>(o.point)] = 0;
      }
      for (int j : from_live) loads[static_cast<std::size_t>(j)] = 0;
      keys = std::move(next_keys);
      layers[i].shrink_to_fit();
    }

    std::vector<int> by_order(n, -1);
    if (!layers[n].empty()) {
      std::size_t at = 0;
      for (std::size_t i = n; i-- > 0;) {
        by_order[i] = layers[i + 1][at].point;
        at = layers[i + 1][at].from;
      }
    }
    std::map<int, int> choice_of;
    for (std::size_t i = 0; i < n; ++i) choice_of[order_[i]] = by_order[i];
    std::vector<int> out;
    for (int t : topics) out.push_back(choice_of.at(t));
    return out;
  }

 private:
  const std::vector<Option>& options(std::size_t i) const { return problem_.options[static_cast<std::size_t>(order_[i])]; }

  bool find_unit() {
    for (int q = 1; q <= kMaxDenominator; ++q) {
      units_.clear();
      bool ok = true;
      for (int t : order_) {
        const double l = problem_.lengths[static_cast<std::size_t>(t)];
        const auto u = std::llround(l * q);
        if (l < 0.0 || std::abs(static_cast<double>(u) / q - l) > 1e-12 * std::max(1.0, l)) {
          ok = false;
          break;
        }
        units_.push_back(u);
      }
      if (ok) {
        denominator_ = q;
        return true;
      }
    }
    return false;
  }

  std::vector<std::uint64_t> strides(const std::vector<int>& live) const {
    std::vector<std::uint64_t> out;
    std::uint64_t stride = 1;
    for (int j : live) {
      out.push_back(stride);
      stride *= static_cast<std::uint64_t>(capacity_[static_cast<std::size_t>(j)] + 1);
    }
    return out;
  }

  // Topics from `from` on, each into its best fitting option. Updates `loads`.
  double complete_greedily(std::size_t from, std::vector<std::int64_t>& loads) const {
    double total = 0.0;
    for (std::size_t i = from; i < order_.size(); ++i) {
      const Option* best = nullptr;
      for (const auto& o : options(i)) {
        if (o.reward > 0.0 && loads[static_cast<std::size_t>(o.point)] + units_[i] <= capacity_[static_cast<std::size_t>(o.point)] &&
            (!best || o.reward > best->reward)) {
          best = &o;
        }
      }
      if (!best) continue;
      loads[static_cast<std::size_t>(best->point)] += units_[i];
      total += best->reward;
    }
    return total;
  }

  // Per step: the remaining topics by reward per unit, as prefix sums, and the
  // capacity of every point they can still use.
  void prepare_bounds() {
    const std::size_t n = order_.size();
    prefix_units_.assign(n + 1, {});
    prefix_reward_.assign(n + 1, {});
    density_.assign(n + 1, {});
    free_after_.assign(n + 1, 0);
    std::set<int> after;
    for (std::size_t i = n + 1; i-- > 0;) {
      if (i < n) {
        for (const auto& o : options(i)) after.insert(o.point);
      }
      for (int j : after) free_after_[i] += capacity_[static_cast<std::size_t>(j)];
      std::vector<std::pair<double, std::size_t>> items;
      for (std::size_t t = i; t < n; ++t) {
        double top = 0.0;
        for (const auto& o : options(t)) top = std::max(top, o.reward);
        if (top <= 0.0) continue;
        const double density = units_[t] == 0 ? std::numeric_limits<double>::infinity() : top / static_cast<double>(units_[t]);
        items.push_back({density, t});
      }
      std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
      prefix_units_[i] = {0};
      prefix_reward_[i] = {0.0};
      for (const auto& [density, t] : items) {
        double top = 0.0;
        for (const auto& o : options(t)) top = std::max(top, o.reward);
        prefix_units_[i].push_back(prefix_units_[i].back() + units_[t]);
        prefix_reward_[i].push_back(prefix_reward_[i].back() + top);
        density_[i].push_back(density);
      }
    }
  }

  // Fractional knapsack over the remaining topics with `room` units in total.
  double fractional_bound(std::size_t i, std::int64_t room) const {
    const auto& pu = prefix_units_[i];
    const auto k = static_cast<std::size_t>(std::upper_bound(pu.begin(), pu.end(), room) - pu.begin()) - 1;
    double bound = prefix_reward_[i][k];
    if (k < density_[i].size()) bound += static_cast<double>(room - pu[k]) * density_[i][k];
    return bound;
  }

  const Problem& problem_;
  const std::vector<double>& residual_;
  std::vector<int> order_;
  bool usable_ = false;
  int denominator_ = 1;
  std::vector<std::int64_t> units_;
  std::vector<std::int64_t> capacity_;  // per point index; 0 outside this component
  std::vector<std::vector<int>> live_;
  std::vector<std::vector<std::int64_t>> prefix_units_;
  std::vector<std::vector<double>> prefix_reward_;
  std::vector<std::vector<double>> density_;
  std::vector<std::int64_t> free_after_;
};

inline int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace detail

/// Exact maximizer of the summed option rewards subject to point capacities.
///
/// Options that cannot fit an empty point or carry negative reward are
/// dropped up front. Topics sharing no point are solved independently. The
/// search is deterministic, so equal inputs always give the same assignment.
/// `method` forces one algorithm for every component; Auto picks per
/// component (see kLoadBudget). A forced load sweep on lengths without a
/// common unit falls back to branch and bound.
inline Solution solve_exact(const Problem& input, Method method = Method::Auto) {
  const std::size_t n = input.lengths.size();
  if (input.options.size() != n) throw Error(ErrorCode::InvalidInput, "one option list per topic required");
  Problem problem = input;
  for (std::size_t i = 0; i < n; ++i) {
    auto& opts = problem.options[i];
    std::erase_if(opts, [&](const Option& o) {
      return o.point < 0 || static_cast<std::size_t>(o.point) >= problem.capacities.size() || o.reward < 0.0 ||
             problem.lengths[i] > problem.capacities[static_cast<std::size_t>(o.point)] + kEps;
    });
    std::stable_sort(opts.begin(), opts.end(), [](const Option& a, const Option& b) { return a.point < b.point; });
    opts.erase(std::unique(opts.begin(), opts.end(), [](const Option& a, const Option& b) { return a.point == b.point; }),
               opts.end());
  }

  std::vector<int> parent(problem.capacities.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& opts : problem.options) {
    for (std::size_t k = 1; k < opts.size(); ++k) {
      const int a = detail::find_root(parent, opts[0].point);
      const int b = detail::find_root(parent, opts[k].point);
      if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
  }
  std::map<int, std::vector<int>> components;
  for (std::size_t i = 0; i < n; ++i) {
    if (!problem.options[i].empty()) components[detail::find_root(parent, problem.options[i][0].point)].push_back(static_cast<int>(i));
  }

  Solution solution;
  solution.choice.assign(n, -1);
  std::vector<double> residual = problem.capacities;
  for (auto& [root, topics] : components) {
    detail::PointSweep sweep(problem, topics, residual);
    detail::LoadSweep loads(problem, topics, residual);
    Method use = method;
    if (use == Method::Auto) {
      if (loads.cost() <= kLoadBudget) {
        use = Method::LoadSweep;
      } else if (sweep.width() <= kSweepWidth) {
        use = Method::PointSweep;
      } else {
        // Bounds prune most load states in practice; prefer it when it applies.
        use = loads.usable() ? Method::LoadSweep : Method::BranchAndBound;
      }
    }
    if (use == Method::LoadSweep && !loads.usable()) use = Method::BranchAndBound;
    std::vector<int> picked;
    if (use == Method::PointSweep) {
      picked = sweep.run(solution.nodes);
    } else if (use == Method::LoadSweep) {
      picked = loads.run(topics, solution.nodes);
    } else {
      detail::ComponentSearch search(problem, topics, residual);
      picked = search.run(solution.nodes);
    }
    for (std::size_t k = 0; k < topics.size(); ++k) solution.choice[static_cast<std::size_t>(topics[k])] = picked[k];
  }
  solution.objective = objective_of(problem, solution.choice);
  return solution;
}

/// Builds the index-based problem from topics, points, and scores, solves it,
/// and orders each point's topics for playback.
inline Assignment solve(const std::vector<Topic>& topics, const std::vector<InsertionPoint>& points,
                        const std::vector<CandidateSet>& candidates, const std::vector<InsertionScore>& scores,
                        const ScoringConfig& config = {});

/// Sorts each point's topics by TQ descending, then earliest first comment,
/// then topic id.
inline Assignment order_within_points(Assignment assignment, const std::vector<Topic>& topics) {
  std::map<int, const Topic*> by_id;
  for (const auto& t : topics) by_id[t.id] = &t;
  assignment.per_point_order.clear();
  for (const auto& [topic_id, point] : assignment.placements) {
    if (point) assignment.per_point_order[*point].push_back(topic_id);
  }
  for (auto& [point, order] : assignment.per_point_order) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      const auto* ta = by_id.at(a);
      const auto* tb = by_id.at(b);
      if (ta->scores.tq != tb->scores.tq) return ta->scores.tq > tb->scores.tq;
      if (ta->first_comment_ms() != tb->first_comment_ms()) return ta->first_comment_ms() < tb->first_comment_ms();
      return a < b;
    });
  }
  return assignment;
}

inline Assignment solve(const std::vector<Topic>& topics, const std::vector<InsertionPoint>& points,
                        const std::vector<CandidateSet>& candidates, const std::vector<InsertionScore>& scores,
                        const ScoringConfig& config) {
  std::vector<const Topic*> topic_order;
  for (const auto& t : topics) topic_order.push_back(&t);
  std::stable_sort(topic_order.begin(), topic_order.end(), [](const Topic* a, const Topic* b) { return a->id < b->id; });
  std::vector<const InsertionPoint*> point_order;
  for (const auto& p : points) point_order.push_back(&p);
  std::stable_sort(point_order.begin(), point_order.end(),
                   [](const InsertionPoint* a, const InsertionPoint* b) { return a->id < b->id; });

  std::map<int, int> point_index;
  Problem problem;
  for (std::size_t j = 0; j < point_order.size(); ++j) {
    point_index[point_order[j]->id] = static_cast<int>(j);
    problem.capacities.push_back(point_order[j]->capacity_s);
  }
  std::map<std::pair<int, int>, double> iq;
  for (const auto& s : scores) iq[{s.topic_id, s.point_id}] = s.iq;
  std::map<int, const CandidateSet*> candidate_of;
  for (const auto& c : candidates) candidate_of[c.topic_id] = &c;

  for (const auto* t : topic_order) {
    problem.lengths.push_back(t->length_s);
    auto& opts = problem.options.emplace_back();
    const auto it = candidate_of.find(t->id);
    if (it == candidate_of.end()) continue;
    for (int point_id : it->second->point_ids) {
      const auto pi = point_index.find(point_id);
      const auto si = iq.find({t->id, point_id});
      if (pi == point_index.end() || si == iq.end()) {
        throw Error(ErrorCode::InvalidInput, "missing point or score for topic " + std::to_string(t->id) +
                                                 " at point " + std::to_string(point_id));
      }
      opts.push_back({pi->second, scoring::reward(t->scores.tq, si->second, config)});
    }
  }

  const auto solution = solve_exact(problem);
  Assignment out;
  for (std::size_t i = 0; i < topic_order.size(); ++i) {
    const int c = solution.choice[i];
    out.placements[topic_order[i]->id] =
        c < 0 ? std::nullopt : std::optional<int>(point_order[static_cast<std::size_t>(c)]->id);
  }
  out.objective = solution.objective;
  return order_within_points(std::move(out), topics);
}

inline nlohmann::json debug_dump(const Problem& problem, const Solution& solution) {
  nlohmann::json topics = nlohmann::json::array();
  for (std::size_t i = 0; i < problem.lengths.size(); ++i) {
    nlohmann::json opts = nlohmann::json::array();
    for (const auto& o : problem.options[i]) opts.push_back({{"point", o.point}, {"reward", o.reward}});
    topics.push_back({{"length_s", problem.lengths[i]}, {"options", opts}});
  }
  return {{"topics", topics},
          {"capacities", problem.capacities},
          {"choice", solution.choice},
          {"objective", solution.objective},
          {"nodes", solution.nodes}};
}

}  // namespace optimizer

inline void to_json(nlohmann::json& j, const CandidateSet& c) { j = {{"topic_id", c.topic_id}, {"point_ids", c.point_ids}}; }
inline void from_json(const nlohmann::json& j, CandidateSet& c) {
  j.at("topic_id").get_to(c.topic_id);
  j.at("point_ids").get_to(c.point_ids);
}

inline void to_json(nlohmann::json& j, const Assignment& a) {
  nlohmann::json placements = nlohmann::json::array();
  for (const auto& [topic, point] : a.placements) {
    placements.push_back({{"topic_id", topic}, {"point_id", point ? nlohmann::json(*point) : nlohmann::json(nullptr)}});
  }
  nlohmann::json order = nlohmann::json::array();
  for (const auto& [point, topics] : a.per_point_order) order.push_back({{"point_id", point}, {"topic_ids", topics}});
  j = {{"placements", placements}, {"objective", a.objective}, {"per_point_order", order}};
}
inline void from_json(const nlohmann::json& j, Assignment& a) {
  a = {};
  for (const auto& p : j.at("placements")) {
    const auto& point = p.at("point_id");
    a.placements[p.at("topic_id").get<int>()] = point.is_null() ? std::nullopt : std::optional<int>(point.get<int>());
  }
  j.at("objective").get_to(a.objective);
  for (const auto& o : j.at("per_point_order")) a.per_point_order[o.at("point_id").get<int>()] = o.at("topic_ids").get<std::vector<int>>();
}

}  // namespace commentcast
