#include "dnnpart/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "dnnpart/error.hpp"

namespace dnnpart {

namespace {

std::pair<std::int64_t, double> best_of(const MeasurementTable& table,
                                        const MeasurementTable::CutMap& cuts) {
  // Cuts are iterated in ascending order, and minCoeff keeps the first
  // minimum, which gives the smallest-cut tie-break.
  Eigen::VectorXd latencies(static_cast<Eigen::Index>(cuts.size()));
  std::vector<std::int64_t> ids;
  ids.reserve(cuts.size());
  for (const auto& [cut, stats] : cuts) {
    latencies(static_cast<Eigen::Index>(ids.size())) = table.value(stats);
    ids.push_back(cut);
  }
  Eigen::Index best = 0;
  const double latency = latencies.minCoeff(&best);
  return {ids[static_cast<std::size_t>(best)], latency};
}

double gain_pct(double static_latency, double best_latency) {
  return 100.0 * (static_latency - best_latency) / static_latency;
}

double default_baseline(Axis axis, const AxisSlice& slice) {
  return axis == Axis::net ? slice.keys.rbegin()->first : slice.keys.begin()->first;
}

// Levels ordered away from the baseline: ascending stress, descending rate.
std::vector<double> report_levels(const AxisSlice& slice) {
  std::vector<double> levels;
  for (const auto& [level, key] : slice.keys) levels.push_back(level);
  if (slice.axis == Axis::net) std::reverse(levels.begin(), levels.end());
  return levels;
}

}  // namespace

std::string_view to_string(Axis axis) {
  switch (axis) {
    case Axis::cpu: return "cpu";
    case Axis::mem: return "mem";
    case Axis::net: return "net";
  }
  return "cpu";
}

std::optional<Axis> parse_axis(std::string_view text) {
  if (text == "cpu") return Axis::cpu;
  if (text == "mem") return Axis::mem;
  if (text == "net") return Axis::net;
  return std::nullopt;
}

double ConditionKey::level(Axis axis) const {
  switch (axis) {
    case Axis::cpu: return cpu_stress;
    case Axis::mem: return mem_stress;
    case Axis::net: return net_rate_mbps;
  }
  return 0.0;
}

std::string level_label(Axis axis, double level) {
  std::ostringstream os;
  if (axis == Axis::net) {
    os << to_string(axis) << ' ' << level << "Mb/s";
  } else {
    os << to_string(axis) << ' ' << std::round(level * 1000.0) / 10.0 << '%';
  }
  return os.str();
}

MeasurementTable MeasurementTable::from_records(std::span<const MeasurementRecord> records,
                                                Aggregate aggregate) {
  MeasurementTable table(aggregate);
  for (const auto& r : records) table.add(r);
  return table;
}

void MeasurementTable::add(const MeasurementRecord& r) {
  ConditionKey key{r.model, r.platform, r.cpu_stress, r.mem_stress, r.net_rate_mbps};
  CutStats& stats = groups_[std::move(key)][r.cut_after];
  ++stats.count;
  // Running mean: identical repetitions reproduce the value exactly.
  stats.mean += (r.latency_s - stats.mean) / static_cast<double>(stats.count);
  if (aggregate_ == Aggregate::median) stats.samples.push_back(r.latency_s);
  ++records_;
}

double MeasurementTable::value(const CutStats& stats) const {
  if (aggregate_ == Aggregate::mean || stats.samples.empty()) return stats.mean;
  std::vector<double> s = stats.samples;
  const std::size_t mid = s.size() / 2;
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid), s.end());
  const double upper = s[mid];
  if (s.size() % 2 == 1) return upper;
  const double lower = *std::max_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::optional<double> MeasurementTable::latency(const ConditionKey& key,
                                                std::int64_t cut_after) const {
  auto g = groups_.find(key);
  if (g == groups_.end()) return std::nullopt;
  auto c = g->second.find(cut_after);
  if (c == g->second.end()) return std::nullopt;
  return value(c->second);
}

std::vector<OptimalCut> optimal_cuts(const MeasurementTable& table) {
  if (table.empty()) throw AnalysisError("no measurement records");
  std::vector<OptimalCut> out;
  out.reserve(table.groups().size());
  for (const auto& [key, cuts] : table.groups()) {
    const auto [cut, latency] = best_of(table, cuts);
    out.push_back({key, cut, latency});
  }
  return out;
}

std::vector<OptimalCut> optimal_cuts(std::span<const MeasurementRecord> records) {
  return optimal_cuts(MeasurementTable::from_records(records));
}

std::vector<CutShare> topk_distribution(std::span<const OptimalCut> optima, std::size_t k) {
  if (k == 0) throw AnalysisError("top-k needs k >= 1");
  if (optima.empty()) throw AnalysisError("no optimal cuts to summarize");
  std::map<std::int64_t, std::size_t> counts;
  for (const auto& o : optima) ++counts[o.cut_after];
  std::vector<std::pair<std::int64_t, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<CutShare> out;
  const double total = static_cast<double>(optima.size());
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
    out.push_back({ranked[i].first, 100.0 * static_cast<double>(ranked[i].second) / total});
  }
  return out;
}

std::vector<AxisSlice> axis_slices(const MeasurementTable& table, Axis axis) {
  if (table.empty()) throw AnalysisError("no measurement records");

  struct Extent {
    std::set<double> levels;
    double min_cpu = INFINITY, min_mem = INFINITY, max_net = -INFINITY;
  };
  std::map<std::pair<std::string, std::string>, Extent> extents;
  for (const auto& [key, cuts] : table.groups()) {
    Extent& e = extents[{key.model, key.platform}];
    e.levels.insert(key.level(axis));
    e.min_cpu = std::min(e.min_cpu, key.cpu_stress);
    e.min_mem = std::min(e.min_mem, key.mem_stress);
    e.max_net = std::max(e.max_net, key.net_rate_mbps);
  }

  std::vector<AxisSlice> out;
  for (const auto& [id, e] : extents) {
    AxisSlice slice{id.first, id.second, axis, {}};
    for (const auto& [key, cuts] : table.groups()) {
      if (key.model != id.first || key.platform != id.second) continue;
      const bool cpu_ok = axis == Axis::cpu || key.cpu_stress == e.min_cpu;
      const bool mem_ok = axis == Axis::mem || key.mem_stress == e.min_mem;
      const bool net_ok = axis == Axis::net || key.net_rate_mbps == e.max_net;
      if (cpu_ok && mem_ok && net_ok) slice.keys.emplace(key.level(axis), key);
    }
    for (double level : e.levels) {
      if (!slice.keys.contains(level)) {
        throw AnalysisError("model '" + id.first + "' on '" + id.second + "': level " +
                            level_label(axis, level) + " missing at the baseline of other axes");
      }
    }
    out.push_back(std::move(slice));
  }
  return out;
}

std::vector<SensitivityResult> sensitivity(const MeasurementTable& table, Axis axis,
                                           SensitivityOptions options) {
  std::vector<SensitivityResult> out;
  for (const AxisSlice& slice : axis_slices(table, axis)) {
    SensitivityResult res{slice.model, slice.platform, axis, false, 0.0, {}};
    for (const auto& [level, key] : slice.keys) {
      res.optima.emplace_back(level, best_of(table, table.groups().at(key)).first);
    }
    for (const auto& row : gain_table(table, axis)) {
      if (row.model == slice.model && row.platform == slice.platform) {
        res.max_gain_pct = std::max(res.max_gain_pct, row.gain_pct);
      }
    }
    if (options.rule == SensitivityRule::optimum_shift) {
      res.sensitive = std::any_of(res.optima.begin(), res.optima.end(),
                                  [&](const auto& o) { return o.second != res.optima.front().second; });
    } else {
      res.sensitive = res.max_gain_pct >= options.threshold_pct;
    }
    out.push_back(std::move(res));
  }
  return out;
}

std::vector<GainRow> gain_table(const MeasurementTable& table, Axis axis,
                                std::optional<double> baseline_level) {
  std::vector<GainRow> rows;
  for (const AxisSlice& slice : axis_slices(table, axis)) {
    const double baseline = baseline_level.value_or(default_baseline(axis, slice));
    auto base_it = slice.keys.find(baseline);
    if (base_it == slice.keys.end()) {
      throw AnalysisError("model '" + slice.model + "': baseline level " +
                          level_label(axis, baseline) + " not present");
    }
    const std::int64_t static_cut = best_of(table, table.groups().at(base_it->second)).first;

    for (double level : report_levels(slice)) {
      if (level == baseline) continue;
      const ConditionKey& key = slice.keys.at(level);
      const auto static_latency = table.latency(key, static_cut);
      if (!static_latency) {
        throw AnalysisError("model '" + slice.model + "': no measurements for cut " +
                            std::to_string(static_cut + 1) + " at " + level_label(axis, level));
      }
      const auto [best_cut, best_latency] = best_of(table, table.groups().at(key));
      rows.push_back(GainRow{slice.model, slice.platform, axis, level, level_label(axis, level),
                             static_cut, *static_latency, best_cut, best_latency,
                             gain_pct(*static_latency, best_latency)});
    }
  }
  return rows;
}

}  // namespace dnnpart
