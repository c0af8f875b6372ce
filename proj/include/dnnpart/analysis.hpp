#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnnpart/records.hpp"

namespace dnnpart {

enum class Axis { cpu, mem, net };

std::string_view to_string(Axis axis);
std::optional<Axis> parse_axis(std::string_view text);

/// Grouping dimensions for aggregation: one model on one platform under one
/// operational condition.
struct ConditionKey {
  std::string model;
  std::string platform;
  double cpu_stress = 0.0;
  double mem_stress = 0.0;
  double net_rate_mbps = 0.0;

  auto operator<=>(const ConditionKey&) const = default;
  bool operator==(const ConditionKey&) const = default;

  double level(Axis axis) const;
};

enum class Aggregate { mean, median };

/// Streaming group-by of measurement records into per-(key, cut) statistics.
/// Mean aggregation keeps O(1) state per group; median keeps the samples.
class MeasurementTable {
 public:
  struct CutStats {
    std::size_t count = 0;
    double mean = 0.0;
    std::vector<double> samples;
  };
  using CutMap = std::map<std::int64_t, CutStats>;

  explicit MeasurementTable(Aggregate aggregate = Aggregate::mean) : aggregate_(aggregate) {}

  static MeasurementTable from_records(std::span<const MeasurementRecord> records,
                                       Aggregate aggregate = Aggregate::mean);

  void add(const MeasurementRecord& record);

  bool empty() const { return groups_.empty(); }
  std::size_t record_count() const { return records_; }
  const std::map<ConditionKey, CutMap>& groups() const { return groups_; }
  Aggregate aggregate() const { return aggregate_; }

  /// Aggregated latency of one cut under one key, if observed.
  std::optional<double> latency(const ConditionKey& key, std::int64_t cut_after) const;
  double value(const CutStats& stats) const;

 private:
  Aggregate aggregate_;
  std::map<ConditionKey, CutMap> groups_;
  std::size_t records_ = 0;
};

struct OptimalCut {
  ConditionKey key;
  std::int64_t cut_after = 0;
  double latency_s = 0.0;

  /// 1-based report label.
  std::int64_t label() const { return cut_after + 1; }
};

/// Per key, the cut with the lowest aggregated latency (ties: smallest cut).
/// Ordered by key. Throws AnalysisError on empty input.
std::vector<OptimalCut> optimal_cuts(const MeasurementTable& table);
std::vector<OptimalCut> optimal_cuts(std::span<const MeasurementRecord> records);

struct CutShare {
  std::int64_t cut_after = 0;
  double percent = 0.0;

  bool operator==(const CutShare&) const = default;
};

/// k most frequent optimal cuts, as a percentage of all optima, most
/// frequent first (ties: smaller cut first).
std::vector<CutShare> topk_distribution(std::span<const OptimalCut> optima, std::size_t k);

/// Axis levels of one model/platform with the other two axes held at their
/// baseline (minimum stress, maximum network rate).
struct AxisSlice {
  std::string model;
  std::string platform;
  Axis axis = Axis::cpu;
  /// Level -> key, in level order.
  std::map<double, ConditionKey> keys;
};

/// One slice per (model, platform). Throws AnalysisError if a level of the
/// axis present in the data is missing at the baseline of the other axes.
std::vector<AxisSlice> axis_slices(const MeasurementTable& table, Axis axis);

enum class SensitivityRule {
  /// Sensitive iff the optimal cut is not identical across all levels.
  optimum_shift,
  /// Sensitive iff the best repartitioning gain reaches a threshold.
  gain_threshold,
};

struct SensitivityOptions {
  SensitivityRule rule = SensitivityRule::optimum_shift;
  double threshold_pct = 5.0;
};

struct SensitivityResult {
  std::string model;
  std::string platform;
  Axis axis = Axis::cpu;
  bool sensitive = false;
  /// Largest gain over the baseline-optimal cut across the axis levels.
  double max_gain_pct = 0.0;
  /// Optimal cut per level, in level order.
  std::vector<std::pair<double, std::int64_t>> optima;
};

std::vector<SensitivityResult> sensitivity(const MeasurementTable& table, Axis axis,
                                           SensitivityOptions options = {});

struct GainRow {
  std::string model;
  std::string platform;
  Axis axis = Axis::cpu;
  double level = 0.0;
  std::string label;
  std::int64_t static_cut = 0;
  double static_latency_s = 0.0;
  std::int64_t best_cut = 0;
  double best_latency_s = 0.0;
  /// 100 * (static - best) / static.
  double gain_pct = 0.0;
};

/// Fix the optimal cut at the baseline level and compare it, at every other
/// level, with that level's optimum. The baseline defaults to 0 stress for
/// cpu/mem and the highest rate for net. Levels run away from the baseline.
std::vector<GainRow> gain_table(const MeasurementTable& table, Axis axis,
                                std::optional<double> baseline_level = std::nullopt);

/// Human-readable condition label, e.g. "cpu 45%" or "net 25Mb/s".
std::string level_label(Axis axis, double level);

}  // namespace dnnpart
