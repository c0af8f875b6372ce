#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dnnpart/costmodel.hpp"
#include "dnnpart/cutpoints.hpp"
#include "dnnpart/records.hpp"

namespace dnnpart {

struct ConditionGrid {
  std::vector<double> cpu_levels;
  std::vector<double> mem_levels;
  std::vector<double> net_levels;
  int repetitions = 1;

  void validate() const;
  /// Every (cpu, mem, net) combination; cpu outermost, net innermost.
  std::vector<OperationalCondition> combinations() const;
};

/// CPU and memory stress {0, .22, .45, .67, .90}, network {10, 25, 37.5, 50} Mb/s,
/// 10 repetitions.
ConditionGrid default_grid();

/// {"cpu": [...], "mem": [...], "net": [...], "repetitions": n}; omitted axes
/// fall back to the default grid.
ConditionGrid load_grid(std::string_view document);
ConditionGrid load_grid_file(const std::string& path);

struct SweepOptions {
  /// Relative standard deviation of multiplicative jitter.
  double noise = 0.02;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  /// Platform column value; defaults to "<edge>+<cloud>".
  std::string platform;
  CutOptions cuts;
};

using RecordSink = std::function<void(const MeasurementRecord&)>;

/// Emits one record per (cut, condition, repetition) in that order, streaming
/// to `sink`. Output depends only on the inputs and seed, not on `jobs`.
/// Returns the record count.
std::size_t run_sweep(const DnnGraph& graph, const ConditionGrid& grid, const CostModel& model,
                      const SweepOptions& options, const RecordSink& sink);

}  // namespace dnnpart
