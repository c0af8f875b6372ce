#include "dnnpart/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dnnpart/error.hpp"

namespace dnnpart {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> levels_from_json(const json& doc, const char* key,
                                     std::vector<double> fallback) {
  if (!doc.contains(key)) return fallback;
  const json& arr = doc[key];
  if (!arr.is_array()) throw ParseError(std::string("grid document: '") + key + "' must be an array");
  std::vector<double> out;
  for (const json& v : arr) {
    if (!v.is_number()) throw ParseError(std::string("grid document: '") + key + "' entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

constexpr std::size_t kWindowPerJob = 16;

}  // namespace

void ConditionGrid::validate() const {
  if (cpu_levels.empty() || mem_levels.empty() || net_levels.empty()) {
    throw ValidationError("condition grid: every axis needs at least one level");
  }
  if (repetitions < 1) throw ValidationError("condition grid: repetitions must be >= 1");
  for (const auto& cond : combinations()) cond.validate();
}

std::vector<OperationalCondition> ConditionGrid::combinations() const {
  std::vector<OperationalCondition> out;
  out.reserve(cpu_levels.size() * mem_levels.size() * net_levels.size());
  for (double cpu : cpu_levels) {
    for (double mem : mem_levels) {
      for (double net : net_levels) out.push_back({cpu, mem, net});
    }
  }
  return out;
}

ConditionGrid default_grid() {
  return ConditionGrid{{0.0, 0.22, 0.45, 0.67, 0.90},
                       {0.0, 0.22, 0.45, 0.67, 0.90},
                       {10.0, 25.0, 37.5, 50.0},
                       10};
}

ConditionGrid load_grid(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("grid document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("grid document: top level must be an object");
  const ConditionGrid d = default_grid();
  ConditionGrid g;
  g.cpu_levels = levels_from_json(doc, "cpu", d.cpu_levels);
  g.mem_levels = levels_from_json(doc, "mem", d.mem_levels);
  g.net_levels = levels_from_json(doc, "net", d.net_levels);
  g.repetitions = d.repetitions;
  if (doc.contains("repetitions")) {
    if (!doc["repetitions"].is_number_integer()) {
      throw ParseError("grid document: 'repetitions' must be an integer");
    }
    g.repetitions = doc["repetitions"].get<int>();
  }
  g.validate();
  return g;
}

ConditionGrid load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_grid(buffer.str());
}

std::size_t run_sweep(const DnnGraph& graph, const ConditionGrid& grid, const CostModel& model,
                      const SweepOptions& options, const RecordSink& sink) {
  grid.validate();
  if (!(options.noise >= 0.0)) throw ValidationError("noise must be >= 0");
  const auto cuts = enumerate_cutpoints(graph, options.cuts);
  if (cuts.empty()) throw ValidationError("graph '" + graph.name() + "' has no cut points");
  const auto conditions = grid.combinations();
  const std::string platform =
      options.platform.empty() ? model.edge_profile + "+" + model.cloud_profile : options.platform;
  const auto reps = static_cast<std::size_t>(grid.repetitions);

  // Work item = (cut, condition); each owns a private RNG stream so the
  // result is independent of how items are scheduled.
  const std::size_t total_items = cuts.size() * conditions.size();
  auto evaluate = [&](std::size_t item, std::vector<MeasurementRecord>& out) {
    const std::size_t ci = item / conditions.size();
    const std::size_t ki = item % conditions.size();
    const OperationalCondition& cond = conditions[ki];
    const double total = partition_latency(graph, cuts[ci], cond, model).total_s;
    if (!(total > 0.0)) {
      throw ValidationError("model latency is zero for cut after layer " +
                            std::to_string(cuts[ci].label()) + "; records need positive latency");
    }
    std::mt19937_64 rng(splitmix64(options.seed ^ splitmix64(ci * 0x100000001b3ULL + ki)));
    std::normal_distribution<double> jitter(0.0, options.noise > 0.0 ? options.noise : 1.0);
    out.clear();
    for (std::size_t r = 0; r < reps; ++r) {
      double latency = total;
      if (options.noise > 0.0) latency = total * std::max(1.0 + jitter(rng), 0.1);
      out.push_back(MeasurementRecord{graph.name(), platform, cond.cpu_stress, cond.mem_stress,
                                      cond.net_rate_mbps, cuts[ci].record_id(),
                                      static_cast<std::int64_t>(r), latency});
    }
  };

  const unsigned jobs = std::max(1u, options.jobs);
  const std::size_t window = jobs == 1 ? 1 : jobs * kWindowPerJob;
  std::vector<std::vector<MeasurementRecord>> buffers(window);
  std::size_t emitted = 0;

  for (std::size_t base = 0; base < total_items; base += window) {
    const std::size_t count = std::min(window, total_items - base);
    if (jobs == 1) {
      for (std::size_t i = 0; i < count; ++i) evaluate(base + i, buffers[i]);
    } else {
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::mutex failure_mutex;
      {
        std::vector<std::jthread> workers;
        for (unsigned j = 0; j < std::min<std::size_t>(jobs, count); ++j) {
          workers.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
              try {
                evaluate(base + i, buffers[i]);
              } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
              }
            }
          });
        }
      }
      if (failure) std::rethrow_exception(failure);
    }
    // Order-restoring merge: flush the window in item order.
    for (std::size_t i = 0; i < count; ++i) {
      for (const auto& rec : buffers[i]) sink(rec);
      emitted += buffers[i].size();
    }
  }
  return emitted;
}

}  // namespace dnnpart
