#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnnpart/costmodel.hpp"
#include "dnnpart/cutpoints.hpp"
#include "dnnpart/graph.hpp"

namespace dnnpart {

struct PlanResult {
  std::size_t cut_index = 0;
  CutPoint cut;
  LatencyEstimate estimate;
};

/// Exhaustive planner over the cut points of one graph under one cost model.
class Planner {
 public:
  Planner(const DnnGraph& graph, CostModel model, CutOptions cuts = {}, unsigned jobs = 1);

  const DnnGraph& graph() const { return graph_; }
  const CostModel& model() const { return model_; }
  const std::vector<CutPoint>& cuts() const { return cuts_; }

  LatencyEstimate latency(std::size_t cut_index, const OperationalCondition& cond) const;
  /// Lowest-total cut; ties resolve to the earliest cut.
  PlanResult plan(const OperationalCondition& cond) const;

 private:
  const DnnGraph& graph_;
  CostModel model_;
  std::vector<CutPoint> cuts_;
  unsigned jobs_;
};

/// Convenience wrapper constructing a Planner for a single query.
PlanResult plan(const DnnGraph& graph, const OperationalCondition& cond, const CostModel& model,
                CutOptions cuts = {});

struct DeploymentState {
  std::size_t cut_index = 0;
  CutPoint current_cut;
  double deployed_since_s = 0.0;
  /// Cooldown runs from the last switch; the initial deployment does not count.
  bool has_switched = false;
};

/// Defaults are placeholders; set them per deployment.
struct RepartitionPolicy {
  double min_gain_pct = 5.0;
  double switch_overhead_s = 1.0;
  double cooldown_s = 0.0;

  void validate() const;
};

struct RepartitionDecision {
  enum class Action { keep, switch_cut };

  Action action = Action::keep;
  std::size_t target_index = 0;
  CutPoint target_cut;
  double predicted_static_s = 0.0;
  double predicted_best_s = 0.0;
  double predicted_gain_pct = 0.0;
};

std::string_view to_string(RepartitionDecision::Action action);

/// Switch iff the gain reaches min_gain_pct, the optimum differs from the
/// current cut and the cooldown has elapsed.
RepartitionDecision decide(const Planner& planner, const DeploymentState& state,
                           const OperationalCondition& cond, const RepartitionPolicy& policy,
                           double now_s);

struct ConditionEvent {
  double t_s = 0.0;
  std::optional<double> cpu_stress;
  std::optional<double> mem_stress;
  std::optional<double> net_rate_mbps;
};

struct Scenario {
  OperationalCondition initial;
  std::vector<ConditionEvent> events;
  /// Request arrival times, strictly increasing.
  std::vector<double> request_times;
  std::optional<RepartitionPolicy> policy;

  void validate() const;
};

/// {initial:{cpu,mem,net}, events:[{t_s, cpu?, mem?, net?}],
///  requests:{times:[...]} | {rate_per_s, duration_s, arrival?: uniform|poisson},
///  policy?:{min_gain_pct, switch_overhead_s, cooldown_s}}.
/// Poisson arrivals draw from `seed`.
Scenario load_scenario(std::string_view document, std::uint64_t seed = 0);
Scenario load_scenario_file(const std::string& path, std::uint64_t seed = 0);

struct RequestTrace {
  std::size_t index = 0;
  double arrival_s = 0.0;
  double start_s = 0.0;
  std::int64_t cut_after = 0;
  double latency_s = 0.0;
  double wait_s = 0.0;
};

struct DecisionTrace {
  double t_s = 0.0;
  std::int64_t from_cut = 0;
  RepartitionDecision decision;
};

struct SimulationTrace {
  std::vector<RequestTrace> requests;
  std::vector<DecisionTrace> decisions;
  std::size_t switches = 0;
  /// Sum of per-request serving (inference) latency.
  double cumulative_latency_s = 0.0;
  double total_overhead_s = 0.0;
  std::int64_t initial_cut = 0;
  std::int64_t final_cut = 0;
};

struct SimulationOptions {
  /// false keeps the initial deployment for the whole run.
  bool adaptive = true;
};

/// Single-threaded, deterministic discrete-event loop over condition
/// changes and requests. Events at the same instant as a request apply first.
SimulationTrace simulate(const Planner& planner, const Scenario& scenario,
                         const RepartitionPolicy& policy, SimulationOptions options = {});

/// kind,t_s,index,cut_after,target_cut,latency_s,wait_s,predicted_static_s,predicted_best_s,gain_pct
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

}  // namespace dnnpart
