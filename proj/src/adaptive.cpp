#include "dnnpart/adaptive.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dnnpart/error.hpp"
#include "dnnpart/records.hpp"

namespace dnnpart {

namespace {

using nlohmann::json;

double number_field(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key) || !obj[key].is_number()) {
    throw ParseError("scenario: " + std::string(where) + "." + key + " must be a number");
  }
  return obj[key].get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) return std::nullopt;
  return number_field(obj, key, where);
}

}  // namespace

Planner::Planner(const DnnGraph& graph, CostModel model, CutOptions cuts, unsigned jobs)
    : graph_(graph),
      model_(std::move(model)),
      cuts_(enumerate_cutpoints(graph, cuts)),
      jobs_(std::max(1u, jobs)) {
  if (!graph_.profile_column(model_.edge_profile)) {
    throw ValidationError("unknown device profile '" + model_.edge_profile + "'");
  }
  if (!graph_.profile_column(model_.cloud_profile)) {
    throw ValidationError("unknown device profile '" + model_.cloud_profile + "'");
  }
}

LatencyEstimate Planner::latency(std::size_t cut_index, const OperationalCondition& cond) const {
  return partition_latency(graph_, cuts_.at(cut_index), cond, model_);
}

PlanResult Planner::plan(const OperationalCondition& cond) const {
  cond.validate();
  if (cuts_.empty()) throw ValidationError("graph '" + graph_.name() + "' has no cut points");

  std::vector<LatencyEstimate> estimates(cuts_.size());
  if (jobs_ == 1 || cuts_.size() < 2 * jobs_) {
    for (std::size_t i = 0; i < cuts_.size(); ++i) estimates[i] = latency(i, cond);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (unsigned j = 0; j < jobs_; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < cuts_.size(); i = next++) estimates[i] = latency(i, cond);
      });
    }
  }

  // Serial reduction keeps the tie-break independent of scheduling.
  std::size_t best = 0;
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    if (estimates[i].total_s < estimates[best].total_s) best = i;
  }
  return PlanResult{best, cuts_[best], estimates[best]};
}

PlanResult plan(const DnnGraph& graph, const OperationalCondition& cond, const CostModel& model,
                CutOptions cuts) {
  return Planner(graph, model, cuts).plan(cond);
}

void RepartitionPolicy::validate() const {
  if (!(min_gain_pct >= 0.0)) throw ValidationError("policy: min_gain_pct must be >= 0");
  if (!(switch_overhead_s >= 0.0)) throw ValidationError("policy: switch_overhead_s must be >= 0");
  if (!(cooldown_s >= 0.0)) throw ValidationError("policy: cooldown_s must be >= 0");
}

std::string_view to_string(RepartitionDecision::Action action) {
  return action == RepartitionDecision::Action::keep ? "keep" : "switch";
}

RepartitionDecision decide(const Planner& planner, const DeploymentState& state,
                           const OperationalCondition& cond, const RepartitionPolicy& policy,
                           double now_s) {
  const PlanResult best = planner.plan(cond);
  RepartitionDecision d;
  d.predicted_static_s = planner.latency(state.cut_index, cond).total_s;
  d.predicted_best_s = best.estimate.total_s;
  d.target_index = state.cut_index;
  d.target_cut = state.current_cut;
  if (best.cut_index == state.cut_index) return d;

  d.predicted_gain_pct = 100.0 * (d.predicted_static_s - d.predicted_best_s) / d.predicted_static_s;
  const bool cooled = !state.has_switched || now_s - state.deployed_since_s >= policy.cooldown_s;
  if (d.predicted_gain_pct >= policy.min_gain_pct && cooled) {
    d.action = RepartitionDecision::Action::switch_cut;
    d.target_index = best.cut_index;
    d.target_cut = best.cut;
  }
  return d;
}

void Scenario::validate() const {
  initial.validate();
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (!(events[i].t_s >= 0.0)) throw ValidationError("scenario: event times must be >= 0");
    if (i > 0 && !(events[i].t_s > events[i - 1].t_s)) {
      throw ValidationError("scenario: event times must be strictly increasing (event " +
                            std::to_string(i) + ")");
    }
  }
  for (std::size_t i = 0; i < request_times.size(); ++i) {
    if (!(request_times[i] >= 0.0)) throw ValidationError("scenario: request times must be >= 0");
    if (i > 0 && !(request_times[i] > request_times[i - 1])) {
      throw ValidationError("scenario: request times must be strictly increasing (request " +
                            std::to_string(i) + ")");
    }
  }
  if (policy) policy->validate();
}

Scenario load_scenario(std::string_view document, std::uint64_t seed) {
  json doc;
  try {
    doc = json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("scenario: top level must be an object");
  if (!doc.contains("initial") || !doc["initial"].is_object()) {
    throw ParseError("scenario: missing 'initial' condition");
  }

  Scenario s;
  const json& init = doc["initial"];
  s.initial = {optional_number(init, "cpu", "initial").value_or(0.0),
               optional_number(init, "mem", "initial").value_or(0.0),
               number_field(init, "net", "initial")};

  if (doc.contains("events")) {
    if (!doc["events"].is_array()) throw ParseError("scenario: 'events' must be an array");
    for (const json& e : doc["events"]) {
      if (!e.is_object()) throw ParseError("scenario: events must be objects");
      s.events.push_back({number_field(e, "t_s", "events[]"), optional_number(e, "cpu", "events[]"),
                          optional_number(e, "mem", "events[]"),
                          optional_number(e, "net", "events[]")});
    }
  }

  if (!doc.contains("requests") || !doc["requests"].is_object()) {
    throw ParseError("scenario: missing 'requests' object");
  }
  const json& req = doc["requests"];
  if (req.contains("times")) {
    if (!req["times"].is_array()) throw ParseError("scenario: requests.times must be an array");
    for (const json& t : req["times"]) {
      if (!t.is_number()) throw ParseError("scenario: requests.times entries must be numbers");
      s.request_times.push_back(t.get<double>());
    }
  } else {
    const double rate = number_field(req, "rate_per_s", "requests");
    const double duration = number_field(req, "duration_s", "requests");
    if (!(rate > 0.0) || !(duration >= 0.0)) {
      throw ValidationError("scenario: requests need rate_per_s > 0 and duration_s >= 0");
    }
    const std::string arrival = req.value("arrival", "uniform");
    if (arrival == "uniform") {
      const auto n = static_cast<std::size_t>(std::floor(duration * rate));
      for (std::size_t k = 0; k < n; ++k) s.request_times.push_back(static_cast<double>(k) / rate);
    } else if (arrival == "poisson") {
      std::mt19937_64 rng(seed);
      std::exponential_distribution<double> gap(rate);
      for (double t = gap(rng); t < duration; t += gap(rng)) s.request_times.push_back(t);
    } else {
      throw ParseError("scenario: requests.arrival must be 'uniform' or 'poisson'");
    }
  }

  if (doc.contains("policy")) {
    const json& p = doc["policy"];
    if (!p.is_object()) throw ParseError("scenario: 'policy' must be an object");
    RepartitionPolicy policy;
    policy.min_gain_pct = optional_number(p, "min_gain_pct", "policy").value_or(policy.min_gain_pct);
    policy.switch_overhead_s =
        optional_number(p, "switch_overhead_s", "policy").value_or(policy.switch_overhead_s);
    if (p.contains("cooldown_s") && p["cooldown_s"].is_string() &&
        p["cooldown_s"].get<std::string>() == "inf") {
      policy.cooldown_s = std::numeric_limits<double>::infinity();
    } else {
      policy.cooldown_s = optional_number(p, "cooldown_s", "policy").value_or(policy.cooldown_s);
    }
    s.policy = policy;
  }
  s.validate();
  return s;
}

Scenario load_scenario_file(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_scenario(buffer.str(), seed);
}

SimulationTrace simulate(const Planner& planner, const Scenario& scenario,
                         const RepartitionPolicy& policy, SimulationOptions options) {
  scenario.validate();
  policy.validate();

  OperationalCondition cond = scenario.initial;
  const PlanResult initial = planner.plan(cond);
  DeploymentState state{initial.cut_index, initial.cut, 0.0, false};

  SimulationTrace trace;
  trace.initial_cut = initial.cut.record_id();
  double busy_until = 0.0;
  std::size_t next_event = 0;

  auto apply_event = [&](const ConditionEvent& e) {
    if (e.cpu_stress) cond.cpu_stress = *e.cpu_stress;
    if (e.mem_stress) cond.mem_stress = *e.mem_stress;
    if (e.net_rate_mbps) cond.net_rate_mbps = *e.net_rate_mbps;
    cond.validate();
    if (!options.adaptive) return;

    const std::int64_t from = state.current_cut.record_id();
    RepartitionDecision d = decide(planner, state, cond, policy, e.t_s);
    if (d.action == RepartitionDecision::Action::switch_cut) {
      // The request in service completes, then redeployment is charged.
      busy_until = std::max(busy_until, e.t_s) + policy.switch_overhead_s;
      state = DeploymentState{d.target_index, d.target_cut, e.t_s, true};
      ++trace.switches;
      trace.total_overhead_s += policy.switch_overhead_s;
    }
    trace.decisions.push_back({e.t_s, from, std::move(d)});
  };

  for (std::size_t i = 0; i < scenario.request_times.size(); ++i) {
    const double t = scenario.request_times[i];
    while (next_event < scenario.events.size() && scenario.events[next_event].t_s <= t) {
      apply_event(scenario.events[next_event++]);
    }
    const double start = std::max(t, busy_until);
    const double latency = planner.latency(state.cut_index, cond).total_s;
    busy_until = start + latency;
    trace.requests.push_back({i, t, start, state.current_cut.record_id(), latency, start - t});
    trace.cumulative_latency_s += latency;
  }
  while (next_event < scenario.events.size()) apply_event(scenario.events[next_event++]);

  trace.final_cut = state.current_cut.record_id();
  return trace;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << "kind,t_s,index,action,cut_after,target_cut,latency_s,wait_s,predicted_static_s,"
         "predicted_best_s,gain_pct\n";
  // Rows merged in time order; a decision precedes requests at the same time.
  std::size_t d = 0;
  auto flush_decision = [&](std::size_t index) {
    const DecisionTrace& dt = trace.decisions[index];
    out << "decision," << format_double(dt.t_s) << ',' << index << ','
        << to_string(dt.decision.action) << ',' << dt.from_cut << ','
        << dt.decision.target_cut.record_id() << ",,," << format_double(dt.decision.predicted_static_s)
        << ',' << format_double(dt.decision.predicted_best_s) << ','
        << format_double(dt.decision.predicted_gain_pct) << '\n';
  };
  for (const RequestTrace& r : trace.requests) {
    while (d < trace.decisions.size() && trace.decisions[d].t_s <= r.arrival_s) flush_decision(d++);
    out << "request," << format_double(r.arrival_s) << ',' << r.index << ",serve," << r.cut_after
        << ",," << format_double(r.latency_s) << ',' << format_double(r.wait_s) << ",,,\n";
  }
  while (d < trace.decisions.size()) flush_decision(d++);
}

}  // namespace dnnpart
