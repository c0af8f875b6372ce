#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "dnnpart/curve.hpp"
#include "dnnpart/cutpoints.hpp"
#include "dnnpart/graph.hpp"

namespace dnnpart {

/// Edge CPU and memory stress as fractions in [0,1], network rate in Mb/s.
struct OperationalCondition {
  double cpu_stress = 0.0;
  double mem_stress = 0.0;
  double net_rate_mbps = 50.0;

  void validate() const;
  bool operator==(const OperationalCondition&) const = default;
};

/// Slowdown applied to edge compute. CPU and memory multipliers combine
/// multiplicatively.
struct StressResponse {
  StressCurve cpu_curve;
  StressCurve mem_curve;

  double multiplier(const OperationalCondition& cond) const {
    return cpu_curve(cond.cpu_stress) * mem_curve(cond.mem_stress);
  }

  static StressResponse identity() { return {}; }
  /// Calibration knob, not measured data: {0:1, .22:1.15, .45:1.5, .67:2, .9:3}.
  static StressResponse conservative_default();
};

struct NetworkModel {
  /// 1 Mb/s = 10^6 bits/s.
  double rate_mbps = 50.0;
  double base_rtt_s = 0.0;
};

struct LatencyEstimate {
  double edge_s = 0.0;
  double transfer_s = 0.0;
  double cloud_s = 0.0;
  double total_s = 0.0;
};

/// What the cost model needs beyond the graph, cut and condition.
struct CostModel {
  StressResponse response = StressResponse::conservative_default();
  double base_rtt_s = 0.0;
  std::string edge_profile = "edge";
  std::string cloud_profile = "cloud";
};

/// bytes * 8 / (rate * 10^6) + base_rtt.
double transfer_time(std::uint64_t bytes, const NetworkModel& net);

/// edge compute (stressed) + transfer of the crossing tensor + cloud compute.
/// Throws ValidationError for unknown profiles or a cut from another graph.
LatencyEstimate partition_latency(const DnnGraph& graph, const CutPoint& cut,
                                  const OperationalCondition& cond, const CostModel& model);

/// Per-profile calibration: stress response plus fixed round-trip.
struct DeviceCalibration {
  StressResponse response = StressResponse::conservative_default();
  double base_rtt_s = 0.0;
};

/// Calibration document: either one {cpu_curve, mem_curve, base_rtt_s}
/// object applying to all profiles, or a map from profile name to one.
class Calibration {
 public:
  Calibration() = default;
  static Calibration parse(std::string_view document);
  static Calibration load_file(const std::string& path);

  DeviceCalibration for_profile(std::string_view profile) const;
  /// CostModel for the two profiles, using the edge profile's calibration.
  CostModel cost_model(std::string edge_profile, std::string cloud_profile) const;

 private:
  std::optional<DeviceCalibration> shared_;
  std::map<std::string, DeviceCalibration, std::less<>> per_profile_;
};

/// Parse a single curve table such as {"0": 1, "0.9": 3}.
StressCurve parse_stress_curve(std::string_view document);

/// Parse one {cpu_curve, mem_curve} object into a StressResponse.
StressResponse load_stress_response(std::string_view document);

}  // namespace dnnpart
