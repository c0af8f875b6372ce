#include "dnnpart/costmodel.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dnnpart/error.hpp"

namespace dnnpart {

namespace {

using nlohmann::json;

json parse_json(std::string_view document, std::string_view what) {
  try {
    return json::parse(document.begin(), document.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

StressCurve curve_from_json(const json& table, std::string_view what) {
  if (!table.is_object() || table.empty()) {
    throw ParseError(std::string(what) + " must be a non-empty object of stress -> multiplier");
  }
  std::vector<std::pair<double, double>> points;
  for (const auto& [key, value] : table.items()) {
    double stress = 0.0;
    const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), stress);
    if (ec != std::errc() || ptr != key.data() + key.size()) {
      throw ParseError(std::string(what) + ": anchor '" + key + "' is not a number");
    }
    if (!value.is_number()) {
      throw ParseError(std::string(what) + ": multiplier at '" + key + "' is not a number");
    }
    if (stress < 0.0 || stress > 1.0) {
      throw ValidationError(std::string(what) + ": anchor '" + key + "' outside [0,1]");
    }
    points.emplace_back(stress, value.get<double>());
  }
  bool has_zero = false;
  for (const auto& p : points) has_zero = has_zero || p.first == 0.0;
  if (!has_zero) throw ValidationError(std::string(what) + ": missing the 0 anchor");
  try {
    return StressCurve::from_points(points);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
}

DeviceCalibration device_from_json(const json& obj, std::string_view what) {
  DeviceCalibration cal;
  if (obj.contains("cpu_curve")) {
    cal.response.cpu_curve = curve_from_json(obj["cpu_curve"], std::string(what) + ".cpu_curve");
  }
  if (obj.contains("mem_curve")) {
    cal.response.mem_curve = curve_from_json(obj["mem_curve"], std::string(what) + ".mem_curve");
  }
  if (obj.contains("base_rtt_s")) {
    if (!obj["base_rtt_s"].is_number()) throw ParseError(std::string(what) + ".base_rtt_s");
    cal.base_rtt_s = obj["base_rtt_s"].get<double>();
    if (!(cal.base_rtt_s >= 0.0)) {
      throw ValidationError(std::string(what) + ": base_rtt_s must be >= 0");
    }
  }
  return cal;
}

double column_sum(const DnnGraph& graph, const std::vector<LayerId>& layers, Eigen::Index col) {
  std::vector<Eigen::Index> rows(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) rows[i] = layers[i].value;
  return graph.latency_matrix()(rows, col).sum();
}

}  // namespace

void OperationalCondition::validate() const {
  auto fraction = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!fraction(cpu_stress)) throw ValidationError("cpu_stress must lie in [0,1]");
  if (!fraction(mem_stress)) throw ValidationError("mem_stress must lie in [0,1]");
  if (!(net_rate_mbps > 0.0) || !std::isfinite(net_rate_mbps)) {
    throw ValidationError("net_rate must be a positive number of Mb/s");
  }
}

StressResponse StressResponse::conservative_default() {
  const std::vector<std::pair<double, double>> points = {
      {0.0, 1.0}, {0.22, 1.15}, {0.45, 1.5}, {0.67, 2.0}, {0.9, 3.0}};
  return {StressCurve::from_points(points), StressCurve::from_points(points)};
}

double transfer_time(std::uint64_t bytes, const NetworkModel& net) {
  return static_cast<double>(bytes) * 8.0 / (net.rate_mbps * 1e6) + net.base_rtt_s;
}

LatencyEstimate partition_latency(const DnnGraph& graph, const CutPoint& cut,
                                  const OperationalCondition& cond, const CostModel& model) {
  const auto edge_col = graph.profile_column(model.edge_profile);
  if (!edge_col) throw ValidationError("unknown device profile '" + model.edge_profile + "'");
  const auto cloud_col = graph.profile_column(model.cloud_profile);
  if (!cloud_col) throw ValidationError("unknown device profile '" + model.cloud_profile + "'");
  if (cut.edge_set.size() + cut.cloud_set.size() != graph.size() ||
      cut.crossing_tensor.value >= graph.size() || cut.cloud_set.empty()) {
    throw ValidationError("cut does not belong to graph '" + graph.name() + "'");
  }

  LatencyEstimate est;
  est.edge_s = column_sum(graph, cut.edge_set, *edge_col) * model.response.multiplier(cond);
  est.transfer_s = transfer_time(graph.layer(cut.crossing_tensor).output_bytes,
                                 NetworkModel{cond.net_rate_mbps, model.base_rtt_s});
  est.cloud_s = column_sum(graph, cut.cloud_set, *cloud_col);
  est.total_s = est.edge_s + est.transfer_s + est.cloud_s;
  return est;
}

Calibration Calibration::parse(std::string_view document) {
  const json doc = parse_json(document, "calibration document");
  if (!doc.is_object()) throw ParseError("calibration document: top level must be an object");
  Calibration cal;
  if (doc.contains("cpu_curve") || doc.contains("mem_curve") || doc.contains("base_rtt_s")) {
    cal.shared_ = device_from_json(doc, "calibration");
    return cal;
  }
  for (const auto& [profile, obj] : doc.items()) {
    if (!obj.is_object()) {
      throw ParseError("calibration document: entry '" + profile + "' must be an object");
    }
    cal.per_profile_.emplace(profile, device_from_json(obj, "calibration." + profile));
  }
  return cal;
}

Calibration Calibration::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open calibration file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

DeviceCalibration Calibration::for_profile(std::string_view profile) const {
  if (auto it = per_profile_.find(profile); it != per_profile_.end()) return it->second;
  if (shared_) return *shared_;
  return {};
}

CostModel Calibration::cost_model(std::string edge_profile, std::string cloud_profile) const {
  const DeviceCalibration edge = for_profile(edge_profile);
  return CostModel{edge.response, edge.base_rtt_s, std::move(edge_profile),
                   std::move(cloud_profile)};
}

StressCurve parse_stress_curve(std::string_view document) {
  return curve_from_json(parse_json(document, "stress curve"), "stress curve");
}

StressResponse load_stress_response(std::string_view document) {
  const json doc = parse_json(document, "stress response");
  if (!doc.is_object()) throw ParseError("stress response: top level must be an object");
  return device_from_json(doc, "stress response").response;
}

}  // namespace dnnpart
