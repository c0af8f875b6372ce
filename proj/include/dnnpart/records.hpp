#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace dnnpart {

/// One observed (or synthesized) end-to-end latency.
struct MeasurementRecord {
  std::string model;
  std::string platform;
  double cpu_stress = 0.0;
  double mem_stress = 0.0;
  double net_rate_mbps = 0.0;
  /// Layer id of the partition point; kAllCloudCut for the all-cloud cut.
  std::int64_t cut_after = 0;
  std::int64_t run_index = 0;
  double latency_s = 0.0;

  bool operator==(const MeasurementRecord&) const = default;
};

inline constexpr std::string_view kRecordCsvHeader =
    "model,platform,cpu_stress,mem_stress,net_rate_mbps,cut_after,run_index,latency_s";

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

class RecordCsvWriter {
 public:
  explicit RecordCsvWriter(std::ostream& out, bool write_header = true);
  void write(const MeasurementRecord& record);

 private:
  std::ostream& out_;
};

/// Reads the CSV produced by RecordCsvWriter (or an external harness using
/// the same header). Throws ParseError naming the line on malformed rows.
void read_records_csv(std::istream& in, const std::function<void(MeasurementRecord&&)>& sink);

}  // namespace dnnpart
