#include "dnnpart/records.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <vector>

#include "dnnpart/error.hpp"

namespace dnnpart {

namespace {

void write_field(std::ostream& out, std::string_view text) {
  if (text.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

std::vector<std::string> split_row(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError("csv line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no, std::string_view column) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError("csv line " + std::to_string(line_no) + ": bad " + std::string(column) +
                     " value '" + text + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

RecordCsvWriter::RecordCsvWriter(std::ostream& out, bool write_header) : out_(out) {
  if (write_header) out_ << kRecordCsvHeader << '\n';
}

void RecordCsvWriter::write(const MeasurementRecord& r) {
  write_field(out_, r.model);
  out_ << ',';
  write_field(out_, r.platform);
  out_ << ',' << format_double(r.cpu_stress) << ',' << format_double(r.mem_stress) << ','
       << format_double(r.net_rate_mbps) << ',' << r.cut_after << ',' << r.run_index << ','
       << format_double(r.latency_s) << '\n';
}

void read_records_csv(std::istream& in, const std::function<void(MeasurementRecord&&)>& sink) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kRecordCsvHeader) {
        throw ParseError("csv line 1: expected header '" + std::string(kRecordCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_row(line, line_no);
    if (f.size() != 8) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected 8 fields, found " +
                       std::to_string(f.size()));
    }
    MeasurementRecord r;
    r.model = f[0];
    r.platform = f[1];
    r.cpu_stress = parse_number<double>(f[2], line_no, "cpu_stress");
    r.mem_stress = parse_number<double>(f[3], line_no, "mem_stress");
    r.net_rate_mbps = parse_number<double>(f[4], line_no, "net_rate_mbps");
    r.cut_after = parse_number<std::int64_t>(f[5], line_no, "cut_after");
    r.run_index = parse_number<std::int64_t>(f[6], line_no, "run_index");
    r.latency_s = parse_number<double>(f[7], line_no, "latency_s");
    if (!(r.latency_s > 0.0)) {
      throw ParseError("csv line " + std::to_string(line_no) + ": latency_s must be positive");
    }
    sink(std::move(r));
  }
  if (!header_seen) throw ParseError("csv: empty input, missing header");
}

}  // namespace dnnpart
