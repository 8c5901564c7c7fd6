#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ibvs/scenario.hpp"

namespace ibvs {

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw IoError("telemetry: cannot parse '" + s + "' in column " + column);
  }
  return v;
}

std::array<double, kTelemetryColumns.size()> to_row(const StepRecord& r) {
  return {r.t,
          r.twist[0],
          r.twist[1],
          r.twist[2],
          r.twist[3],
          r.twist[4],
          r.twist[5],
          r.position.x(),
          r.position.y(),
          r.position.z(),
          r.euler.roll,
          r.euler.pitch,
          r.euler.yaw,
          r.e_norm,
          r.cond_l,
          r.valid[0] ? 1.0 : 0.0,
          r.valid[1] ? 1.0 : 0.0,
          r.valid[2] ? 1.0 : 0.0,
          r.valid[3] ? 1.0 : 0.0,
          r.det_age};
}

StepRecord from_row(const std::array<double, kTelemetryColumns.size()>& v) {
  StepRecord r;
  r.t = v[0];
  for (int i = 0; i < 6; ++i) r.twist[i] = v[1 + i];
  r.position = Vector3<double>(v[7], v[8], v[9]);
  r.euler = EulerZYXd{v[10], v[11], v[12]};
  r.e_norm = v[13];
  r.cond_l = v[14];
  for (int i = 0; i < kCornerCount; ++i) r.valid[i] = v[15 + i] != 0.0;
  r.det_age = v[19];
  return r;
}

bool is_flag_column(std::size_t c) { return c >= 15 && c <= 18; }

}  // namespace

void emit(const std::vector<StepRecord>& records, TelemetryFormat format, std::ostream& out) {
  if (format == TelemetryFormat::Csv) {
    for (std::size_t c = 0; c < kTelemetryColumns.size(); ++c) out << (c ? "," : "") << kTelemetryColumns[c];
    out << '\n';
    for (const auto& r : records) {
      const auto row = to_row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        out << (c ? "," : "") << (is_flag_column(c) ? (row[c] != 0.0 ? "1" : "0") : format_double(row[c]));
      }
      out << '\n';
    }
    return;
  }
  for (const auto& r : records) {
    const auto row = to_row(r);
    nlohmann::ordered_json j;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (is_flag_column(c)) {
        j[kTelemetryColumns[c]] = row[c] != 0.0 ? 1 : 0;
      } else if (std::isfinite(row[c])) {
        j[kTelemetryColumns[c]] = row[c];
      } else {
        j[kTelemetryColumns[c]] = format_double(row[c]);
      }
    }
    out << j.dump() << '\n';
  }
}

void emit(const std::vector<StepRecord>& records, TelemetryFormat format, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("telemetry: cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  emit(records, format, out);
  out.flush();
  if (!out) throw IoError("telemetry: write to '" + path.string() + "' failed");
}

std::vector<StepRecord> read_telemetry(std::istream& in, TelemetryFormat format) {
  std::vector<StepRecord> records;
  std::string line;
  std::array<double, kTelemetryColumns.size()> row{};
  if (format == TelemetryFormat::Csv) {
    if (!std::getline(in, line)) return records;
    std::string expected;
    for (std::size_t c = 0; c < kTelemetryColumns.size(); ++c) expected += (c ? "," : "") + std::string(kTelemetryColumns[c]);
    if (line != expected) throw IoError("telemetry: unexpected CSV header '" + line + "'");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::size_t c = 0;
      while (std::getline(ss, cell, ',')) {
        if (c >= row.size()) throw IoError("telemetry: too many CSV fields");
        row[c] = parse_double(cell, kTelemetryColumns[c]);
        ++c;
      }
      if (c != row.size()) throw IoError("telemetry: expected 20 CSV fields, got " + std::to_string(c));
      records.push_back(from_row(row));
    }
    return records;
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("telemetry: bad JSON line: ") + e.what());
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      const auto it = j.find(kTelemetryColumns[c]);
      if (it == j.end()) throw IoError(std::string("telemetry: missing key ") + kTelemetryColumns[c]);
      row[c] = it->is_string() ? parse_double(it->get<std::string>(), kTelemetryColumns[c]) : it->get<double>();
    }
    records.push_back(from_row(row));
  }
  return records;
}

std::vector<StepRecord> read_telemetry(const std::filesystem::path& path, TelemetryFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("telemetry: cannot open '" + path.string() + "': " + std::strerror(errno));
  return read_telemetry(in, format);
}

}  // namespace ibvs
