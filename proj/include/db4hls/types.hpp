#pragma once

// Value types shared by the datastore, orchestrator and analytics layers.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace db4hls {

enum class Status { Ok, SynthError, Timeout };

inline std::string_view status_name(Status s) {
  switch (s) {
    case Status::Ok: return "ok";
    case Status::SynthError: return "synth_error";
    case Status::Timeout: return "timeout";
  }
  return "synth_error";
}

inline Status parse_status(std::string_view s) {
  if (s == "ok") return Status::Ok;
  if (s == "synth_error") return Status::SynthError;
  if (s == "timeout") return Status::Timeout;
  throw std::invalid_argument("unknown status '" + std::string(s) + "'");
}

struct ResourceUsage {
  std::int64_t ff = 0;
  std::int64_t lut = 0;
  std::int64_t bram = 0;
  std::int64_t dsp = 0;
  friend bool operator==(const ResourceUsage&, const ResourceUsage&) = default;
};

/// Outcome of one synthesis run.
struct ImplementationResult {
  Status status = Status::SynthError;
  std::optional<ResourceUsage> resources;
  std::optional<std::int64_t> latency_cycles;
  std::optional<double> achieved_period_ns;
  double duration_s = 0.0;
  std::string report_ref;
  std::string diagnostic;

  bool complete() const {
    return status != Status::Ok || (resources && latency_cycles && achieved_period_ns);
  }
};

/// Provenance attached to every implementation row.
struct SynthesisInfo {
  std::string timestamp;  // ISO-8601 UTC
  std::string contributor;
  std::string tool_name;
  std::string tool_version;
  std::string fpga_part;
  double clock_period_ns = 0.0;
};

/// Which tool run a query refers to.
struct ToolFilter {
  std::string tool_name;
  std::string tool_version;
  std::string fpga_part;
};

/// Objective vector of one implementation, every component minimized.
struct DesignPoint {
  std::vector<double> objectives;
  std::int64_t configuration_id = 0;

  std::size_t size() const { return objectives.size(); }
  double operator[](std::size_t j) const { return objectives[j]; }
  friend bool operator==(const DesignPoint&, const DesignPoint&) = default;
};

inline std::string now_iso8601() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace db4hls
