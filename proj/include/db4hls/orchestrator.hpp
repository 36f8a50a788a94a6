#pragma once

// Synthesis campaigns: directive scripts, backends, report parsing and the
// K-way worker pool that commits results as runs finish.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <nlohmann/json.hpp>

#include "db4hls/config_space.hpp"
#include "db4hls/csd.hpp"
#include "db4hls/datastore.hpp"
#include "db4hls/hash.hpp"
#include "db4hls/types.hpp"

namespace db4hls::orch {

class OrchestratorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoRenderer : public OrchestratorError {
 public:
  explicit NoRenderer(const std::string& kind)
      : OrchestratorError("no script renderer for directive kind '" + kind + "'") {}
};

class BackendConfigError : public OrchestratorError {
 public:
  using OrchestratorError::OrchestratorError;
};

/// Raised when the store fails mid-campaign; already committed rows stay.
class CampaignAborted : public OrchestratorError {
 public:
  using OrchestratorError::OrchestratorError;
};

// ---------------------------------------------------------------------------
// Directive scripts

using Renderer = std::function<std::string(const csd::Knob&, const std::vector<csd::Value>&)>;

class ScriptRenderers {
 public:
  static ScriptRenderers builtin() {
    ScriptRenderers r;
    r.add("resource", [](const csd::Knob& k, const std::vector<csd::Value>& v) {
      return "set_directive_resource -core " + v[0].to_string() + " \"" + k.function + "\" " + k.target;
    });
    r.add("array_partition", [](const csd::Knob& k, const std::vector<csd::Value>& v) {
      return "set_directive_array_partition -type " + v[0].to_string() + " -factor " + v[1].to_string() +
             " -dim " + k.fixed_params.at(0) + " \"" + k.function + "\" " + k.target;
    });
    r.add("unroll", [](const csd::Knob& k, const std::vector<csd::Value>& v) {
      return "set_directive_unroll -factor " + v[0].to_string() + " \"" + k.function + "/" + k.target + "\"";
    });
    r.add("pipeline", [](const csd::Knob& k, const std::vector<csd::Value>& v) {
      return "set_directive_pipeline -II " + v[0].to_string() + " \"" + k.function + "/" + k.target + "\"";
    });
    r.add("inline", [](const csd::Knob& k, const std::vector<csd::Value>& v) {
      auto s = v[0].to_string();
      if (s == "on" || s == "1") return "set_directive_inline \"" + k.function + "\"";
      if (s == "off" || s == "0") return "set_directive_inline -off \"" + k.function + "\"";
      throw OrchestratorError("inline value must be on/off, got '" + s + "'");
    });
    r.add("clock", [](const csd::Knob&, const std::vector<csd::Value>& v) {
      return "create_clock -period " + v[0].to_string();
    });
    return r;
  }

  void add(const std::string& kind, Renderer fn) { fns_[kind] = std::move(fn); }

  const Renderer& at(const std::string& kind) const {
    auto it = fns_.find(kind);
    if (it == fns_.end()) throw NoRenderer(kind);
    return it->second;
  }

 private:
  std::map<std::string, Renderer> fns_;
};

inline const ScriptRenderers& default_renderers() {
  static const ScriptRenderers r = ScriptRenderers::builtin();
  return r;
}

/// One Tcl line per knob, in CSD order.
inline std::string generate_directive_script(const csd::Csd& csd, const space::Configuration& cfg,
                                             const ScriptRenderers& renderers = default_renderers()) {
  if (cfg.assignments.size() != csd.knobs.size())
    throw OrchestratorError("configuration does not belong to this descriptor");
  std::string out;
  for (std::size_t k = 0; k < csd.knobs.size(); ++k) {
    out += renderers.at(csd.knobs[k].directive)(csd.knobs[k], cfg.assignments[k]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

namespace detail {

inline ImplementationResult report_error(std::string msg) {
  ImplementationResult r;
  r.status = Status::SynthError;
  r.diagnostic = std::move(msg);
  return r;
}

inline ImplementationResult parse_json_report(std::string_view raw) {
  auto j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return report_error("unparseable report");
  if (auto it = j.find("status"); it != j.end()) {
    if (!it->is_string()) return report_error("unparseable report: status is not a string");
    Status s;
    try {
      s = parse_status(it->get<std::string>());
    } catch (const std::invalid_argument& e) {
      return report_error(std::string("unparseable report: ") + e.what());
    }
    if (s != Status::Ok) {
      auto r = report_error(j.value("diagnostic", std::string(status_name(s))));
      r.status = s;
      return r;
    }
  }
  auto integer = [&](const char* key) -> std::optional<std::int64_t> {
    auto it = j.find(key);
    if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) return std::nullopt;
    return it->get<std::int64_t>();
  };
  ResourceUsage res;
  const std::pair<const char*, std::int64_t*> fields[] = {
      {"ff", &res.ff}, {"lut", &res.lut}, {"bram", &res.bram}, {"dsp", &res.dsp}};
  for (auto [key, dst] : fields) {
    auto v = integer(key);
    if (!v) return report_error(std::string("report field '") + key + "' missing or invalid");
    *dst = *v;
  }
  auto lat = integer("lat");
  if (!lat) return report_error("report field 'lat' missing or invalid");
  auto pit = j.find("period");
  if (pit == j.end() || !pit->is_number() || !(pit->get<double>() > 0))
    return report_error("report field 'period' missing or invalid");
  ImplementationResult r;
  r.status = Status::Ok;
  r.resources = res;
  r.latency_cycles = *lat;
  r.achieved_period_ns = pit->get<double>();
  return r;
}

// Vivado-style csynth.xml.
inline ImplementationResult parse_xml_report(std::string_view raw) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(raw)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error&) {
    return report_error("unparseable report");
  }
  auto root = tree.get_child_optional("profile");
  if (!root) return report_error("unparseable report: no <profile> element");
  auto text = [&](const std::string& path) -> std::optional<std::string> {
    auto v = root->get_optional<std::string>(path);
    if (!v) return std::nullopt;
    return std::string(csd::detail::trim(*v));
  };
  auto count = [&](const std::string& path) -> std::optional<std::int64_t> {
    auto v = text(path);
    if (!v) return std::nullopt;
    auto n = csd::detail::parse_int(*v);
    if (!n || *n < 0) return std::nullopt;
    return n;
  };
  const std::string res = "AreaEstimates.Resources.";
  ResourceUsage usage;
  std::optional<std::int64_t> v;
  if (!(v = count(res + "FF"))) return report_error("report lacks FF");
  usage.ff = *v;
  if (!(v = count(res + "LUT"))) return report_error("report lacks LUT");
  usage.lut = *v;
  if (!(v = count(res + "BRAM_18K"))) return report_error("report lacks BRAM_18K");
  usage.bram = *v;
  if (!(v = count(res + "DSP48E")) && !(v = count(res + "DSP"))) return report_error("report lacks DSP48E");
  usage.dsp = *v;
  auto lat = count("PerformanceEstimates.SummaryOfOverallLatency.Worst-caseLatency");
  if (!lat) return report_error("report lacks a numeric worst-case latency");
  auto per = text("PerformanceEstimates.SummaryOfTimingAnalysis.EstimatedClockPeriod");
  double period = 0;
  try {
    std::size_t used = 0;
    if (per) period = std::stod(*per, &used);
    if (!per || used != per->size() || !(period > 0)) return report_error("report lacks an estimated clock period");
  } catch (const std::exception&) {
    return report_error("report lacks an estimated clock period");
  }
  ImplementationResult r;
  r.status = Status::Ok;
  r.resources = usage;
  r.latency_cycles = *lat;
  r.achieved_period_ns = period;
  return r;
}

}  // namespace detail

/// Format tag is "json" (mock) or "xml" (external tool). Never throws on bad
/// input: malformed reports become synth_error results.
inline ImplementationResult parse_report(std::string_view raw, std::string_view format) {
  if (format == "json") return detail::parse_json_report(raw);
  if (format == "xml") return detail::parse_xml_report(raw);
  return detail::report_error("unknown report format '" + std::string(format) + "'");
}

// ---------------------------------------------------------------------------
// Mock synthesizer

namespace detail {

inline std::uint64_t seeded_hash(std::uint64_t seed, std::string_view salt, std::string_view text) {
  return stable_hash64(std::to_string(seed) + "|" + std::string(salt) + "|" + std::string(text));
}

}  // namespace detail

/// Deterministic stand-in for an HLS tool. Unrolling buys latency up to the
/// memory bandwidth that partitioning provides, and costs area.
inline std::string mock_report(const csd::Csd& csd, const space::Configuration& cfg, std::uint64_t seed) {
  constexpr std::int64_t kTrip = 1024;
  std::vector<std::int64_t> unrolls;
  std::int64_t bandwidth = 0, sum_pf = 0, clock = 10, depth = 4;
  bool partitioned = false, pipelined = false;
  std::string categorical;
  std::map<std::string, std::int64_t> pf_by_target;
  for (std::size_t k = 0; k < csd.knobs.size(); ++k) {
    const auto& knob = csd.knobs[k];
    const auto& v = cfg.assignments[k];
    for (const auto& x : v)
      if (!x.is_numeric()) categorical += knob.head() + "=" + x.token() + ";";
    auto num = [&](std::size_t i) { return v[i].is_numeric() ? std::max<std::int64_t>(1, v[i].number()) : 1; };
    if (knob.directive == "unroll") {
      unrolls.push_back(num(0));
    } else if (knob.directive == "array_partition") {
      std::int64_t pf = v[0].to_string() == "complete" ? kTrip : num(1);
      std::int64_t bw = v[0].to_string() == "cyclic" ? 2 * pf : pf;
      bandwidth = std::max(bandwidth, bw);
      sum_pf += pf;
      pf_by_target[knob.target] = pf;
      partitioned = true;
    } else if (knob.directive == "pipeline") {
      depth = pipelined ? std::min(depth, num(0)) : num(0);
      pipelined = true;
    } else if (knob.directive == "clock") {
      clock = num(0);
    }
  }
  if (unrolls.empty()) unrolls.push_back(1);

  double h_cat = unit_interval(detail::seeded_hash(seed, "cat", categorical));
  double h_per = unit_interval(detail::seeded_hash(seed, "period", categorical));
  auto noise = [&](const char* salt) {
    return static_cast<std::int64_t>(detail::seeded_hash(seed, salt, cfg.key) % 16);
  };

  std::int64_t cycles = 16, sum_u = 0;
  for (auto u : unrolls) {
    std::int64_t eff = partitioned ? std::min(u, bandwidth) : u;
    cycles += (kTrip + eff - 1) / eff * depth;
    sum_u += u;
  }
  std::int64_t bram = 0;
  for (std::size_t k = 0; k < csd.knobs.size(); ++k) {
    const auto& knob = csd.knobs[k];
    if (knob.directive != "resource" || cfg.assignments[k][0].to_string().find("BRAM") == std::string::npos) continue;
    auto it = pf_by_target.find(knob.target);
    bram += it == pf_by_target.end() ? 1 : it->second;
  }
  nlohmann::ordered_json j;
  j["ff"] = 150 + 64 * sum_u + 24 * sum_pf + noise("ff");
  j["lut"] = 200 + 48 * sum_u + 40 * sum_pf + noise("lut");
  j["bram"] = bram;
  j["dsp"] = 2 * sum_u;
  j["lat"] = static_cast<std::int64_t>(std::llround(static_cast<double>(cycles) * (1.0 + 0.05 * h_cat)));
  j["period"] = std::round(static_cast<double>(clock) * (0.7 + 0.25 * h_per) * 1000.0) / 1000.0;
  return j.dump();
}

inline ImplementationResult mock_synthesize(const csd::Csd& csd, const space::Configuration& cfg,
                                            std::uint64_t seed) {
  auto r = parse_report(mock_report(csd, cfg, seed), "json");
  r.report_ref = "mock:" + cfg.key;
  return r;
}

// ---------------------------------------------------------------------------
// Backends

struct BackendSpec {
  enum class Kind { Mock, ExternalTool };
  Kind kind = Kind::Mock;
  // External tool: shell command with {config_dir}, {design_src}, {script}.
  std::string command;
  std::string work_root = "db4hls-runs";
  std::string design_src;
  double timeout_s = 4 * 3600.0;
  std::string report_pattern = "{config_dir}/report.xml";
  std::string report_format = "xml";
  std::string tool_name = "mock-hls";
  std::string tool_version = "1";
  std::string fpga_part = "mock";
  // Mock only.
  unsigned mock_delay_ms = 0;
  double mock_fail_rate = 0.0;

  ToolFilter filter() const { return {tool_name, tool_version, fpga_part}; }

  void validate() const {
    if (!(timeout_s > 0)) throw BackendConfigError("timeout must be positive");
    if (mock_fail_rate < 0 || mock_fail_rate > 1) throw BackendConfigError("mock fail rate must lie in [0,1]");
    if (tool_name.empty()) throw BackendConfigError("tool name is empty");
    if (kind == Kind::ExternalTool) {
      for (const char* ph : {"{config_dir}", "{design_src}", "{script}"})
        if (command.find(ph) == std::string::npos)
          throw BackendConfigError(std::string("command template lacks placeholder ") + ph);
      if (report_format != "xml" && report_format != "json")
        throw BackendConfigError("report format must be xml or json");
    }
  }
};

class Backend {
 public:
  virtual ~Backend() = default;
  /// Runs one synthesis. May block; called concurrently from workers.
  virtual ImplementationResult synthesize(const csd::Csd& csd, const space::Configuration& cfg) = 0;
};

class MockBackend final : public Backend {
 public:
  MockBackend(std::uint64_t seed, unsigned delay_ms = 0, double fail_rate = 0)
      : seed_(seed), delay_ms_(delay_ms), fail_rate_(fail_rate) {}

  ImplementationResult synthesize(const csd::Csd& csd, const space::Configuration& cfg) override {
    auto t0 = std::chrono::steady_clock::now();
    if (delay_ms_) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms_));
    ImplementationResult r;
    if (fail_rate_ > 0 && unit_interval(detail::seeded_hash(seed_, "fail", cfg.key)) < fail_rate_) {
      r = detail::report_error("mock synthesis failure");
      r.report_ref = "mock:" + cfg.key;
    } else {
      r = mock_synthesize(csd, cfg, seed_);
    }
    r.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

 private:
  std::uint64_t seed_;
  unsigned delay_ms_;
  double fail_rate_;
};

namespace detail {

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

inline std::string substitute(std::string text, const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
      text.replace(pos, key.size(), value);
  }
  return text;
}

}  // namespace detail

/// Runs a shell command per configuration inside <work_root>/<config_key>,
/// then parses the report it leaves behind.
class ExternalToolBackend final : public Backend {
 public:
  explicit ExternalToolBackend(BackendSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

  ImplementationResult synthesize(const csd::Csd& csd, const space::Configuration& cfg) override {
    namespace fs = std::filesystem;
    auto t0 = std::chrono::steady_clock::now();
    auto dir = fs::absolute(fs::path(spec_.work_root) / cfg.key);
    fs::create_directories(dir);
    auto script = dir / "directives.tcl";
    {
      std::ofstream out(script, std::ios::trunc);
      out << generate_directive_script(csd, cfg);
      if (!out) throw OrchestratorError("cannot write " + script.string());
    }
    auto cmd = detail::substitute(spec_.command, {{"{config_dir}", detail::shell_quote(dir.string())},
                                                  {"{design_src}", detail::shell_quote(spec_.design_src)},
                                                  {"{script}", detail::shell_quote(script.string())}});
    auto log = (dir / "tool.log").string();
    auto dir_s = dir.string();
    auto report_path = detail::substitute(spec_.report_pattern, {{"{config_dir}", dir_s}});
    // A rerun in the same sandbox must not pick up the previous report.
    std::error_code ec;
    fs::remove(report_path, ec);

    ImplementationResult r;
    pid_t pid = ::fork();
    if (pid < 0) throw OrchestratorError("fork failed");
    if (pid == 0) {
      ::setpgid(0, 0);
      int fd = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (fd >= 0) {
        ::dup2(fd, 1);
        ::dup2(fd, 2);
        ::close(fd);
      }
      if (::chdir(dir_s.c_str()) != 0) ::_exit(127);
      ::execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::setpgid(pid, pid);
    auto deadline = t0 + std::chrono::duration<double>(spec_.timeout_s);
    int status = 0;
    bool timed_out = false;
    for (;;) {
      pid_t w = ::waitpid(pid, &status, WNOHANG);
      if (w == pid) break;
      if (w < 0 && errno != EINTR) throw OrchestratorError("waitpid failed");
      if (std::chrono::steady_clock::now() >= deadline) {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, &status, 0);
        timed_out = true;
        break;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (timed_out) {
      r = detail::report_error("timed out after " + std::to_string(spec_.timeout_s) + " s");
      r.status = Status::Timeout;
    } else if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
      r = detail::report_error(WIFEXITED(status) ? "tool exited with status " + std::to_string(WEXITSTATUS(status))
                                                 : "tool killed by signal " + std::to_string(WTERMSIG(status)));
    } else {
      std::ifstream in(report_path);
      if (!in) {
        r = detail::report_error("report not found: " + report_path);
      } else {
        std::stringstream ss;
        ss << in.rdbuf();
        r = parse_report(ss.str(), spec_.report_format);
      }
    }
    r.report_ref = report_path;
    r.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

 private:
  BackendSpec spec_;
};

inline std::unique_ptr<Backend> make_backend(const BackendSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.kind == BackendSpec::Kind::Mock)
    return std::make_unique<MockBackend>(seed, spec.mock_delay_ms, spec.mock_fail_rate);
  return std::make_unique<ExternalToolBackend>(spec);
}

// ---------------------------------------------------------------------------
// Campaigns

struct Campaign {
  std::int64_t space_id = 0;
  BackendSpec backend;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  std::string contributor = "db4hls";
  std::string log_path;                              // JSON-lines event log; empty disables
  std::optional<std::vector<std::int64_t>> pending;  // defaults to the store's pending list
  const std::atomic<bool>* stop = nullptr;           // checked before each new attempt
};

struct CampaignReport {
  std::size_t attempted = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t timeout = 0;
  std::size_t pending_after = 0;
  unsigned max_in_flight = 0;
  double wall_s = 0;
};

/// Append-only event log; each line is flushed before returning.
class CampaignLog {
 public:
  explicit CampaignLog(const std::string& path) {
    if (path.empty()) return;
    out_.open(path, std::ios::app);
    if (!out_) throw OrchestratorError("cannot open campaign log " + path);
  }

  void event(std::string_view name, const store::ConfigurationRecord& c, const std::string& detail = {}) {
    if (!out_.is_open()) return;
    nlohmann::ordered_json j;
    j["event"] = name;
    j["config_id"] = c.id;
    j["index"] = c.index;
    j["key"] = c.config_key;
    j["ts"] = now_iso8601();
    if (!detail.empty()) j["detail"] = detail;
    std::lock_guard lock(mu_);
    out_ << j.dump() << '\n';
    out_.flush();
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

inline CampaignReport run_campaign(store::Store& db, const Campaign& c, Backend& backend) {
  if (c.jobs < 1) throw BackendConfigError("jobs must be at least 1");
  c.backend.validate();
  auto t0 = std::chrono::steady_clock::now();
  auto sp = db.space(c.space_id);
  const space::SpaceIndex index(csd::parse_csd(sp.csd_text));
  const auto filter = c.backend.filter();

  std::vector<store::ConfigurationRecord> work;
  if (c.pending) {
    std::map<std::int64_t, store::ConfigurationRecord> by_id;
    for (auto& r : db.configurations(c.space_id)) by_id.emplace(r.id, std::move(r));
    for (auto id : *c.pending) {
      auto it = by_id.find(id);
      if (it == by_id.end())
        throw OrchestratorError("configuration " + std::to_string(id) + " is not in space " +
                                std::to_string(c.space_id));
      work.push_back(it->second);
    }
  } else {
    work = db.pending_configurations(c.space_id, filter);
  }

  CampaignLog log(c.log_path);
  CampaignReport report;
  std::mutex report_mu;
  std::atomic<std::size_t> cursor{0};
  std::atomic<unsigned> in_flight{0}, max_in_flight{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      if (abort.load() || (c.stop && c.stop->load())) return;
      auto i = cursor.fetch_add(1);
      if (i >= work.size()) return;
      const auto& rec = work[i];
      auto cfg = index.decode(rec.index);
      if (cfg.key != rec.config_key) {
        std::lock_guard lock(report_mu);
        if (!failure)
          failure = std::make_exception_ptr(
              CampaignAborted("stored key of configuration " + std::to_string(rec.id) + " does not match its index"));
        abort = true;
        return;
      }
      log.event("start", rec);
      auto now = ++in_flight;
      for (auto seen = max_in_flight.load(); now > seen && !max_in_flight.compare_exchange_weak(seen, now);) {
      }
      ImplementationResult result;
      try {
        result = backend.synthesize(index.csd(), cfg);
      } catch (const std::exception& e) {
        result = detail::report_error(std::string("backend invocation failed: ") + e.what());
      }
      --in_flight;

      SynthesisInfo info;
      info.contributor = c.contributor;
      info.tool_name = filter.tool_name;
      info.tool_version = filter.tool_version;
      info.fpga_part = filter.fpga_part;
      for (std::size_t k = 0; k < index.csd().knobs.size(); ++k)
        if (index.csd().knobs[k].is_clock() && cfg.assignments[k][0].is_numeric())
          info.clock_period_ns = static_cast<double>(cfg.assignments[k][0].number());
      try {
        db.record_result(rec.id, result, info);
      } catch (...) {
        std::lock_guard lock(report_mu);
        if (!failure) failure = std::current_exception();
        abort = true;
        return;
      }
      switch (result.status) {
        case Status::Ok: log.event("done", rec); break;
        case Status::Timeout: log.event("timeout", rec, result.diagnostic); break;
        case Status::SynthError: log.event("fail", rec, result.diagnostic); break;
      }
      std::lock_guard lock(report_mu);
      ++report.attempted;
      if (result.status == Status::Ok) ++report.ok;
      else if (result.status == Status::Timeout) ++report.timeout;
      else ++report.failed;
    }
  };

  auto k = static_cast<unsigned>(std::min<std::size_t>(c.jobs, std::max<std::size_t>(work.size(), 1)));
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const CampaignAborted&) {
      throw;
    } catch (const std::exception& e) {
      throw CampaignAborted(std::string("campaign aborted: ") + e.what());
    }
  }
  report.max_in_flight = max_in_flight.load();
  report.pending_after = db.pending_configurations(c.space_id, filter).size();
  report.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

inline CampaignReport run_campaign(store::Store& db, const Campaign& c) {
  auto backend = make_backend(c.backend, c.seed);
  return run_campaign(db, c, *backend);
}

}  // namespace db4hls::orch
