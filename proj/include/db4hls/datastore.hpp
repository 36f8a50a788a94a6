#pragma once

// Relational store for designs, configuration spaces, configurations,
// implementations and their synthesis outcomes.
//
//   benchmark 1-n algorithm 1-n design 1-n configuration_space
//   configuration_space 1-n configuration 1-n implementation
//   implementation 1-1 synthesis_info, 1-n resources, 1-n performance
//
// Backed by an embedded SQLite file; export_space() emits either JSON-lines
// or plain SQL (DDL + INSERTs) that loads into a server deployment.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "db4hls/config_space.hpp"
#include "db4hls/csd.hpp"
#include "db4hls/sqlite.hpp"
#include "db4hls/types.hpp"

namespace db4hls::store {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kSchemaDdl = R"sql(CREATE TABLE IF NOT EXISTS benchmark (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS algorithm (
  id INTEGER PRIMARY KEY,
  benchmark_id INTEGER NOT NULL REFERENCES benchmark(id),
  name TEXT NOT NULL,
  UNIQUE (benchmark_id, name)
);
CREATE TABLE IF NOT EXISTS design (
  id INTEGER PRIMARY KEY,
  algorithm_id INTEGER NOT NULL REFERENCES algorithm(id),
  name TEXT NOT NULL,
  function_name TEXT NOT NULL,
  source_ref TEXT NOT NULL DEFAULT '',
  UNIQUE (algorithm_id, name)
);
CREATE TABLE IF NOT EXISTS configuration_space (
  id INTEGER PRIMARY KEY,
  design_id INTEGER NOT NULL REFERENCES design(id),
  csd_text TEXT NOT NULL,
  cardinality INTEGER NOT NULL CHECK (cardinality > 0),
  contributor TEXT NOT NULL,
  created_at TEXT NOT NULL,
  UNIQUE (design_id, csd_text)
);
CREATE TABLE IF NOT EXISTS configuration (
  id INTEGER PRIMARY KEY,
  space_id INTEGER NOT NULL REFERENCES configuration_space(id),
  idx INTEGER NOT NULL CHECK (idx >= 0),
  config_key TEXT NOT NULL,
  key_text TEXT NOT NULL,
  directive_values TEXT NOT NULL,
  UNIQUE (space_id, idx),
  UNIQUE (space_id, config_key)
);
CREATE TABLE IF NOT EXISTS implementation (
  id INTEGER PRIMARY KEY,
  configuration_id INTEGER NOT NULL REFERENCES configuration(id),
  status TEXT NOT NULL CHECK (status IN ('ok', 'synth_error', 'timeout')),
  duration_s REAL NOT NULL DEFAULT 0,
  report_ref TEXT NOT NULL DEFAULT '',
  diagnostic TEXT NOT NULL DEFAULT ''
);
CREATE INDEX IF NOT EXISTS implementation_by_configuration ON implementation(configuration_id);
CREATE TABLE IF NOT EXISTS synthesis_info (
  id INTEGER PRIMARY KEY,
  implementation_id INTEGER NOT NULL UNIQUE REFERENCES implementation(id),
  synthesized_at TEXT NOT NULL,
  contributor TEXT NOT NULL,
  tool_name TEXT NOT NULL,
  tool_version TEXT NOT NULL,
  fpga_part TEXT NOT NULL,
  clock_period_ns REAL NOT NULL
);
CREATE TABLE IF NOT EXISTS resources (
  id INTEGER PRIMARY KEY,
  implementation_id INTEGER NOT NULL REFERENCES implementation(id),
  ff INTEGER NOT NULL CHECK (ff >= 0),
  lut INTEGER NOT NULL CHECK (lut >= 0),
  bram INTEGER NOT NULL CHECK (bram >= 0),
  dsp INTEGER NOT NULL CHECK (dsp >= 0)
);
CREATE INDEX IF NOT EXISTS resources_by_implementation ON resources(implementation_id);
CREATE TABLE IF NOT EXISTS performance (
  id INTEGER PRIMARY KEY,
  implementation_id INTEGER NOT NULL REFERENCES implementation(id),
  latency_cycles INTEGER NOT NULL CHECK (latency_cycles >= 0),
  achieved_period_ns REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS performance_by_implementation ON performance(implementation_id);
)sql";

/// Tables in dependency order.
inline constexpr std::array<std::string_view, 9> kTables = {
    "benchmark",      "algorithm",      "design",    "configuration_space", "configuration",
    "implementation", "synthesis_info", "resources", "performance"};

// ---------------------------------------------------------------------------
// Errors

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class VersionMismatch : public StoreError {
 public:
  using StoreError::StoreError;
};
class DuplicateSpace : public StoreError {
 public:
  using StoreError::StoreError;
};
class DuplicateImplementation : public StoreError {
 public:
  using StoreError::StoreError;
};
class NotFound : public StoreError {
 public:
  using StoreError::StoreError;
};
class UnknownObjective : public StoreError {
 public:
  using StoreError::StoreError;
};
class ImportError : public StoreError {
 public:
  ImportError(const std::string& what, std::int64_t last_good)
      : StoreError(what + " (last good record " + std::to_string(last_good) + ")"),
        last_good_(last_good) {}
  /// Index of the last record processed successfully, -1 if none.
  std::int64_t last_good_record() const { return last_good_; }

 private:
  std::int64_t last_good_;
};

// ---------------------------------------------------------------------------
// Records

struct BenchmarkRecord {
  std::int64_t id = 0;
  std::string name;
};

struct AlgorithmRecord {
  std::int64_t id = 0;
  std::int64_t benchmark_id = 0;
  std::string name;
};

struct DesignRecord {
  std::int64_t id = 0;
  std::int64_t algorithm_id = 0;
  std::string name;
  std::string function_name;
  std::string source_ref;
};

/// Names identifying a design in the benchmark / algorithm / design taxonomy.
struct DesignRef {
  std::string benchmark;
  std::string algorithm;
  std::string design;
  std::string function_name;
  std::string source_ref;
};

struct ConfigurationSpaceRecord {
  std::int64_t id = 0;
  std::int64_t design_id = 0;
  std::string csd_text;
  std::uint64_t cardinality = 0;
  std::string contributor;
  std::string created_at;
};

struct ConfigurationRecord {
  std::int64_t id = 0;
  std::int64_t space_id = 0;
  std::uint64_t index = 0;
  std::string config_key;
  std::string key_text;
  std::string directive_values;  // JSON array of {knob, values}
};

struct ImplementationRecord {
  std::int64_t id = 0;
  std::int64_t configuration_id = 0;
  Status status = Status::SynthError;
  SynthesisInfo info;
  std::optional<ResourceUsage> resources;
  std::optional<std::int64_t> latency_cycles;
  std::optional<double> achieved_period_ns;
  double duration_s = 0;
  std::string report_ref;
  std::string diagnostic;
};

// ---------------------------------------------------------------------------
// Objectives

enum class Objective { LatencyCycles, LatencyNs, FF, LUT, BRAM, DSP, Area };

inline Objective parse_objective(std::string_view name) {
  if (name == "latency" || name == "latency_cycles") return Objective::LatencyCycles;
  if (name == "latency_ns") return Objective::LatencyNs;
  if (name == "ff") return Objective::FF;
  if (name == "lut") return Objective::LUT;
  if (name == "bram") return Objective::BRAM;
  if (name == "dsp") return Objective::DSP;
  if (name == "area") return Objective::Area;
  throw UnknownObjective("unknown objective '" + std::string(name) + "'");
}

inline std::string_view objective_name(Objective o) {
  switch (o) {
    case Objective::LatencyCycles: return "latency";
    case Objective::LatencyNs: return "latency_ns";
    case Objective::FF: return "ff";
    case Objective::LUT: return "lut";
    case Objective::BRAM: return "bram";
    case Objective::DSP: return "dsp";
    case Objective::Area: return "area";
  }
  return "?";
}

/// Weights for scalarized area, in (ff, lut, bram, dsp) order.
struct AreaWeights {
  double ff = 0, lut = 1, bram = 0, dsp = 0;
};

class InvalidWeights : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// w_ff*ff + w_lut*lut + w_bram*bram + w_dsp*dsp.
inline double scalarize_area(const ResourceUsage& r, const AreaWeights& w) {
  if (w.ff < 0 || w.lut < 0 || w.bram < 0 || w.dsp < 0)
    throw InvalidWeights("area weights must be non-negative");
  if (w.ff == 0 && w.lut == 0 && w.bram == 0 && w.dsp == 0)
    throw InvalidWeights("area weights are all zero");
  return w.ff * static_cast<double>(r.ff) + w.lut * static_cast<double>(r.lut) +
         w.bram * static_cast<double>(r.bram) + w.dsp * static_cast<double>(r.dsp);
}

/// Divides each weight by a per-resource scale (zero scales leave the weight at zero).
inline AreaWeights normalized(const AreaWeights& w, const ResourceUsage& scale) {
  auto div = [](double a, std::int64_t s) { return s > 0 ? a / static_cast<double>(s) : 0.0; };
  return {div(w.ff, scale.ff), div(w.lut, scale.lut), div(w.bram, scale.bram), div(w.dsp, scale.dsp)};
}

struct ObjectiveSpec {
  std::vector<Objective> objectives{Objective::LatencyCycles, Objective::LUT};
  AreaWeights weights;
  // Scale each resource by its maximum over the space before weighting.
  bool normalize_area = false;
  std::optional<ToolFilter> tool;

  /// Parses a comma-separated objective list, e.g. "latency,lut".
  static ObjectiveSpec parse(std::string_view list) {
    ObjectiveSpec spec;
    spec.objectives.clear();
    std::size_t pos = 0;
    while (pos <= list.size()) {
      auto comma = list.find(',', pos);
      auto tok = list.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
      spec.objectives.push_back(parse_objective(csd::detail::trim(tok)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    return spec;
  }
};

// ---------------------------------------------------------------------------

struct ImportReport {
  std::int64_t space_id = 0;
  std::map<std::string, std::int64_t> rows;  // per table
  std::int64_t records = 0;
};

enum class ExportFormat { JsonLines, Sql };

class Store {
 public:
  /// Opens (or creates) the database at `path`; ":memory:" is accepted.
  explicit Store(const std::string& path) : path_(path), db_(path) {
    db_.exec("PRAGMA foreign_keys = ON");
    if (path != ":memory:" && !path.empty()) {
      db_.exec("PRAGMA journal_mode = WAL");
      db_.exec("PRAGMA synchronous = NORMAL");
    }
  }

  const std::string& path() const { return path_; }

  int schema_version() {
    std::lock_guard lock(mu_);
    return user_version();
  }

  /// Creates all tables. Idempotent for the current version.
  void init_schema() {
    std::lock_guard lock(mu_);
    int v = user_version();
    if (v > kSchemaVersion)
      throw VersionMismatch("store schema version " + std::to_string(v) + " is newer than supported " +
                            std::to_string(kSchemaVersion));
    if (v == 0 && table_count_locked() > 0)
      throw VersionMismatch("store contains tables but no schema version");
    if (v != 0 && v < kSchemaVersion)
      throw VersionMismatch("store schema version " + std::to_string(v) + " needs migration");
    sql::Transaction tx(db_);
    db_.exec(kSchemaDdl);
    db_.exec("PRAGMA user_version = " + std::to_string(kSchemaVersion));
    tx.commit();
  }

  /// Number of user tables present.
  int table_count() {
    std::lock_guard lock(mu_);
    return table_count_locked();
  }

  // --- taxonomy -----------------------------------------------------------

  DesignRecord ensure_design(const DesignRef& ref) {
    std::lock_guard lock(mu_);
    require_schema();
    sql::Transaction tx(db_);
    auto rec = ensure_design_locked(ref);
    tx.commit();
    return rec;
  }

  std::optional<DesignRecord> find_design(const DesignRef& ref) {
    std::lock_guard lock(mu_);
    auto st = db_.prepare(
        "SELECT d.id, d.algorithm_id, d.name, d.function_name, d.source_ref FROM design d "
        "JOIN algorithm a ON d.algorithm_id = a.id JOIN benchmark b ON a.benchmark_id = b.id "
        "WHERE b.name = ? AND a.name = ? AND d.name = ?");
    st.bind(1, ref.benchmark).bind(2, ref.algorithm).bind(3, ref.design);
    if (!st.step()) return std::nullopt;
    return DesignRecord{st.get_int(0), st.get_int(1), st.get_text(2), st.get_text(3), st.get_text(4)};
  }

  DesignRecord design(std::int64_t id) {
    std::lock_guard lock(mu_);
    auto st = db_.prepare("SELECT id, algorithm_id, name, function_name, source_ref FROM design WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) throw NotFound("unknown design " + std::to_string(id));
    return {st.get_int(0), st.get_int(1), st.get_text(2), st.get_text(3), st.get_text(4)};
  }

  /// Full taxonomy names of a design.
  DesignRef design_ref(std::int64_t id) {
    std::lock_guard lock(mu_);
    auto st = db_.prepare(
        "SELECT b.name, a.name, d.name, d.function_name, d.source_ref FROM design d "
        "JOIN algorithm a ON d.algorithm_id = a.id JOIN benchmark b ON a.benchmark_id = b.id WHERE d.id = ?");
    st.bind(1, id);
    if (!st.step()) throw NotFound("unknown design " + std::to_string(id));
    return {st.get_text(0), st.get_text(1), st.get_text(2), st.get_text(3), st.get_text(4)};
  }

  // --- spaces -------------------------------------------------------------

  /// Inserts the space and every configuration row in one transaction.
  ConfigurationSpaceRecord register_space(std::int64_t design_id, const csd::Csd& csd,
                                          const std::string& contributor) {
    space::SpaceIndex index(csd);
    auto text = csd::serialize_csd(csd);
    std::lock_guard lock(mu_);
    require_schema();
    sql::Transaction tx(db_);
    {
      auto st = db_.prepare("SELECT 1 FROM design WHERE id = ?");
      st.bind(1, design_id);
      if (!st.step()) throw NotFound("unknown design " + std::to_string(design_id));
    }
    if (find_space_locked(design_id, text))
      throw DuplicateSpace("design " + std::to_string(design_id) + " already has this configuration space");
    if (index.total() > static_cast<std::uint64_t>(INT64_MAX))
      throw space::OverflowError();
    ConfigurationSpaceRecord rec{0, design_id, text, index.total(), contributor, now_iso8601()};
    {
      auto st = db_.prepare(
          "INSERT INTO configuration_space (design_id, csd_text, cardinality, contributor, created_at) "
          "VALUES (?, ?, ?, ?, ?)");
      st.bind(1, design_id).bind(2, text).bind(3, rec.cardinality).bind(4, contributor).bind(5, rec.created_at);
      st.exec();
      rec.id = db_.last_insert_id();
    }
    auto ins = db_.prepare(
        "INSERT INTO configuration (space_id, idx, config_key, key_text, directive_values) VALUES (?, ?, ?, ?, ?)");
    for (const auto& cfg : space::enumerate(index)) {
      ins.bind(1, rec.id).bind(2, cfg.index).bind(3, cfg.key).bind(4, cfg.key_text).bind(5, index.to_json(cfg).dump());
      ins.exec();
    }
    tx.commit();
    return rec;
  }

  std::optional<ConfigurationSpaceRecord> find_space(std::int64_t design_id, const csd::Csd& csd) {
    std::lock_guard lock(mu_);
    return find_space_locked(design_id, csd::serialize_csd(csd));
  }

  ConfigurationSpaceRecord space(std::int64_t space_id) {
    std::lock_guard lock(mu_);
    return space_locked(space_id);
  }

  std::vector<ConfigurationSpaceRecord> spaces() {
    std::lock_guard lock(mu_);
    std::vector<ConfigurationSpaceRecord> out;
    auto st = db_.prepare(
        "SELECT id, design_id, csd_text, cardinality, contributor, created_at FROM configuration_space ORDER BY id");
    while (st.step()) out.push_back(space_row(st));
    return out;
  }

  ConfigurationRecord configuration(std::int64_t id) {
    std::lock_guard lock(mu_);
    auto st = db_.prepare(
        "SELECT id, space_id, idx, config_key, key_text, directive_values FROM configuration WHERE id = ?");
    st.bind(1, id);
    if (!st.step()) throw NotFound("unknown configuration " + std::to_string(id));
    return config_row(st);
  }

  std::vector<ConfigurationRecord> configurations(std::int64_t space_id) {
    std::lock_guard lock(mu_);
    space_locked(space_id);
    std::vector<ConfigurationRecord> out;
    auto st = db_.prepare(
        "SELECT id, space_id, idx, config_key, key_text, directive_values FROM configuration "
        "WHERE space_id = ? ORDER BY idx");
    st.bind(1, space_id);
    while (st.step()) out.push_back(config_row(st));
    return out;
  }

  // --- results ------------------------------------------------------------

  /// Commits implementation, synthesis info, resources and performance
  /// atomically. An ok result must carry every numeric field.
  ImplementationRecord record_result(std::int64_t configuration_id, const ImplementationResult& result,
                                     const SynthesisInfo& info) {
    if (!result.complete()) throw StoreError("ok result is missing resource or performance fields");
    std::lock_guard lock(mu_);
    require_schema();
    sql::Transaction tx(db_);
    {
      auto st = db_.prepare("SELECT 1 FROM configuration WHERE id = ?");
      st.bind(1, configuration_id);
      if (!st.step()) throw NotFound("unknown configuration " + std::to_string(configuration_id));
    }
    if (result.status == Status::Ok) {
      auto st = db_.prepare(
          "SELECT 1 FROM implementation i JOIN synthesis_info s ON s.implementation_id = i.id "
          "WHERE i.configuration_id = ? AND i.status = 'ok' AND s.tool_name = ? AND s.tool_version = ? "
          "AND s.fpga_part = ?");
      st.bind(1, configuration_id).bind(2, info.tool_name).bind(3, info.tool_version).bind(4, info.fpga_part);
      if (st.step())
        throw DuplicateImplementation("configuration " + std::to_string(configuration_id) +
                                      " already has an ok implementation for this tool and part");
    }
    ImplementationRecord rec;
    rec.configuration_id = configuration_id;
    rec.status = result.status;
    rec.info = info;
    if (rec.info.timestamp.empty()) rec.info.timestamp = now_iso8601();
    rec.duration_s = result.duration_s;
    rec.report_ref = result.report_ref;
    rec.diagnostic = result.diagnostic;
    {
      auto st = db_.prepare(
          "INSERT INTO implementation (configuration_id, status, duration_s, report_ref, diagnostic) "
          "VALUES (?, ?, ?, ?, ?)");
      st.bind(1, configuration_id).bind(2, status_name(result.status)).bind(3, result.duration_s)
          .bind(4, result.report_ref).bind(5, result.diagnostic);
      st.exec();
      rec.id = db_.last_insert_id();
    }
    {
      auto st = db_.prepare(
          "INSERT INTO synthesis_info (implementation_id, synthesized_at, contributor, tool_name, tool_version, "
          "fpga_part, clock_period_ns) VALUES (?, ?, ?, ?, ?, ?, ?)");
      st.bind(1, rec.id).bind(2, rec.info.timestamp).bind(3, info.contributor).bind(4, info.tool_name)
          .bind(5, info.tool_version).bind(6, info.fpga_part).bind(7, info.clock_period_ns);
      st.exec();
    }
    if (result.status == Status::Ok) {
      const auto& r = *result.resources;
      auto st = db_.prepare("INSERT INTO resources (implementation_id, ff, lut, bram, dsp) VALUES (?, ?, ?, ?, ?)");
      st.bind(1, rec.id).bind(2, r.ff).bind(3, r.lut).bind(4, r.bram).bind(5, r.dsp);
      st.exec();
      auto pf = db_.prepare(
          "INSERT INTO performance (implementation_id, latency_cycles, achieved_period_ns) VALUES (?, ?, ?)");
      pf.bind(1, rec.id).bind(2, *result.latency_cycles).bind(3, *result.achieved_period_ns);
      pf.exec();
      rec.resources = r;
      rec.latency_cycles = result.latency_cycles;
      rec.achieved_period_ns = result.achieved_period_ns;
    }
    tx.commit();
    return rec;
  }

  std::vector<ImplementationRecord> implementations(std::int64_t space_id) {
    std::lock_guard lock(mu_);
    space_locked(space_id);
    auto st = db_.prepare(
        "SELECT i.id, i.configuration_id, i.status, i.duration_s, i.report_ref, i.diagnostic, "
        "s.synthesized_at, s.contributor, s.tool_name, s.tool_version, s.fpga_part, s.clock_period_ns, "
        "r.ff, r.lut, r.bram, r.dsp, p.latency_cycles, p.achieved_period_ns "
        "FROM implementation i JOIN configuration c ON i.configuration_id = c.id "
        "JOIN synthesis_info s ON s.implementation_id = i.id "
        "LEFT JOIN resources r ON r.implementation_id = i.id "
        "LEFT JOIN performance p ON p.implementation_id = i.id "
        "WHERE c.space_id = ? ORDER BY c.idx, i.id");
    st.bind(1, space_id);
    std::vector<ImplementationRecord> out;
    while (st.step()) {
      ImplementationRecord r;
      r.id = st.get_int(0);
      r.configuration_id = st.get_int(1);
      r.status = parse_status(st.get_text(2));
      r.duration_s = st.get_double(3);
      r.report_ref = st.get_text(4);
      r.diagnostic = st.get_text(5);
      r.info = {st.get_text(6), st.get_text(7), st.get_text(8), st.get_text(9), st.get_text(10), st.get_double(11)};
      if (!st.is_null(12)) r.resources = ResourceUsage{st.get_int(12), st.get_int(13), st.get_int(14), st.get_int(15)};
      if (!st.is_null(16)) {
        r.latency_cycles = st.get_int(16);
        r.achieved_period_ns = st.get_double(17);
      }
      out.push_back(std::move(r));
    }
    return out;
  }

  /// Configurations with no implementation (of any status) under the filter,
  /// in index order.
  std::vector<ConfigurationRecord> pending_configurations(std::int64_t space_id, const ToolFilter& filter) {
    std::lock_guard lock(mu_);
    space_locked(space_id);
    auto st = db_.prepare(
        "SELECT c.id, c.space_id, c.idx, c.config_key, c.key_text, c.directive_values FROM configuration c "
        "WHERE c.space_id = ? AND NOT EXISTS (SELECT 1 FROM implementation i "
        "JOIN synthesis_info s ON s.implementation_id = i.id WHERE i.configuration_id = c.id "
        "AND s.tool_name = ? AND s.tool_version = ? AND s.fpga_part = ?) ORDER BY c.idx");
    st.bind(1, space_id).bind(2, filter.tool_name).bind(3, filter.tool_version).bind(4, filter.fpga_part);
    std::vector<ConfigurationRecord> out;
    while (st.step()) out.push_back(config_row(st));
    return out;
  }

  /// One point per ok implementation, in configuration index order.
  std::vector<DesignPoint> fetch_points(std::int64_t space_id, const ObjectiveSpec& spec) {
    if (spec.objectives.empty()) throw UnknownObjective("objective list is empty");
    std::lock_guard lock(mu_);
    space_locked(space_id);
    std::string sql =
        "SELECT c.id, r.ff, r.lut, r.bram, r.dsp, p.latency_cycles, p.achieved_period_ns "
        "FROM implementation i JOIN configuration c ON i.configuration_id = c.id "
        "JOIN synthesis_info s ON s.implementation_id = i.id "
        "JOIN resources r ON r.implementation_id = i.id JOIN performance p ON p.implementation_id = i.id "
        "WHERE c.space_id = ? AND i.status = 'ok'";
    if (spec.tool) sql += " AND s.tool_name = ? AND s.tool_version = ? AND s.fpga_part = ?";
    sql += " ORDER BY c.idx, i.id";
    auto st = db_.prepare(sql);
    st.bind(1, space_id);
    if (spec.tool) st.bind(2, spec.tool->tool_name).bind(3, spec.tool->tool_version).bind(4, spec.tool->fpga_part);

    struct Row {
      std::int64_t config;
      ResourceUsage r;
      std::int64_t latency;
      double period;
    };
    std::vector<Row> rows;
    ResourceUsage scale;
    while (st.step()) {
      Row row{st.get_int(0), {st.get_int(1), st.get_int(2), st.get_int(3), st.get_int(4)}, st.get_int(5), st.get_double(6)};
      scale.ff = std::max(scale.ff, row.r.ff);
      scale.lut = std::max(scale.lut, row.r.lut);
      scale.bram = std::max(scale.bram, row.r.bram);
      scale.dsp = std::max(scale.dsp, row.r.dsp);
      rows.push_back(row);
    }
    auto weights = spec.normalize_area ? normalized(spec.weights, scale) : spec.weights;
    std::vector<DesignPoint> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
      DesignPoint p;
      p.configuration_id = row.config;
      for (auto o : spec.objectives) {
        switch (o) {
          case Objective::LatencyCycles: p.objectives.push_back(static_cast<double>(row.latency)); break;
          case Objective::LatencyNs: p.objectives.push_back(static_cast<double>(row.latency) * row.period); break;
          case Objective::FF: p.objectives.push_back(static_cast<double>(row.r.ff)); break;
          case Objective::LUT: p.objectives.push_back(static_cast<double>(row.r.lut)); break;
          case Objective::BRAM: p.objectives.push_back(static_cast<double>(row.r.bram)); break;
          case Objective::DSP: p.objectives.push_back(static_cast<double>(row.r.dsp)); break;
          case Objective::Area: p.objectives.push_back(scalarize_area(row.r, weights)); break;
        }
      }
      out.push_back(std::move(p));
    }
    return out;
  }

  /// Row counts per table restricted to one space (taxonomy tables count the
  /// rows the space links to).
  std::map<std::string, std::int64_t> table_counts(std::int64_t space_id) {
    std::lock_guard lock(mu_);
    space_locked(space_id);
    std::map<std::string, std::int64_t> out;
    auto count = [&](const std::string& sql) {
      auto st = db_.prepare(sql);
      st.bind(1, space_id);
      st.step();
      return st.get_int(0);
    };
    out["benchmark"] = 1;
    out["algorithm"] = 1;
    out["design"] = 1;
    out["configuration_space"] = 1;
    out["configuration"] = count("SELECT COUNT(*) FROM configuration WHERE space_id = ?");
    const std::string impl_join =
        " JOIN implementation i ON x.implementation_id = i.id JOIN configuration c ON i.configuration_id = c.id "
        "WHERE c.space_id = ?";
    out["implementation"] = count(
        "SELECT COUNT(*) FROM implementation i JOIN configuration c ON i.configuration_id = c.id WHERE c.space_id = ?");
    out["synthesis_info"] = count("SELECT COUNT(*) FROM synthesis_info x" + impl_join);
    out["resources"] = count("SELECT COUNT(*) FROM resources x" + impl_join);
    out["performance"] = count("SELECT COUNT(*) FROM performance x" + impl_join);
    return out;
  }

  /// Whole-store row counts.
  std::map<std::string, std::int64_t> total_counts() {
    std::lock_guard lock(mu_);
    std::map<std::string, std::int64_t> out;
    for (auto t : kTables) {
      auto st = db_.prepare("SELECT COUNT(*) FROM " + std::string(t));
      st.step();
      out[std::string(t)] = st.get_int(0);
    }
    return out;
  }

  /// Rows whose parent is missing, or implementations without synthesis info.
  std::int64_t orphan_count() {
    std::lock_guard lock(mu_);
    static constexpr std::string_view checks[] = {
        "SELECT COUNT(*) FROM algorithm x WHERE NOT EXISTS (SELECT 1 FROM benchmark p WHERE p.id = x.benchmark_id)",
        "SELECT COUNT(*) FROM design x WHERE NOT EXISTS (SELECT 1 FROM algorithm p WHERE p.id = x.algorithm_id)",
        "SELECT COUNT(*) FROM configuration_space x WHERE NOT EXISTS (SELECT 1 FROM design p WHERE p.id = x.design_id)",
        "SELECT COUNT(*) FROM configuration x WHERE NOT EXISTS "
        "(SELECT 1 FROM configuration_space p WHERE p.id = x.space_id)",
        "SELECT COUNT(*) FROM implementation x WHERE NOT EXISTS "
        "(SELECT 1 FROM configuration p WHERE p.id = x.configuration_id)",
        "SELECT COUNT(*) FROM implementation x WHERE NOT EXISTS "
        "(SELECT 1 FROM synthesis_info p WHERE p.implementation_id = x.id)",
        "SELECT COUNT(*) FROM synthesis_info x WHERE NOT EXISTS "
        "(SELECT 1 FROM implementation p WHERE p.id = x.implementation_id)",
        "SELECT COUNT(*) FROM resources x WHERE NOT EXISTS "
        "(SELECT 1 FROM implementation p WHERE p.id = x.implementation_id)",
        "SELECT COUNT(*) FROM performance x WHERE NOT EXISTS "
        "(SELECT 1 FROM implementation p WHERE p.id = x.implementation_id)",
    };
    std::int64_t n = 0;
    for (auto q : checks) {
      auto st = db_.prepare(q);
      st.step();
      n += st.get_int(0);
    }
    return n;
  }

  // --- export / import ----------------------------------------------------

  std::string export_space(std::int64_t space_id, ExportFormat format) {
    std::lock_guard lock(mu_);
    auto sp = space_locked(space_id);
    auto tables = collect_tables(sp);
    return format == ExportFormat::JsonLines ? to_jsonl(tables) : to_sql(tables);
  }

  /// Loads a JSON-lines or SQL export. Taxonomy rows are matched by name;
  /// everything else receives fresh ids. All-or-nothing.
  ImportReport import_stream(std::string_view data) {
    auto first = data.find_first_not_of(" \t\r\n");
    if (first != std::string_view::npos && data[first] == '{') return import_jsonl(data);
    return import_sql(data);
  }

 private:
  using Row = nlohmann::ordered_json;
  using Tables = std::vector<std::pair<std::string, std::vector<Row>>>;

  int user_version() {
    auto st = db_.prepare("PRAGMA user_version");
    st.step();
    return static_cast<int>(st.get_int(0));
  }

  int table_count_locked() {
    auto st = db_.prepare("SELECT COUNT(*) FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%'");
    st.step();
    return static_cast<int>(st.get_int(0));
  }

  void require_schema() {
    int v = user_version();
    if (v != kSchemaVersion)
      throw VersionMismatch("store schema version " + std::to_string(v) + ", expected " +
                            std::to_string(kSchemaVersion) + " (run init-db)");
  }

  DesignRecord ensure_design_locked(const DesignRef& ref) {
    auto upsert = [&](const std::string& select, const std::string& insert, auto&& bind_keys) {
      auto st = db_.prepare(select);
      bind_keys(st);
      if (st.step()) return st.get_int(0);
      auto ins = db_.prepare(insert);
      bind_keys(ins);
      ins.exec();
      return db_.last_insert_id();
    };
    auto bench = upsert("SELECT id FROM benchmark WHERE name = ?", "INSERT INTO benchmark (name) VALUES (?)",
                        [&](sql::Statement& s) { s.bind(1, ref.benchmark); });
    auto algo = upsert("SELECT id FROM algorithm WHERE benchmark_id = ? AND name = ?",
                       "INSERT INTO algorithm (benchmark_id, name) VALUES (?, ?)",
                       [&](sql::Statement& s) { s.bind(1, bench).bind(2, ref.algorithm); });
    auto st = db_.prepare("SELECT id, function_name, source_ref FROM design WHERE algorithm_id = ? AND name = ?");
    st.bind(1, algo).bind(2, ref.design);
    if (st.step()) return {st.get_int(0), algo, ref.design, st.get_text(1), st.get_text(2)};
    auto ins = db_.prepare("INSERT INTO design (algorithm_id, name, function_name, source_ref) VALUES (?, ?, ?, ?)");
    ins.bind(1, algo).bind(2, ref.design).bind(3, ref.function_name).bind(4, ref.source_ref);
    ins.exec();
    return {db_.last_insert_id(), algo, ref.design, ref.function_name, ref.source_ref};
  }

  static ConfigurationSpaceRecord space_row(sql::Statement& st) {
    return {st.get_int(0), st.get_int(1), st.get_text(2), static_cast<std::uint64_t>(st.get_int(3)),
            st.get_text(4), st.get_text(5)};
  }

  static ConfigurationRecord config_row(sql::Statement& st) {
    return {st.get_int(0), st.get_int(1), static_cast<std::uint64_t>(st.get_int(2)),
            st.get_text(3), st.get_text(4), st.get_text(5)};
  }

  std::optional<ConfigurationSpaceRecord> find_space_locked(std::int64_t design_id, const std::string& text) {
    auto st = db_.prepare(
        "SELECT id, design_id, csd_text, cardinality, contributor, created_at FROM configuration_space "
        "WHERE design_id = ? AND csd_text = ?");
    st.bind(1, design_id).bind(2, text);
    if (!st.step()) return std::nullopt;
    return space_row(st);
  }

  ConfigurationSpaceRecord space_locked(std::int64_t space_id) {
    require_schema();
    auto st = db_.prepare(
        "SELECT id, design_id, csd_text, cardinality, contributor, created_at FROM configuration_space WHERE id = ?");
    st.bind(1, space_id);
    if (!st.step()) throw NotFound("unknown configuration space " + std::to_string(space_id));
    return space_row(st);
  }

  std::vector<Row> dump_rows(const std::string& sql, std::int64_t key) {
    auto st = db_.prepare(sql);
    st.bind(1, key);
    std::vector<Row> rows;
    while (st.step()) {
      Row row;
      for (int c = 0; c < st.column_count(); ++c) {
        auto name = st.column_name(c);
        switch (st.column_type(c)) {
          case SQLITE_INTEGER: row[name] = st.get_int(c); break;
          case SQLITE_FLOAT: row[name] = st.get_double(c); break;
          case SQLITE_NULL: row[name] = nullptr; break;
          default: row[name] = st.get_text(c); break;
        }
      }
      rows.push_back(std::move(row));
    }
    return rows;
  }

  Tables collect_tables(const ConfigurationSpaceRecord& sp) {
    Tables t;
    const std::string impl_of_space =
        "SELECT i.id FROM implementation i JOIN configuration c ON i.configuration_id = c.id WHERE c.space_id = ?";
    t.emplace_back("benchmark", dump_rows("SELECT b.* FROM benchmark b JOIN algorithm a ON a.benchmark_id = b.id "
                                          "JOIN design d ON d.algorithm_id = a.id WHERE d.id = ?",
                                          sp.design_id));
    t.emplace_back("algorithm",
                   dump_rows("SELECT a.* FROM algorithm a JOIN design d ON d.algorithm_id = a.id WHERE d.id = ?",
                             sp.design_id));
    t.emplace_back("design", dump_rows("SELECT * FROM design WHERE id = ?", sp.design_id));
    t.emplace_back("configuration_space", dump_rows("SELECT * FROM configuration_space WHERE id = ?", sp.id));
    t.emplace_back("configuration", dump_rows("SELECT * FROM configuration WHERE space_id = ? ORDER BY idx", sp.id));
    t.emplace_back("implementation",
                   dump_rows("SELECT * FROM implementation WHERE id IN (" + impl_of_space + ") ORDER BY id", sp.id));
    for (auto name : {"synthesis_info", "resources", "performance"})
      t.emplace_back(name, dump_rows("SELECT * FROM " + std::string(name) + " WHERE implementation_id IN (" +
                                         impl_of_space + ") ORDER BY id",
                                     sp.id));
    return t;
  }

  static std::string to_jsonl(const Tables& tables) {
    std::string out;
    Row meta;
    meta["table"] = "meta";
    meta["format"] = "db4hls-jsonl";
    meta["schema_version"] = kSchemaVersion;
    meta["exported_at"] = now_iso8601();
    out += meta.dump() + "\n";
    std::int64_t records = 0;
    for (const auto& [name, rows] : tables)
      for (const auto& row : rows) {
        Row r;
        r["table"] = name;
        for (const auto& [k, v] : row.items()) r[k] = v;
        out += r.dump() + "\n";
        ++records;
      }
    Row end;
    end["table"] = "end";
    end["records"] = records;
    out += end.dump() + "\n";
    return out;
  }

  static std::string sql_literal(const nlohmann::ordered_json& v) {
    if (v.is_null()) return "NULL";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
      std::string s = buf;
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    std::string s = v.get<std::string>();
    std::string out = "'";
    for (char c : s) {
      if (c == '\'') out += "''";
      else out += c;
    }
    return out + "'";
  }

  static std::string to_sql(const Tables& tables) {
    std::string out = "-- db4hls export, schema version " + std::to_string(kSchemaVersion) + "\n";
    out += "PRAGMA user_version = " + std::to_string(kSchemaVersion) + ";\n";
    out += std::string(kSchemaDdl);
    for (const auto& [name, rows] : tables)
      for (const auto& row : rows) {
        std::string cols, vals;
        for (const auto& [k, v] : row.items()) {
          if (!cols.empty()) {
            cols += ", ";
            vals += ", ";
          }
          cols += k;
          vals += sql_literal(v);
        }
        out += "INSERT INTO " + name + " (" + cols + ") VALUES (" + vals + ");\n";
      }
    return out;
  }

  ImportReport import_sql(std::string_view data) {
    std::lock_guard lock(mu_);
    std::string text(data);
    if (auto pos = text.find("PRAGMA user_version = "); pos != std::string::npos) {
      int v = std::atoi(text.c_str() + pos + 22);
      if (v != kSchemaVersion)
        throw VersionMismatch("export schema version " + std::to_string(v) + ", expected " +
                              std::to_string(kSchemaVersion));
    } else {
      throw ImportError("SQL export lacks a schema version", -1);
    }
    int v = user_version();
    if (v != 0 && v != kSchemaVersion) throw VersionMismatch("store schema version " + std::to_string(v));
    auto before = space_ids();
    {
      sql::Transaction tx(db_);
      try {
        db_.exec(text);
      } catch (const sql::SqlError& e) {
        throw ImportError(std::string("SQL import failed: ") + e.what(), -1);
      }
      tx.commit();
    }
    ImportReport rep;
    for (auto id : space_ids())
      if (!std::count(before.begin(), before.end(), id)) rep.space_id = id;
    return rep;
  }

  std::vector<std::int64_t> space_ids() {
    std::vector<std::int64_t> ids;
    if (table_count_locked() == 0) return ids;
    auto st = db_.prepare("SELECT id FROM configuration_space");
    while (st.step()) ids.push_back(st.get_int(0));
    return ids;
  }

  ImportReport import_jsonl(std::string_view data) {
    std::lock_guard lock(mu_);
    require_schema();
    sql::Transaction tx(db_);
    ImportReport rep;
    std::int64_t record = -1;  // index of the last good record (meta line excluded)
    std::map<std::string, std::map<std::int64_t, std::int64_t>> ids;
    bool saw_meta = false, saw_end = false;
    std::uint64_t cardinality = 0;

    auto remap = [&](const std::string& table, const Row& row, const char* field) {
      auto& m = ids[table];
      auto it = m.find(row.at(field).get<std::int64_t>());
      if (it == m.end())
        throw ImportError("record references unknown " + table + " " + row.at(field).dump(), record);
      return it->second;
    };
    auto insert = [&](const std::string& table, const Row& row, const std::vector<std::string>& skip,
                      const std::map<std::string, std::int64_t>& fk) {
      std::string cols, marks;
      std::vector<const nlohmann::ordered_json*> vals;
      for (const auto& [k, v] : row.items()) {
        if (k == "table" || k == "id" || std::count(skip.begin(), skip.end(), k)) continue;
        if (!cols.empty()) {
          cols += ", ";
          marks += ", ";
        }
        cols += k;
        marks += "?";
        vals.push_back(&v);
      }
      for (const auto& [k, v] : fk) {
        if (!cols.empty()) {
          cols += ", ";
          marks += ", ";
        }
        cols += k;
        marks += "?";
      }
      auto st = db_.prepare("INSERT INTO " + table + " (" + cols + ") VALUES (" + marks + ")");
      int i = 1;
      for (const auto* v : vals) {
        if (v->is_null()) st.bind_null(i);
        else if (v->is_number_integer()) st.bind(i, v->get<std::int64_t>());
        else if (v->is_number()) st.bind(i, v->get<double>());
        else if (v->is_string()) st.bind(i, v->get<std::string>());
        else st.bind(i, v->dump());
        ++i;
      }
      for (const auto& [k, v] : fk) st.bind(i++, v);
      try {
        st.exec();
      } catch (const sql::SqlError& e) {
        throw ImportError("cannot insert " + table + " row: " + e.what(), record);
      }
      ids[table][row.at("id").get<std::int64_t>()] = db_.last_insert_id();
      ++rep.rows[table];
    };

    std::size_t pos = 0;
    while (pos < data.size()) {
      auto nl = data.find('\n', pos);
      if (nl == std::string_view::npos) throw ImportError("truncated stream: unterminated final line", record);
      auto line = csd::detail::trim(data.substr(pos, nl - pos));
      pos = nl + 1;
      if (line.empty()) continue;
      if (saw_end) throw ImportError("data after end marker", record);
      Row row;
      try {
        row = Row::parse(line);
        row.at("table");
      } catch (const nlohmann::json::exception& e) {
        throw ImportError(std::string("malformed record: ") + e.what(), record);
      }
      const auto table = row["table"].get<std::string>();
      try {
        if (!saw_meta) {
          if (table != "meta" || row.value("format", "") != "db4hls-jsonl")
            throw ImportError("stream does not start with a db4hls meta record", record);
          if (row.at("schema_version").get<int>() != kSchemaVersion)
            throw VersionMismatch("export schema version " + row.at("schema_version").dump() + ", expected " +
                                  std::to_string(kSchemaVersion));
          saw_meta = true;
          continue;
        }
        if (table == "end") {
          if (row.at("records").get<std::int64_t>() != record + 1)
            throw ImportError("end marker counts " + row.at("records").dump() + " records, stream had " +
                                  std::to_string(record + 1),
                              record);
          saw_end = true;
          continue;
        }
        if (table == "benchmark") {
          auto st = db_.prepare("SELECT id FROM benchmark WHERE name = ?");
          st.bind(1, row.at("name").get<std::string>());
          if (st.step()) ids[table][row.at("id").get<std::int64_t>()] = st.get_int(0);
          else insert(table, row, {}, {});
        } else if (table == "algorithm") {
          auto bench = remap("benchmark", row, "benchmark_id");
          auto st = db_.prepare("SELECT id FROM algorithm WHERE benchmark_id = ? AND name = ?");
          st.bind(1, bench).bind(2, row.at("name").get<std::string>());
          if (st.step()) ids[table][row.at("id").get<std::int64_t>()] = st.get_int(0);
          else insert(table, row, {"benchmark_id"}, {{"benchmark_id", bench}});
        } else if (table == "design") {
          auto algo = remap("algorithm", row, "algorithm_id");
          auto st = db_.prepare("SELECT id FROM design WHERE algorithm_id = ? AND name = ?");
          st.bind(1, algo).bind(2, row.at("name").get<std::string>());
          if (st.step()) ids[table][row.at("id").get<std::int64_t>()] = st.get_int(0);
          else insert(table, row, {"algorithm_id"}, {{"algorithm_id", algo}});
        } else if (table == "configuration_space") {
          auto design = remap("design", row, "design_id");
          auto text = row.at("csd_text").get<std::string>();
          if (find_space_locked(design, text)) throw DuplicateSpace("space already present in the store");
          cardinality = row.at("cardinality").get<std::uint64_t>();
          if (space::cardinality(csd::parse_csd(text)) != cardinality)
            throw ImportError("space cardinality does not match its descriptor", record);
          insert(table, row, {"design_id"}, {{"design_id", design}});
          rep.space_id = ids[table].begin()->second;
        } else if (table == "configuration") {
          insert(table, row, {"space_id"}, {{"space_id", remap("configuration_space", row, "space_id")}});
        } else if (table == "implementation") {
          insert(table, row, {"configuration_id"},
                 {{"configuration_id", remap("configuration", row, "configuration_id")}});
        } else if (table == "synthesis_info" || table == "resources" || table == "performance") {
          insert(table, row, {"implementation_id"},
                 {{"implementation_id", remap("implementation", row, "implementation_id")}});
        } else {
          throw ImportError("unknown table '" + table + "'", record);
        }
      } catch (const nlohmann::json::exception& e) {
        throw ImportError(std::string("bad field in ") + table + " record: " + e.what(), record);
      }
      ++record;
    }
    if (!saw_meta) throw ImportError("empty stream", record);
    if (!saw_end) throw ImportError("truncated stream: missing end marker", record);
    if (rep.rows["configuration_space"] != 1) throw ImportError("stream must contain exactly one space", record);
    if (static_cast<std::uint64_t>(rep.rows["configuration"]) != cardinality)
      throw ImportError("configuration rows do not cover the space", record);
    rep.records = record + 1;
    tx.commit();
    return rep;
  }

  std::string path_;
  sql::Connection db_;
  std::mutex mu_;
};

}  // namespace db4hls::store
