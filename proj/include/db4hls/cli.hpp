#pragma once

// Command-line front end. run_cli() is callable in-process; tools/db4hls.cpp
// only forwards argv.
//
// Exit codes: 0 success, 1 domain error, 2 usage or I/O error.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "db4hls/analytics.hpp"
#include "db4hls/config_space.hpp"
#include "db4hls/csd.hpp"
#include "db4hls/datastore.hpp"
#include "db4hls/orchestrator.hpp"

namespace db4hls::cli {

/// Bad flags, missing files, unwritable outputs: exit 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { Text, Json, Csv };

namespace detail {

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
}

inline std::string num(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

/// Rows of named columns, rendered as aligned-free TSV text, CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::ordered_json>> rows;

  static std::string cell(const nlohmann::ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    if (v.is_number_float()) return num(v.get<double>());
    return v.dump();
  }

  void print(std::ostream& out, OutputFormat f) const {
    if (f == OutputFormat::Json) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& r : rows) {
        nlohmann::ordered_json o;
        for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = r[i];
        arr.push_back(std::move(o));
      }
      out << arr.dump(2) << '\n';
      return;
    }
    const char* sep = f == OutputFormat::Csv ? "," : "\t";
    auto emit = [&](auto&& get, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out << sep;
        auto s = get(i);
        out << (f == OutputFormat::Csv ? csv_cell(s) : s);
      }
      out << '\n';
    };
    emit([&](std::size_t i) { return columns[i]; }, columns.size());
    for (const auto& r : rows) emit([&](std::size_t i) { return cell(r[i]); }, r.size());
  }
};

/// key=value pairs for text, an object for JSON, a two-row table for CSV.
inline void print_record(std::ostream& out, OutputFormat f, const nlohmann::ordered_json& rec) {
  if (f == OutputFormat::Json) {
    out << rec.dump(2) << '\n';
    return;
  }
  Table t;
  t.rows.emplace_back();
  for (const auto& [k, v] : rec.items()) {
    t.columns.push_back(k);
    t.rows.back().push_back(v);
  }
  if (f == OutputFormat::Csv) {
    t.print(out, f);
    return;
  }
  bool first = true;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    out << (first ? "" : " ") << t.columns[i] << '=' << Table::cell(t.rows[0][i]);
    first = false;
  }
  out << '\n';
}

inline store::AreaWeights parse_weights(const std::string& text) {
  store::AreaWeights w{0, 0, 0, 0};
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("weight '" + item + "' is not name=value");
    auto name = std::string(csd::detail::trim(item.substr(0, eq)));
    double v = 0;
    auto val = std::string(csd::detail::trim(item.substr(eq + 1)));
    auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || p != val.data() + val.size()) throw UsageError("weight '" + item + "' is not numeric");
    if (name == "ff") w.ff = v;
    else if (name == "lut") w.lut = v;
    else if (name == "bram") w.bram = v;
    else if (name == "dsp") w.dsp = v;
    else throw UsageError("unknown resource '" + name + "' in weights");
  }
  return w;
}

inline std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    auto s = std::string(csd::detail::trim(item));
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("'" + text + "' is not a number list");
    out.push_back(v);
  }
  return out;
}

inline nlohmann::ordered_json diag_json(const csd::Diagnostic& d) {
  return {{"line", d.line}, {"column", d.column}, {"code", csd::diag_name(d.code)}, {"message", d.message}};
}

inline void print_diagnostics(std::ostream& err, const std::string& path, const std::vector<csd::Diagnostic>& ds) {
  for (const auto& d : ds)
    err << path << ':' << d.line << ':' << d.column << ": " << csd::diag_name(d.code) << ": " << d.message << '\n';
}

inline std::string knob_values(const std::vector<csd::Value>& vs) {
  std::string s;
  for (const auto& v : vs) s += (s.empty() ? "" : " ") + v.to_string();
  return s;
}

}  // namespace detail

struct CliConfig {
  std::string db_path;
  unsigned jobs = 1;
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::Text;
};

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err, const std::atomic<bool>* stop) : out_(out), err_(err), stop_(stop) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Configuration-space design exploration database", "db4hls"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "text";
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}));
    auto* db_opt = app.add_option("--db", cfg_.db_path, "Database file (default: $DB4HLS_DB)");
    app.add_option("--seed", cfg_.seed, "Seed for sampling, mock synthesis and strategies");

    std::string csd_path;
    auto* validate = app.add_subcommand("validate", "Check a CSD file");
    validate->add_option("csd", csd_path)->required();

    auto* count = app.add_subcommand("count", "Print the configuration space cardinality");
    count->add_option("csd", csd_path)->required();

    std::uint64_t limit = 0, offset = 0, sample_n = 0;
    auto* expand = app.add_subcommand("expand", "List configurations");
    expand->add_option("csd", csd_path)->required();
    expand->add_option("--offset", offset, "First index");
    expand->add_option("--limit", limit, "At most this many (0: all)");
    expand->add_option("--sample", sample_n, "Uniform sample of this size instead of a range");

    auto* init = app.add_subcommand("init-db", "Create or check the database schema");

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Register a space if needed and synthesize its pending configurations");
    run->add_option("csd", csd_path)->required();
    auto* jobs_opt = run->add_option("-j,--jobs", cfg_.jobs, "Concurrent backend instances (default: $DB4HLS_JOBS or 1)")
                         ->check(CLI::Range(1u, 4096u));
    run->add_option("--backend", ro.backend)->check(CLI::IsMember({"mock", "external"}));
    run->add_option("--benchmark", ro.ref.benchmark);
    run->add_option("--algorithm", ro.ref.algorithm);
    run->add_option("--design", ro.ref.design);
    run->add_option("--function", ro.ref.function_name);
    run->add_option("--source", ro.ref.source_ref);
    run->add_option("--contributor", ro.contributor);
    run->add_option("--log", ro.log, "Campaign event log (JSON lines, appended)");
    run->add_option("--tool-name", ro.spec.tool_name);
    run->add_option("--tool-version", ro.spec.tool_version);
    run->add_option("--part", ro.spec.fpga_part);
    run->add_option("--command", ro.spec.command, "Tool command with {config_dir} {design_src} {script}");
    run->add_option("--work-dir", ro.spec.work_root, "Root of per-configuration sandboxes");
    run->add_option("--design-src", ro.spec.design_src);
    run->add_option("--timeout", ro.spec.timeout_s, "Seconds per synthesis");
    run->add_option("--report", ro.spec.report_pattern, "Report path pattern");
    run->add_option("--report-format", ro.spec.report_format)->check(CLI::IsMember({"xml", "json"}));
    run->add_option("--mock-delay-ms", ro.spec.mock_delay_ms);
    run->add_option("--mock-fail-rate", ro.spec.mock_fail_rate);

    QueryOptions qo;
    auto* query = app.add_subcommand("query", "Inspect stored data");
    query->add_option("what", qo.what, "spaces | configurations | implementations | pending | points | counts")
        ->required()
        ->check(CLI::IsMember({"spaces", "configurations", "implementations", "pending", "points", "counts"}));
    query->add_option("--space", qo.space);
    add_objective_flags(query, qo.obj);
    add_tool_flags(query, qo.tool);

    AnalyzeOptions ao;
    auto* analyze = app.add_subcommand("analyze", "Pareto front, ADRS, hypervolume or strategy evaluation");
    analyze->add_option("--space", ao.space)->required();
    analyze->add_option("--mode", ao.mode)->check(CLI::IsMember({"pareto", "adrs", "hv", "eval"}));
    analyze->add_option("--out", ao.out, "Directory for points.csv, summary.json, front.dat");
    analyze->add_option("--ref", ao.ref, "Hypervolume reference point, comma separated");
    analyze->add_option("--approx-space", ao.approx_space, "ADRS approximation taken from this space's front");
    analyze->add_option("--strategy", ao.strategy)->check(CLI::IsMember({"exhaustive", "random", "hill_climb"}));
    analyze->add_option("--fraction", ao.fraction, "Budget as a fraction of |CS|")->check(CLI::Range(0.0, 1.0));
    analyze->add_option("--budget", ao.budget, "Budget in queries (overrides --fraction)");
    add_objective_flags(analyze, ao.obj);
    add_tool_flags(analyze, ao.tool);

    ExportOptions eo;
    auto* exp = app.add_subcommand("export", "Dump one space with all its results");
    exp->add_option("--space", eo.space)->required();
    exp->add_option("--to", eo.to)->check(CLI::IsMember({"jsonl", "sql"}));
    exp->add_option("-o,--out", eo.out, "Output file (default: stdout)");

    std::string import_path;
    auto* imp = app.add_subcommand("import", "Load an export into the database");
    imp->add_option("file", import_path)->required();

    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out_, err_);
    } catch (const CLI::ParseError& e) {
      app.exit(e, out_, err_);
      return 2;
    }
    // Environment defaults, read here so that bad values are reported rather than ignored.
    if (db_opt->count() == 0)
      if (const char* env = std::getenv("DB4HLS_DB")) cfg_.db_path = env;
    if (jobs_opt->count() == 0)
      if (const char* env = std::getenv("DB4HLS_JOBS")) {
        std::string_view v(env);
        unsigned n = 0;
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
        if (ec != std::errc() || p != v.data() + v.size() || n < 1 || n > 4096) {
          err_ << "error: DB4HLS_JOBS must be an integer in [1, 4096], got '" << env << "'\n";
          return 2;
        }
        cfg_.jobs = n;
      }
    cfg_.format = format == "json" ? OutputFormat::Json : format == "csv" ? OutputFormat::Csv : OutputFormat::Text;

    try {
      if (validate->parsed()) return cmd_validate(csd_path);
      if (count->parsed()) return cmd_count(csd_path);
      if (expand->parsed()) return cmd_expand(csd_path, offset, limit, sample_n);
      if (init->parsed()) return cmd_init();
      if (run->parsed()) return cmd_run(csd_path, ro);
      if (query->parsed()) return cmd_query(qo);
      if (analyze->parsed()) return cmd_analyze(ao);
      if (exp->parsed()) return cmd_export(eo);
      if (imp->parsed()) return cmd_import(import_path);
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << '\n';
      return 2;
    } catch (const csd::CsdError& e) {
      detail::print_diagnostics(err_, csd_path, e.diagnostics());
      return 1;
    } catch (const store::ImportError& e) {
      err_ << "error: " << e.what() << '\n';
      return 1;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << '\n';
      return 1;
    }
    return 2;
  }

 private:
  struct ObjectiveFlags {
    std::string objectives = "latency,lut";
    std::string weights;
    bool normalize = false;
    std::string latency_units = "cycles";
  };
  struct ToolFlags {
    std::string name, version, part;
  };
  struct RunOptions {
    std::string backend = "mock";
    store::DesignRef ref;
    std::string contributor = "db4hls";
    std::string log;
    orch::BackendSpec spec;
  };
  struct QueryOptions {
    std::string what;
    std::int64_t space = 0;
    ObjectiveFlags obj;
    ToolFlags tool;
  };
  struct AnalyzeOptions {
    std::int64_t space = 0;
    std::string mode = "pareto";
    std::string out = ".";
    std::string ref;
    std::int64_t approx_space = 0;
    std::string strategy = "random";
    double fraction = 0.1;
    std::uint64_t budget = 0;
    ObjectiveFlags obj;
    ToolFlags tool;
  };
  struct ExportOptions {
    std::int64_t space = 0;
    std::string to = "jsonl";
    std::string out;
  };

  static void add_objective_flags(CLI::App* app, ObjectiveFlags& o) {
    app->add_option("--objectives", o.objectives, "Comma-separated: latency, latency_ns, ff, lut, bram, dsp, area");
    app->add_option("--weights", o.weights, "Area weights, e.g. ff=1,lut=1,bram=0,dsp=0");
    app->add_flag("--normalize", o.normalize, "Scale resources by their maximum over the space before weighting");
    app->add_option("--latency-units", o.latency_units, "Projection of 'latency'")
        ->check(CLI::IsMember({"cycles", "ns"}));
  }
  static void add_tool_flags(CLI::App* app, ToolFlags& t) {
    app->add_option("--tool-name", t.name);
    app->add_option("--tool-version", t.version);
    app->add_option("--part", t.part);
  }

  static store::ObjectiveSpec objective_spec(const ObjectiveFlags& o, const ToolFlags& t) {
    auto spec = store::ObjectiveSpec::parse(o.objectives);
    if (o.latency_units == "ns")
      for (auto& x : spec.objectives)
        if (x == store::Objective::LatencyCycles) x = store::Objective::LatencyNs;
    if (!o.weights.empty()) spec.weights = detail::parse_weights(o.weights);
    spec.normalize_area = o.normalize;
    if (!t.name.empty() || !t.version.empty() || !t.part.empty()) {
      if (t.name.empty() || t.version.empty() || t.part.empty())
        throw UsageError("--tool-name, --tool-version and --part go together");
      spec.tool = ToolFilter{t.name, t.version, t.part};
    }
    return spec;
  }

  store::Store open_store(bool must_exist = true) {
    if (cfg_.db_path.empty()) throw UsageError("no database given (use --db or DB4HLS_DB)");
    if (must_exist && !std::filesystem::exists(cfg_.db_path))
      throw UsageError("no database at '" + cfg_.db_path + "' (run init-db first)");
    try {
      return store::Store(cfg_.db_path);
    } catch (const sql::SqlError& e) {
      throw UsageError(e.what());
    }
  }

  // --- subcommands --------------------------------------------------------

  int cmd_validate(const std::string& path) {
    auto text = detail::read_text(path);
    std::vector<csd::Diagnostic> diags;
    std::uint64_t card = 0;
    try {
      auto c = csd::parse_csd(text);
      card = space::cardinality(c);
    } catch (const csd::CsdError& e) {
      diags = e.diagnostics();
    } catch (const space::OverflowError& e) {
      diags.push_back({csd::DiagCode::Syntax, -1, 0, 0, e.what()});
    }
    detail::print_diagnostics(err_, path, diags);
    if (cfg_.format == OutputFormat::Json) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& d : diags) arr.push_back(detail::diag_json(d));
      nlohmann::ordered_json j{{"file", path}, {"valid", diags.empty()}, {"diagnostics", arr}};
      if (diags.empty()) j["cardinality"] = card;
      out_ << j.dump(2) << '\n';
    } else if (diags.empty()) {
      detail::print_record(out_, cfg_.format, {{"file", path}, {"valid", true}, {"cardinality", card}});
    }
    return diags.empty() ? 0 : 1;
  }

  int cmd_count(const std::string& path) {
    auto card = space::cardinality(csd::parse_csd(detail::read_text(path)));
    if (cfg_.format == OutputFormat::Text) out_ << card << '\n';
    else detail::print_record(out_, cfg_.format, {{"cardinality", card}});
    return 0;
  }

  int cmd_expand(const std::string& path, std::uint64_t offset, std::uint64_t limit, std::uint64_t sample_n) {
    auto c = csd::parse_csd(detail::read_text(path));
    space::SpaceIndex index(c);
    std::vector<space::Configuration> configs;
    if (sample_n) {
      configs = space::sample(index, sample_n, cfg_.seed);
    } else {
      if (offset > index.total()) throw UsageError("offset beyond the space");
      auto end = limit ? std::min(index.total(), offset + limit) : index.total();
      for (auto i = offset; i < end; ++i) configs.push_back(index.decode(i));
    }
    if (cfg_.format == OutputFormat::Json) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& cfg : configs)
        arr.push_back({{"index", cfg.index}, {"key", cfg.key}, {"directives", index.to_json(cfg)}});
      out_ << arr.dump(2) << '\n';
      return 0;
    }
    detail::Table t;
    t.columns = {"index", "key"};
    for (const auto& k : c.knobs) t.columns.push_back(k.head());
    for (const auto& cfg : configs) {
      std::vector<nlohmann::ordered_json> row{cfg.index, cfg.key};
      for (const auto& a : cfg.assignments) row.push_back(detail::knob_values(a));
      t.rows.push_back(std::move(row));
    }
    t.print(out_, cfg_.format);
    return 0;
  }

  int cmd_init() {
    auto db = open_store(false);
    db.init_schema();
    detail::print_record(out_, cfg_.format, {{"db", cfg_.db_path}, {"schema_version", db.schema_version()}});
    return 0;
  }

  int cmd_run(const std::string& path, RunOptions ro) {
    if (cfg_.jobs < 1) throw UsageError("jobs must be at least 1");
    auto text = detail::read_text(path);
    auto c = csd::parse_csd(text);
    auto stem = std::filesystem::path(path).stem().string();
    if (ro.ref.benchmark.empty()) ro.ref.benchmark = "default";
    if (ro.ref.algorithm.empty()) ro.ref.algorithm = stem;
    if (ro.ref.design.empty()) ro.ref.design = stem;
    if (ro.ref.function_name.empty())
      for (const auto& k : c.knobs)
        if (!k.function.empty()) {
          ro.ref.function_name = k.function;
          break;
        }
    if (ro.backend == "external") {
      ro.spec.kind = orch::BackendSpec::Kind::ExternalTool;
      if (ro.spec.tool_name == orch::BackendSpec{}.tool_name) ro.spec.tool_name = "external";
    }
    try {
      ro.spec.validate();
    } catch (const orch::BackendConfigError& e) {
      throw UsageError(e.what());
    }

    auto db = open_store();
    auto design = db.ensure_design(ro.ref);
    auto sp = db.find_space(design.id, c);
    bool fresh = !sp;
    if (!sp) sp = db.register_space(design.id, c, ro.contributor);

    orch::Campaign camp;
    camp.space_id = sp->id;
    camp.backend = ro.spec;
    camp.jobs = cfg_.jobs;
    camp.seed = cfg_.seed;
    camp.contributor = ro.contributor;
    camp.log_path = ro.log;
    camp.stop = stop_;
    auto rep = orch::run_campaign(db, camp);
    detail::print_record(out_, cfg_.format,
                         {{"space", sp->id},
                          {"registered", fresh},
                          {"cardinality", sp->cardinality},
                          {"attempted", rep.attempted},
                          {"ok", rep.ok},
                          {"failed", rep.failed},
                          {"timeout", rep.timeout},
                          {"pending", rep.pending_after},
                          {"max_in_flight", rep.max_in_flight},
                          {"wall_s", std::round(rep.wall_s * 1000.0) / 1000.0}});
    return 0;
  }

  int cmd_query(const QueryOptions& q) {
    auto db = open_store();
    detail::Table t;
    if (q.what == "spaces") {
      t.columns = {"id", "benchmark", "algorithm", "design", "cardinality", "implementations", "contributor",
                   "created_at"};
      for (const auto& sp : db.spaces()) {
        auto ref = db.design_ref(sp.design_id);
        t.rows.push_back({sp.id, ref.benchmark, ref.algorithm, ref.design, sp.cardinality,
                          db.table_counts(sp.id).at("implementation"), sp.contributor, sp.created_at});
      }
      t.print(out_, cfg_.format);
      return 0;
    }
    if (q.space == 0) throw UsageError("--space is required for '" + q.what + "'");
    if (q.what == "configurations" || q.what == "pending") {
      std::vector<store::ConfigurationRecord> rows;
      if (q.what == "configurations") {
        rows = db.configurations(q.space);
      } else {
        ToolFilter f = orch::BackendSpec{}.filter();
        if (!q.tool.name.empty()) f.tool_name = q.tool.name;
        if (!q.tool.version.empty()) f.tool_version = q.tool.version;
        if (!q.tool.part.empty()) f.fpga_part = q.tool.part;
        rows = db.pending_configurations(q.space, f);
      }
      t.columns = {"id", "index", "key", "key_text"};
      for (const auto& r : rows) t.rows.push_back({r.id, r.index, r.config_key, r.key_text});
    } else if (q.what == "implementations") {
      t.columns = {"id", "configuration_id", "status", "ff", "lut", "bram", "dsp", "latency_cycles",
                   "achieved_period_ns", "tool_name", "tool_version", "fpga_part", "duration_s", "diagnostic"};
      for (const auto& r : db.implementations(q.space)) {
        using J = nlohmann::ordered_json;
        J ff, lut, bram, dsp, lat, per;
        if (r.resources) {
          ff = r.resources->ff;
          lut = r.resources->lut;
          bram = r.resources->bram;
          dsp = r.resources->dsp;
        }
        if (r.latency_cycles) lat = *r.latency_cycles;
        if (r.achieved_period_ns) per = *r.achieved_period_ns;
        t.rows.push_back({r.id, r.configuration_id, std::string(status_name(r.status)), ff, lut, bram, dsp, lat, per,
                          r.info.tool_name, r.info.tool_version, r.info.fpga_part, r.duration_s, r.diagnostic});
      }
    } else if (q.what == "points") {
      auto spec = objective_spec(q.obj, q.tool);
      t.columns = {"configuration_id"};
      for (auto o : spec.objectives) t.columns.emplace_back(store::objective_name(o));
      for (const auto& p : db.fetch_points(q.space, spec)) {
        std::vector<nlohmann::ordered_json> row{p.configuration_id};
        for (double x : p.objectives) row.emplace_back(x);
        t.rows.push_back(std::move(row));
      }
    } else {  // counts
      t.columns = {"table", "rows"};
      for (const auto& [name, n] : db.table_counts(q.space)) t.rows.push_back({name, n});
    }
    t.print(out_, cfg_.format);
    return 0;
  }

  int cmd_analyze(const AnalyzeOptions& a) {
    namespace fs = std::filesystem;
    auto db = open_store();
    auto spec = objective_spec(a.obj, a.tool);
    auto sp = db.space(a.space);
    auto points = db.fetch_points(a.space, spec);
    if (points.empty()) throw analytics::AnalyticsError("space " + std::to_string(a.space) + " has no ok results");
    std::map<std::int64_t, std::uint64_t> index_of;
    for (const auto& c : db.configurations(a.space)) index_of[c.id] = c.index;

    auto front = analytics::pareto_front(points);
    std::set<std::int64_t> on_front;
    for (const auto& ids : front.ids) on_front.insert(ids.begin(), ids.end());
    const auto dim = spec.objectives.size();

    nlohmann::ordered_json summary;
    summary["mode"] = a.mode;
    summary["space"] = a.space;
    auto names = nlohmann::ordered_json::array();
    for (auto o : spec.objectives) names.push_back(store::objective_name(o));
    summary["objectives"] = names;
    summary["n_points"] = points.size();
    summary["front_size"] = front.size();
    summary["adrs"] = nullptr;
    summary["hypervolume"] = nullptr;
    summary["queries"] = nullptr;

    std::set<std::int64_t> queried;
    if (a.mode == "adrs") {
      auto approx = front.points;
      if (a.approx_space) {
        auto other = db.fetch_points(a.approx_space, spec);
        if (other.empty())
          throw analytics::AnalyticsError("space " + std::to_string(a.approx_space) + " has no ok results");
        approx = analytics::pareto_front(other).points;
      }
      summary["adrs"] = analytics::adrs(front.points, approx);
    } else if (a.mode == "hv") {
      if (dim != 2) throw analytics::AnalyticsError("hypervolume needs exactly two objectives");
      DesignPoint ref;
      if (!a.ref.empty()) {
        ref.objectives = detail::parse_vector(a.ref);
      } else {
        ref.objectives.assign(dim, 0.0);
        for (const auto& p : points)
          for (std::size_t j = 0; j < dim; ++j) ref.objectives[j] = std::max(ref.objectives[j], p[j] * 1.1);
      }
      summary["hypervolume"] = analytics::hypervolume_2d(front.points, ref);
      summary["reference_point"] = ref.objectives;
    } else if (a.mode == "eval") {
      auto budget = a.budget ? a.budget
                             : static_cast<std::uint64_t>(std::ceil(a.fraction * static_cast<double>(sp.cardinality)));
      auto strategy = analytics::make_strategy(a.strategy, cfg_.seed);
      auto ev = analytics::evaluate_strategy(db, a.space, *strategy, budget, spec);
      for (const auto& t : ev.trace) queried.insert(t.configuration_id);
      summary["strategy"] = ev.strategy;
      summary["budget"] = ev.budget;
      summary["queries"] = ev.queries_used;
      summary["truncated"] = ev.truncated;
      summary["approx_front_size"] = ev.approx_front.size();
      if (ev.adrs_value) summary["adrs"] = *ev.adrs_value;
    }

    fs::path out_dir(a.out);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw UsageError("cannot create '" + a.out + "': " + ec.message());

    std::string csv = "configuration_id,index";
    for (const auto& n : names) csv += "," + n.get<std::string>();
    csv += ",front";
    if (a.mode == "eval") csv += ",queried";
    csv += '\n';
    for (const auto& p : points) {
      csv += std::to_string(p.configuration_id) + "," + std::to_string(index_of.at(p.configuration_id));
      for (double x : p.objectives) csv += "," + detail::num(x);
      csv += on_front.count(p.configuration_id) ? ",1" : ",0";
      if (a.mode == "eval") csv += queried.count(p.configuration_id) ? ",1" : ",0";
      csv += '\n';
    }
    detail::write_text(out_dir / "points.csv", csv);

    // gnuplot: index 0 is every point, index 1 the front.
    std::string dat = "# all points:";
    for (const auto& n : names) dat += " " + n.get<std::string>();
    dat += '\n';
    auto row = [&](const DesignPoint& p) {
      std::string s;
      for (std::size_t j = 0; j < p.size(); ++j) s += (j ? " " : "") + detail::num(p[j]);
      return s + '\n';
    };
    for (const auto& p : points) dat += row(p);
    dat += "\n\n# pareto front\n";
    for (const auto& p : front.points) dat += row(p);
    detail::write_text(out_dir / "front.dat", dat);
    detail::write_text(out_dir / "summary.json", summary.dump(2) + '\n');

    detail::print_record(out_, cfg_.format, summary);
    return 0;
  }

  int cmd_export(const ExportOptions& e) {
    if (e.out.empty() && cfg_.format == OutputFormat::Json)
      throw UsageError("--format json needs --out for export");
    auto db = open_store();
    auto data = db.export_space(e.space, e.to == "sql" ? store::ExportFormat::Sql : store::ExportFormat::JsonLines);
    if (e.out.empty()) {
      out_ << data;
      return 0;
    }
    detail::write_text(e.out, data);
    detail::print_record(out_, cfg_.format, {{"space", e.space}, {"file", e.out}, {"bytes", data.size()}});
    return 0;
  }

  int cmd_import(const std::string& path) {
    auto data = detail::read_text(path);
    auto db = open_store();
    auto rep = db.import_stream(data);
    nlohmann::ordered_json rows(rep.rows);
    detail::print_record(out_, cfg_.format, {{"space", rep.space_id}, {"records", rep.records}, {"rows", rows}});
    return 0;
  }

  std::ostream& out_;
  std::ostream& err_;
  const std::atomic<bool>* stop_;
  CliConfig cfg_;
};

/// `args` excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                   const std::atomic<bool>* stop = nullptr) {
  Cli cli(out, err, stop);
  return cli.run(args);
}

}  // namespace db4hls::cli
