// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "db4hls/analytics.hpp"
#include "db4hls/orchestrator.hpp"
#include "support/generators.hpp"
#include "support/tempdir.hpp"

extern char** environ;

using namespace db4hls;
namespace t = db4hls::testing;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << "  (" << o.detail << ")" << std::endl;
}

std::string fmt(double x, int prec = 3) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << std::fixed << x;
  return ss.str();
}

// --- criterion 1 -----------------------------------------------------------

Outcome fixture_cardinality() {
  Outcome o;
  auto t0 = Clock::now();
  auto text = t::read_file(t::data_path("csd/last_step_scan.csd"));
  auto bound = space::cardinality(csd::parse_csd(text));
  auto stripped = text;
  for (auto at = stripped.find("@bind_a"); at != std::string::npos; at = stripped.find("@bind_a")) stripped.erase(at, 7);
  auto free_csd = csd::parse_csd(stripped);
  auto unbound = space::cardinality(free_csd);
  double dt = since(t0);
  o.require(bound == 1600, "bound cardinality " + std::to_string(bound));
  o.require(unbound == 12800, "unbound cardinality " + std::to_string(unbound));
  o.require(unbound == t::unbound_product(free_csd), "unbound differs from plain product of set sizes");
  o.require(dt < 1.0, "took " + fmt(dt) + " s");
  o.detail = std::to_string(bound) + " / " + std::to_string(unbound) + " in " + fmt(dt, 4) + " s, limit 1 s" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// --- criterion 2 -----------------------------------------------------------

Outcome random_enumeration() {
  Outcome o;
  std::mt19937_64 rng(20240611);
  auto t0 = Clock::now();
  std::size_t configs = 0;
  for (int n = 0; n < 200 && o.pass; ++n) {
    auto c = t::random_csd(rng, 4, 6);
    auto tag = "csd #" + std::to_string(n);
    auto want = t::brute_force_space(c);
    space::SpaceIndex index(c);
    o.require(index.total() == want.size(), tag + ": cardinality differs from brute force");
    std::set<std::vector<std::vector<csd::Value>>> seen_keys, oracle(want.begin(), want.end());
    std::set<std::string> hashes;
    std::uint64_t i = 0;
    for (const auto& cfg : space::enumerate(index)) {
      o.require(cfg.index == i, tag + ": enumeration out of order");
      o.require(oracle.count(cfg.assignments) == 1, tag + ": configuration not in brute-force set");
      o.require(index.encode(cfg) == i, tag + ": encode(decode(i)) != i");
      seen_keys.insert(cfg.assignments);
      hashes.insert(cfg.key);
      ++i;
    }
    o.require(seen_keys.size() == want.size(), tag + ": duplicates or gaps");
    o.require(hashes.size() == want.size(), tag + ": config_key collision");
    auto k = std::min<std::uint64_t>(index.total(), 5);
    auto s1 = space::sample(index, k, n), s2 = space::sample(index, k, n);
    o.require(s1 == s2, tag + ": sampling not deterministic");
    configs += want.size();
  }
  double dt = since(t0);
  o.require(dt < 30.0, "took " + fmt(dt) + " s");
  o.detail = "200 spaces, " + std::to_string(configs) + " configurations in " + fmt(dt) + " s, limit 30 s" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// --- criterion 3 -----------------------------------------------------------

Outcome pareto_vs_brute_force() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> size(1, 10000);
  auto t0 = Clock::now();
  double ours = 0;
  std::size_t largest = 0;
  for (int n = 0; n < 100 && o.pass; ++n) {
    auto count = n < 3 ? 10000 : size(rng);
    auto raw = t::random_points(rng, count, 2, static_cast<t::PointShape>(n % 3));
    std::vector<DesignPoint> pts;
    for (std::size_t i = 0; i < raw.size(); ++i) pts.push_back({raw[i], static_cast<std::int64_t>(i)});
    auto t1 = Clock::now();
    auto front = analytics::pareto_front(pts);
    ours += since(t1);
    std::set<std::int64_t> got;
    for (const auto& p : front) got.insert(p.configuration_id);
    auto idx = t::brute_force_front(raw);
    std::set<std::int64_t> want(idx.begin(), idx.end());
    o.require(got == want, "set " + std::to_string(n) + " differs from brute force");
    largest = std::max(largest, count);
  }
  double dt = since(t0);
  o.require(dt < 60.0, "took " + fmt(dt) + " s");
  o.detail = "100 sets up to " + std::to_string(largest) + " points, " + fmt(dt) + " s total (front " + fmt(ours) +
             " s), limit 60 s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// --- criterion 4 -----------------------------------------------------------

Outcome indicator_identities() {
  Outcome o;
  std::mt19937_64 rng(4);
  for (int n = 0; n < 100; ++n) {
    auto raw = t::random_points(rng, 200, 2, n % 2 ? t::PointShape::Grid : t::PointShape::Uniform);
    std::vector<DesignPoint> all;
    for (std::size_t i = 0; i < raw.size(); ++i) all.push_back({raw[i], static_cast<std::int64_t>(i)});
    auto ref = analytics::pareto_front(all).points;
    o.require(analytics::adrs(ref, ref) == 0.0, "adrs(F,F) != 0 on instance " + std::to_string(n));
    std::vector<DesignPoint> sub, super;
    for (const auto& p : all) {
      auto r = rng() % 8;
      if (r == 0) sub.push_back(p);
      if (r <= 2) super.push_back(p);
    }
    if (sub.empty()) sub.push_back(all[0]);
    super.insert(super.end(), sub.begin(), sub.end());
    o.require(analytics::adrs(ref, super) <= analytics::adrs(ref, sub),
              "adrs grew under superset on instance " + std::to_string(n));
  }
  double h1 = analytics::hypervolume_2d(std::vector<DesignPoint>{{{0, 0}, 0}}, {{1, 1}, 0});
  double h2 = analytics::hypervolume_2d(std::vector<DesignPoint>{{{0, 0.5}, 0}, {{0.5, 0}, 1}}, {{1, 1}, 0});
  o.require(h1 == 1.0, "HV{(0,0)} = " + std::to_string(h1));
  o.require(h2 == 0.75, "HV{(0,.5),(.5,0)} = " + std::to_string(h2));
  o.detail = "adrs(F,F)=0 and superset monotonicity on 100 instances, HV " + fmt(h1, 2) + " and " + fmt(h2, 2) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// --- criteria 5-7 ------------------------------------------------------------

std::int64_t make_space(store::Store& db) {
  db.init_schema();
  auto d = db.ensure_design({"acceptance", "local_scan", "local_scan_mock", "local_scan", ""});
  return db.register_space(d.id, csd::parse_csd(t::read_file(t::data_path("csd/local_scan_mock.csd"))), "acceptance")
      .id;
}

Outcome mock_campaign(const std::string& db_path) {
  Outcome o;
  store::Store db(db_path);
  auto space_id = make_space(db);
  orch::Campaign c;
  c.space_id = space_id;
  c.jobs = 8;
  c.seed = 1;
  auto t0 = Clock::now();
  auto rep = orch::run_campaign(db, c);
  double dt = since(t0);
  auto impls = db.implementations(space_id).size();
  auto pending = db.pending_configurations(space_id, c.backend.filter()).size();
  analytics::ExhaustiveStrategy ex;
  auto ev = analytics::evaluate_strategy(db, space_id, ex, 704);
  o.require(db.space(space_id).cardinality == 704, "cardinality is not 704");
  o.require(impls == 704, std::to_string(impls) + " implementations");
  o.require(rep.ok == 704, std::to_string(rep.ok) + " ok");
  o.require(pending == 0, std::to_string(pending) + " pending");
  o.require(rep.max_in_flight <= 8, "max in flight " + std::to_string(rep.max_in_flight));
  o.require(ev.adrs_value && *ev.adrs_value == 0.0, "exhaustive ADRS is not 0");
  o.require(dt < 120.0, "took " + fmt(dt) + " s");
  o.detail = "704 implementations, 0 pending, max in flight " + std::to_string(rep.max_in_flight) +
             ", exhaustive ADRS " + (ev.adrs_value ? fmt(*ev.adrs_value, 1) : "n/a") + ", " + fmt(dt) +
             " s, limit 120 s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

pid_t spawn_cli(const std::vector<std::string>& args, const std::string& stdout_path) {
  std::vector<char*> argv;
  std::string exe = DB4HLS_CLI_PATH;
  argv.push_back(exe.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 1, stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  pid_t pid = 0;
  int rc = posix_spawn(&pid, exe.c_str(), &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) throw std::runtime_error("cannot spawn " + exe);
  return pid;
}

std::map<std::string, std::set<std::int64_t>> read_events(const std::string& path) {
  std::map<std::string, std::set<std::int64_t>> out;
  std::ifstream in(path);
  for (std::string line; std::getline(in, line);) {
    auto j = nlohmann::json::parse(line);
    out[j["event"].get<std::string>()].insert(j["config_id"].get<std::int64_t>());
  }
  return out;
}

Outcome crash_resume(const t::TempDir& tmp) {
  Outcome o;
  auto db_path = tmp.file("crash.sqlite");
  auto csd_path = t::data_path("csd/local_scan_mock.csd");
  std::set<std::int64_t> all;
  {
    store::Store db(db_path);
    db.init_schema();
  }
  auto log1 = tmp.file("run1.jsonl"), log2 = tmp.file("run2.jsonl");
  std::vector<std::string> base{"run", csd_path, "--db", db_path, "-j", "8", "--seed", "1", "--mock-delay-ms", "20"};

  auto args1 = base;
  args1.insert(args1.end(), {"--log", log1});
  pid_t pid = spawn_cli(args1, tmp.file("run1.out"));
  std::size_t committed_at_kill = 0;
  {
    store::Store watch(db_path);
    auto deadline = Clock::now() + std::chrono::seconds(60);
    for (;;) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
      auto spaces = watch.spaces();
      if (!spaces.empty()) {
        auto n = static_cast<std::size_t>(watch.table_counts(spaces[0].id).at("implementation"));
        if (n >= 352) {
          ::kill(pid, SIGKILL);
          committed_at_kill = n;
          break;
        }
      }
      if (Clock::now() > deadline) {
        ::kill(pid, SIGKILL);
        break;
      }
    }
  }
  int status = 0;
  ::waitpid(pid, &status, 0);
  o.require(WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL, "first run was not killed");

  std::set<std::int64_t> committed;
  std::int64_t space_id = 0;
  {
    store::Store db(db_path);
    space_id = db.spaces().at(0).id;
    for (const auto& c : db.configurations(space_id)) all.insert(c.id);
    for (const auto& r : db.implementations(space_id)) committed.insert(r.configuration_id);
  }
  auto ev1 = read_events(log1);
  const auto& done1 = ev1["done"];

  auto args2 = base;
  args2.insert(args2.end(), {"--log", log2});
  pid = spawn_cli(args2, tmp.file("run2.out"));
  ::waitpid(pid, &status, 0);
  o.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "second run failed");
  auto ev2 = read_events(log2);
  const auto& start2 = ev2["start"];

  std::set<std::int64_t> complement, unlogged;
  for (auto id : all)
    if (!committed.count(id)) complement.insert(id);
  for (auto id : committed)
    if (!done1.count(id)) unlogged.insert(id);
  std::set<std::int64_t> overlap;
  for (auto id : start2)
    if (done1.count(id)) overlap.insert(id);

  store::Store db(db_path);
  auto impls = db.implementations(space_id);
  std::set<std::int64_t> distinct;
  for (const auto& r : impls) distinct.insert(r.configuration_id);

  o.require(committed.size() > 0 && committed.size() < 704, "kill did not land mid-campaign");
  o.require(start2 == complement, "second run did not attempt exactly the uncommitted set");
  o.require(overlap.empty(), "second run re-attempted configurations logged done in the first");
  o.require(unlogged.size() <= 8, std::to_string(unlogged.size()) + " commits missing from the first log");
  o.require(start2.size() + done1.size() + unlogged.size() == 704, "logs do not partition the space");
  o.require(impls.size() == 704 && distinct.size() == 704, std::to_string(impls.size()) + " rows, " +
                                                               std::to_string(distinct.size()) + " distinct");
  o.require(db.pending_configurations(space_id, orch::BackendSpec{}.filter()).empty(), "pending not empty");
  o.require(db.orphan_count() == 0, "orphan rows");
  o.detail = "killed at " + std::to_string(committed_at_kill) + " commits; run 1 logged " +
             std::to_string(done1.size()) + " done, run 2 started " + std::to_string(start2.size()) +
             " = 704 - " + std::to_string(committed.size()) + " committed; final " + std::to_string(impls.size()) +
             " rows" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome export_import(const t::TempDir& tmp, const std::string& src_path) {
  Outcome o;
  store::Store src(src_path);
  auto space_id = src.spaces().at(0).id;
  store::ObjectiveSpec spec;
  spec.objectives = {store::Objective::LatencyCycles, store::Objective::LatencyNs, store::Objective::FF,
                     store::Objective::LUT, store::Objective::BRAM, store::Objective::DSP, store::Objective::Area};
  spec.weights = {1, 1, 1, 1};
  auto want_counts = src.table_counts(space_id);
  auto want_points = src.fetch_points(space_id, spec);
  std::map<std::int64_t, std::uint64_t> want_idx;
  for (const auto& c : src.configurations(space_id)) want_idx[c.id] = c.index;

  std::string formats;
  for (auto fmt_kind : {store::ExportFormat::JsonLines, store::ExportFormat::Sql}) {
    auto name = fmt_kind == store::ExportFormat::Sql ? std::string("sql") : std::string("jsonl");
    auto data = src.export_space(space_id, fmt_kind);
    store::Store dst(tmp.file("import_" + name + ".sqlite"));
    dst.init_schema();
    auto rep = dst.import_stream(data);
    auto got_counts = dst.table_counts(rep.space_id);
    auto got_points = dst.fetch_points(rep.space_id, spec);
    std::map<std::int64_t, std::uint64_t> got_idx;
    for (const auto& c : dst.configurations(rep.space_id)) got_idx[c.id] = c.index;
    o.require(got_counts == want_counts, name + ": row counts differ");
    bool same = got_points.size() == want_points.size();
    for (std::size_t i = 0; same && i < got_points.size(); ++i)
      same = got_points[i].objectives == want_points[i].objectives &&
             got_idx.at(got_points[i].configuration_id) == want_idx.at(want_points[i].configuration_id);
    o.require(same, name + ": fetch_points differ");
    formats += (formats.empty() ? "" : ", ") + name;
  }
  o.detail = formats + ": " + std::to_string(want_counts.at("implementation")) + " implementations, " +
             std::to_string(want_points.size()) + " points x 7 objectives identical" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  t::TempDir tmp;
  auto campaign_db = tmp.file("campaign.sqlite");
  report(1, "fixture cardinality with and without binds", fixture_cardinality);
  report(2, "enumeration properties on 200 random descriptors", random_enumeration);
  report(3, "Pareto front equals brute force on 100 random sets", pareto_vs_brute_force);
  report(4, "ADRS and hypervolume identities", indicator_identities);
  report(5, "mock campaign over 704 configurations with K=8", [&] { return mock_campaign(campaign_db); });
  report(6, "crash-resume attempts exactly the complement", [&] { return crash_resume(tmp); });
  report(7, "export/import round trip", [&] { return export_import(tmp, campaign_db); });
  std::cout << (failures ? "FAILED: " + std::to_string(failures) + " criteria" : std::string("ALL PASSED")) << std::endl;
  return failures ? 1 : 0;
}
