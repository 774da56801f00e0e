/* SPDX-License-Identifier: Apache-2.0 */

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "icache_ci/harness.hpp"

using namespace icache_ci;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& name) {
  fs::path p = fs::path(ICACHE_CI_TMP_DIR) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::size_t col(const std::vector<std::string>& header, const std::string& name) {
  auto it = std::find(header.begin(), header.end(), name);
  REQUIRE(it != header.end());
  return static_cast<std::size_t>(it - header.begin());
}

RunConfig synth_config(const std::string& synth, const std::string& out) {
  RunConfig c;
  c.synth = synth;
  c.out_dir = out;
  return c;
}

int cli(const std::string& args) {
  std::string cmd = std::string(ICACHE_CI_CLI) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("straight-loop with one auto-selected CI") {
  auto out = tmp_dir("one_ci");
  auto cfg = synth_config("straight-loop:64,20", out);
  cfg.budget = 1;
  auto res = run(cfg);
  REQUIRE(res.selection.chosen.size() == 1);
  CHECK(res.selection.chosen[0].start_index == 0);  // aligned at a block start
  CHECK(res.selection.chosen[0].length == 8);

  for (const char* f : {"reduction.csv", "energy.csv", "verdicts.csv", "run.json"}) CHECK(fs::exists(fs::path(out) / f));

  auto rows = read_csv(fs::path(out) / "reduction.csv");
  REQUIRE(rows.size() == 7);
  auto miss = col(rows[0], "miss_red_pct"), hit = col(rows[0], "hit_red_pct");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    CHECK(std::stod(rows[r][miss]) == 0.0);
    CHECK(std::stod(rows[r][hit]) > 0.0);
  }
}

TEST_CASE("ci none: extended equals baseline everywhere") {
  auto cfg = synth_config("hot-cold:12,300,40", tmp_dir("none"));
  cfg.ci_mode = CiMode::none;
  auto res = run(cfg);
  CHECK(res.selection.chosen.empty());
  CHECK(res.baseline == res.extended);
  for (const auto& row : res.report.rows) CHECK(row.energy_saving_pct == 0.0);
}

TEST_CASE("same config and seed give byte-identical reports") {
  auto a = tmp_dir("det_a"), b = tmp_dir("det_b");
  auto ca = synth_config("uniform-random:200,20000", a), cb = synth_config("uniform-random:200,20000", b);
  ca.seed = cb.seed = 42;
  run(ca);
  run(cb);
  for (const char* f : {"reduction.csv", "energy.csv", "verdicts.csv"})
    CHECK(slurp(fs::path(a) / f) == slurp(fs::path(b) / f));
}

TEST_CASE("baseline rows do not depend on CI mode or constraints") {
  auto auto_cfg = synth_config("hot-cold:16,200,30", tmp_dir("inv_a"));
  auto none_cfg = auto_cfg;
  none_cfg.out_dir = tmp_dir("inv_b");
  none_cfg.ci_mode = CiMode::none;
  auto tight = auto_cfg;
  tight.out_dir = tmp_dir("inv_c");
  tight.constraints.max_len = 2;
  tight.max_len_explicit = true;
  auto x = run(auto_cfg), y = run(none_cfg), z = run(tight);
  CHECK(x.baseline == y.baseline);
  CHECK(x.baseline == z.baseline);
  CHECK_FALSE(x.extended == y.extended);
}

TEST_CASE("every reported energy number is recomputable from run.json") {
  auto out = tmp_dir("prov");
  auto cfg = synth_config("hot-cold:24,500,60", out);
  cfg.k_factor = 80;
  run(cfg);
  auto j = nlohmann::json::parse(slurp(fs::path(out) / "run.json"));
  CHECK(j["format_version"] == 1);
  CHECK(j["energy"]["k_factor"] == 80.0);

  EnergyParams p;
  p.k_factor = j["energy"]["k_factor"];
  p.convention = parse_amat_convention(j["energy"]["amat_convention"].get<std::string>());
  for (const auto& e : j["energy"]["table"]) p.per_size[e["size"]] = {e["hit_energy_nj"], e["hit_delay_ns"]};
  SweepStats base, ext;
  for (const auto& s : j["stats"]["baseline"]) base[s["size"]] = {s["hits"], s["misses"]};
  for (const auto& s : j["stats"]["extended"]) ext[s["size"]] = {s["hits"], s["misses"]};
  auto rep = sweep_report(base, ext, p);

  auto rows = read_csv(fs::path(out) / "energy.csv");
  REQUIRE(rows.size() == rep.rows.size() + 1);
  auto be = col(rows[0], "base_energy_nj"), ee = col(rows[0], "ext_energy_nj"), sv = col(rows[0], "energy_saving_pct");
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    CHECK(rows[r + 1][be] == format_number(rep.rows[r].baseline.total_energy_nj));
    CHECK(rows[r + 1][ee] == format_number(rep.rows[r].extended.total_energy_nj));
    CHECK(rows[r + 1][sv] == format_number(rep.rows[r].energy_saving_pct));
  }
  auto vrows = read_csv(fs::path(out) / "verdicts.csv");
  REQUIRE(vrows.size() == rep.verdicts.size() + 1);
  auto acc = col(vrows[0], "accepted");
  for (std::size_t r = 0; r < rep.verdicts.size(); ++r)
    CHECK(vrows[r + 1][acc] == (rep.verdicts[r].accepted ? "accept" : "reject"));
}

TEST_CASE("imported selection reproduces the auto run") {
  auto first = tmp_dir("auto_sel");
  auto res = run(synth_config("hot-cold:16,100,25", first));
  REQUIRE_FALSE(res.selection.chosen.empty());
  auto cfg = synth_config("hot-cold:16,100,25", tmp_dir("file_sel"));
  cfg.ci_mode = CiMode::file;
  cfg.ci_file = (fs::path(first) / "ci_selection.txt").string();
  auto res2 = run(cfg);
  CHECK(res2.selection == res.selection);
  CHECK(res2.extended == res.extended);
}

TEST_CASE("file workloads") {
  auto dir = tmp_dir("files");
  auto w = synth_trace("hot-cold:8,40,12");
  save_program(dir + "/p.txt", w.program);
  save_trace(dir + "/t.txt", w.trace);
  RunConfig cfg;
  cfg.program_path = dir + "/p.txt";
  cfg.trace_path = dir + "/t.txt";
  cfg.out_dir = dir + "/out";
  auto from_files = run(cfg);
  auto from_synth = run(synth_config("hot-cold:8,40,12", dir + "/out2"));
  CHECK(from_files.baseline == from_synth.baseline);
  CHECK(from_files.extended == from_synth.extended);
}

TEST_CASE("removing the budget never lowers the access reduction") {
  std::uint64_t prev_total = UINT64_MAX;
  for (std::size_t budget : {std::size_t{1}, std::size_t{2}, std::size_t{4}, kUnlimitedBudget}) {
    auto cfg = synth_config("hot-cold:32,100,50", tmp_dir("budget"));
    cfg.budget = budget;
    auto res = run_pipeline(cfg);
    std::uint64_t total = res.extended.begin()->second.total();
    CHECK(total <= prev_total);
    prev_total = total;
  }
}

TEST_CASE("pipeline errors carry their stage and kind") {
  auto stage_error = [](const RunConfig& cfg) -> Error {
    try {
      run_pipeline(cfg);
    } catch (const Error& e) {
      return e;
    }
    FAIL("no error");
    return Error(ErrorKind::report, "");
  };
  SECTION("two workload sources") {
    auto cfg = synth_config("straight-loop:8,2", "x");
    cfg.program_path = "p";
    cfg.trace_path = "t";
    auto e = stage_error(cfg);
    CHECK(e.kind() == ErrorKind::config);
    CHECK(exit_code_for(e.kind()) == 2);
  }
  SECTION("size not valid for the template") {
    auto cfg = synth_config("straight-loop:8,2", "x");
    cfg.sizes = {1000};
    CHECK(stage_error(cfg).kind() == ErrorKind::config);
  }
  SECTION("size missing from the parameter table") {
    auto cfg = synth_config("straight-loop:8,2", "x");
    cfg.sizes = {64 * 1024};
    auto e = stage_error(cfg);
    CHECK(e.kind() == ErrorKind::parameter);
    CHECK(std::string(e.what()).find("stage 'energy'") != std::string::npos);
    CHECK(exit_code_for(e.kind()) == 3);
  }
  SECTION("partial CI from an imported selection") {
    auto dir = tmp_dir("partial");
    std::ofstream(dir + "/sel.txt") << "ci 0 start=2 len=3 inputs=2 outputs=1 execs=1\n";
    auto cfg = synth_config("hot-cold:4,16,3", dir);
    cfg.ci_mode = CiMode::file;
    cfg.ci_file = dir + "/sel.txt";
    auto e = stage_error(cfg);
    CHECK(e.kind() == ErrorKind::substitution);
    CHECK(std::string(e.what()).find("stage 'substitute'") != std::string::npos);
    CHECK(exit_code_for(e.kind()) == 4);
  }
  SECTION("missing trace file") {
    RunConfig cfg;
    cfg.program_path = "/nonexistent/p.txt";
    cfg.trace_path = "/nonexistent/t.txt";
    cfg.out_dir = "x";
    CHECK(exit_code_for(stage_error(cfg).kind()) == 3);
  }
}

TEST_CASE("command line") {
  auto dir = tmp_dir("cli");
  CHECK(cli("run --synth straight-loop:64,20 --budget 1 --sizes 1K,2K,4K --out " + dir + "/run") == 0);
  CHECK(fs::exists(dir + "/run/run.json"));
  CHECK(read_csv(dir + "/run/energy.csv").size() == 4);

  CHECK(cli("verdicts --amat-fixture " ICACHE_CI_DATA_DIR "/amat_fixture.txt --out " + dir + "/fx") == 0);
  CHECK(read_csv(dir + "/fx/verdicts.csv").size() == 91);

  CHECK(cli("run --synth straight-loop:8,2 --program p.txt --trace t.txt --out " + dir + "/bad") == 2);
  CHECK(cli("run --synth straight-loop:8,2 --ways 3 --out " + dir + "/bad") == 2);
  CHECK(cli("run --synth straight-loop:8,2 --ci maybe --out " + dir + "/bad") == 2);
  CHECK(cli("run --synth bogus:1 --out " + dir + "/bad") == 2);
  CHECK(cli("run --program /nonexistent --trace /nonexistent --out " + dir + "/bad") == 3);
  CHECK(cli("run --synth straight-loop:8,2 --out " + dir + "/bad --sizes 64K") == 3);
  CHECK(cli("run --synth straight-loop:8,2") == 2);
  CHECK(cli("--help") == 0);
}

TEST_CASE("config file supplies defaults and flags win") {
  auto dir = tmp_dir("cfgfile");
  std::ofstream(dir + "/run.toml") << "[run]\n"
                                      "synth = \"straight-loop:64,20\"\n"
                                      "sizes = \"1K,2K\"\n"
                                      "k-factor = 60\n"
                                      "out = \"" + dir + "/from_file\"\n";
  CHECK(cli("--config " + dir + "/run.toml run") == 0);
  auto j = nlohmann::json::parse(slurp(dir + "/from_file/run.json"));
  CHECK(j["energy"]["k_factor"] == 60.0);
  CHECK(j["cache"]["sizes"].size() == 2);

  CHECK(cli("--config " + dir + "/run.toml run --k-factor 120 --out " + dir + "/flags") == 0);
  auto j2 = nlohmann::json::parse(slurp(dir + "/flags/run.json"));
  CHECK(j2["energy"]["k_factor"] == 120.0);
  CHECK(j2["cache"]["sizes"].size() == 2);
}
