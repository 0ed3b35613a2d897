#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../src/bench/commands.hpp"
#include "../src/bench/config.hpp"
#include "../src/bench/csv.hpp"
#include "../src/bench/problem_factory.hpp"
#include "../src/bench/toml.hpp"
#include "../src/bench/verify_checks.hpp"
#include "support.hpp"

using namespace srba;
using namespace srba::bench;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const char* name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

const char* kMinimalConfig = R"(# minimal quadratic sweep
seeds = [7]

[problem]
kind = "quadratic"
p = 4
d = 4
n = 4
m = 4
mu_min = 0.5
l_max = 2.0
seed = 3

[solver]
kind = "srba"
T = 5
q = 3
R = inf

[grid]
rho = [0.2]
gamma = [0.15]

[output]
dir = "OUTDIR"
)";

std::string config_with_output(const fs::path& dir) {
  std::string text = kMinimalConfig;
  const std::string marker = "OUTDIR";
  text.replace(text.find(marker), marker.size(), dir.string());
  return text;
}

}  // namespace

TEST_CASE("toml subset parsing") {
  const TomlDocument doc = parse_toml_text(R"(
top = 3
# comment line
[alpha]
name = "hello world"   # trailing comment
ratio = 0.5
flag = true
values = [1, 2.5, -3]
empty = []
inf_value = inf

[beta]
path = "a#b"
)");
  CHECK(doc.at("", "top").as_int() == 3);
  CHECK(doc.at("alpha", "name").as_string() == "hello world");
  CHECK(doc.at("alpha", "ratio").as_number() == 0.5);
  CHECK(doc.at("alpha", "flag").as_bool());
  REQUIRE(doc.at("alpha", "values").as_array().size() == 3);
  CHECK(doc.at("alpha", "values").as_array()[1].as_number() == 2.5);
  CHECK(doc.at("alpha", "empty").as_array().empty());
  CHECK(doc.at("alpha", "inf_value").as_number() ==
        std::numeric_limits<double>::infinity());
  CHECK(doc.at("beta", "path").as_string() == "a#b");
  CHECK(doc.has("alpha", "flag"));
  CHECK(!doc.has("alpha", "missing"));
}

TEST_CASE("toml errors carry the line number") {
  try {
    parse_toml_text("a = 1\nb == 2\n", "cfg");
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_toml_text("x = [1, 2\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_toml_text("x = nope\n"), std::runtime_error);
  CHECK_THROWS_AS(parse_toml_text("x = 1\nx = 2\n"), std::runtime_error);
}

TEST_CASE("experiment config validation") {
  const auto dir = fresh_dir("srba_cfg_test");
  const auto path = dir / "exp.toml";

  write_text(path, config_with_output(dir));
  const ExperimentConfig cfg = load_experiment_config(path.string());
  CHECK(cfg.problem.kind == "quadratic");
  CHECK(cfg.solver.q == 3);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{7});
  CHECK(cfg.config_hash != 0);

  write_text(path, "seeds = [1, 1]\n[problem]\nkind = \"quadratic\"\n"
                   "[grid]\nrho = [0.1]\ngamma = [0.1]\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(path.string()),
                       doctest::Contains("duplicate seed"), std::runtime_error);

  write_text(path, "seeds = [1]\n[problem]\nkind = \"quadratic\"\n"
                   "[grid]\nrho = []\ngamma = [0.1]\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(path.string()),
                       doctest::Contains("rho"), std::runtime_error);

  write_text(path, "seeds = [1]\n[problem]\nkind = \"mystery\"\n"
                   "[grid]\nrho = [0.1]\ngamma = [0.1]\n");
  CHECK_THROWS_WITH_AS(load_experiment_config(path.string()),
                       doctest::Contains("kind"), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("trace csv round trip with empty fields") {
  const auto dir = fresh_dir("srba_csv_test");
  const auto path = dir / "trace.csv";
  std::vector<TraceRecord> rows(2);
  rows[0].t = 0;
  rows[0].k = 0;
  rows[1].t = 0;
  rows[1].k = 1;
  rows[1].oracle_total = 20;
  rows[1].oracle_grad_F = 5;
  rows[1].oracle_grad1_G = 5;
  rows[1].oracle_hvp = 5;
  rows[1].oracle_jvp = 5;
  rows[1].h = 0.125;
  rows[1].grad_h_sq = 1e-7;
  write_trace_csv(path.string(), rows);

  const std::string bytes = read_bytes(path);
  CHECK(bytes.find(kTraceHeader) == 0);
  CHECK(bytes.find(",,,\n") != std::string::npos);  // empty metric fields

  const std::vector<TraceRecord> back = read_trace_csv(path.string());
  REQUIRE(back.size() == 2);
  CHECK(!back[0].h.has_value());
  CHECK(back[1].h == 0.125);
  CHECK(back[1].grad_h_sq == 1e-7);
  CHECK(back[1].oracle_total == 20);
  CHECK(!back[1].wall_ms.has_value());
  fs::remove_all(dir);
}

TEST_CASE("cmd_run writes one deterministic csv per run plus a manifest") {
  const auto dir = fresh_dir("srba_run_test");
  const auto cfg_path = dir / "exp.toml";
  const auto out_dir = dir / "out";
  write_text(cfg_path, config_with_output(out_dir));

  RunOptions opts;
  opts.config_path = cfg_path.string();
  REQUIRE(cmd_run(opts) == 0);

  // exactly one csv with T q + 1 rows
  std::vector<fs::path> csvs;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
  }
  REQUIRE(csvs.size() == 1);
  const std::vector<TraceRecord> rows = read_trace_csv(csvs[0].string());
  CHECK(rows.size() == 5 * 3 + 1);

  // suboptimality column is nonnegative when present
  for (const TraceRecord& r : rows) {
    if (r.subopt.has_value()) CHECK(*r.subopt >= 0.0);
  }

  // byte-identical on a second run
  const std::string first = read_bytes(csvs[0]);
  REQUIRE(cmd_run(opts) == 0);
  CHECK(read_bytes(csvs[0]) == first);

  // manifest lists the artifact exactly once
  const std::string manifest = read_bytes(out_dir / "manifest.json");
  const std::string name = csvs[0].filename().string();
  const auto count_occurrences = [&](const std::string& text,
                                     const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      ++count;
      pos += needle.size();
    }
    return count;
  };
  CHECK(count_occurrences(manifest, name) == 1);
  CHECK(manifest.find("config_hash") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cmd_run sweeps the grid across seeds") {
  const auto dir = fresh_dir("srba_sweep_test");
  const auto cfg_path = dir / "exp.toml";
  const auto out_dir = dir / "out";
  std::string text = config_with_output(out_dir);
  text.replace(text.find("seeds = [7]"), 11, "seeds = [7, 8]");
  text.replace(text.find("rho = [0.2]"), 11, "rho = [0.2, 0.1, 0.05]");
  write_text(cfg_path, text);

  RunOptions opts;
  opts.config_path = cfg_path.string();
  opts.jobs = 2;
  REQUIRE(cmd_run(opts) == 0);

  std::size_t csvs = 0;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.path().extension() == ".csv") ++csvs;
  }
  CHECK(csvs == 6);
  const std::string manifest = read_bytes(out_dir / "manifest.json");
  std::size_t entries = 0, pos = 0;
  while ((pos = manifest.find("\"file\"", pos)) != std::string::npos) {
    ++entries;
    pos += 6;
  }
  CHECK(entries == 6);
  fs::remove_all(dir);
}

TEST_CASE("environment seed override replaces the seed list") {
  const auto dir = fresh_dir("srba_env_test");
  const auto cfg_path = dir / "exp.toml";
  const auto out_dir = dir / "out";
  std::string text = config_with_output(out_dir);
  text.replace(text.find("seeds = [7]"), 11, "seeds = [7, 8]");
  write_text(cfg_path, text);

  setenv("SRBA_BENCH_SEED", "42", 1);
  RunOptions opts;
  opts.config_path = cfg_path.string();
  REQUIRE(cmd_run(opts) == 0);
  unsetenv("SRBA_BENCH_SEED");

  std::size_t csvs = 0;
  bool seed42 = false;
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    if (entry.path().extension() == ".csv") {
      ++csvs;
      seed42 = seed42 ||
               entry.path().filename().string().find("seed42") !=
                   std::string::npos;
    }
  }
  CHECK(csvs == 1);
  CHECK(seed42);
  fs::remove_all(dir);
}

TEST_CASE("config errors exit with code 2") {
  const auto dir = fresh_dir("srba_cfgerr_test");
  const auto cfg_path = dir / "exp.toml";
  write_text(cfg_path, "seeds = [1\n");
  RunOptions opts;
  opts.config_path = cfg_path.string();
  CHECK(cmd_run(opts) == 2);
  opts.config_path = (dir / "missing.toml").string();
  CHECK(cmd_run(opts) == 2);
  fs::remove_all(dir);
}

TEST_CASE("a sweep where every run diverges exits with code 4") {
  const auto dir = fresh_dir("srba_div_test");
  const auto cfg_path = dir / "exp.toml";
  const auto out_dir = dir / "out";
  std::string text = config_with_output(out_dir);
  text.replace(text.find("rho = [0.2]"), 11, "rho = [80.0]");
  text.replace(text.find("gamma = [0.15]"), 14, "gamma = [80.0]");
  write_text(cfg_path, text);
  RunOptions opts;
  opts.config_path = cfg_path.string();
  CHECK(cmd_run(opts) == 4);
  fs::remove_all(dir);
}

TEST_CASE("percentile interpolation") {
  CHECK(percentile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(percentile({1.0, 2.0}, 0.5) == 1.5);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.2) == doctest::Approx(1.8));
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.8) == doctest::Approx(4.2));
  CHECK(percentile({4.0}, 0.2) == 4.0);
}

TEST_CASE("plotdata aggregates medians and percentile bands") {
  const auto dir = fresh_dir("srba_plot_test");
  // three constant series -> hand-computed percentiles per row
  for (int run = 0; run < 3; ++run) {
    std::vector<TraceRecord> rows(2);
    for (int r = 0; r < 2; ++r) {
      rows[static_cast<std::size_t>(r)].t = r;
      rows[static_cast<std::size_t>(r)].oracle_total =
          static_cast<std::uint64_t>(10 * (r + 1));
      rows[static_cast<std::size_t>(r)].subopt = 1.0 + run;  // 1, 2, 3
    }
    write_trace_csv((dir / ("series_seed" + std::to_string(run) + ".csv"))
                        .string(),
                    rows);
  }

  PlotDataOptions opts;
  opts.glob = (dir / "series_*.csv").string();
  opts.metric = "subopt";
  opts.x_axis = "oracle_calls";
  opts.out_path = (dir / "agg.csv").string();
  REQUIRE(cmd_plotdata(opts) == 0);

  std::ifstream in(opts.out_path);
  std::string header, row0;
  std::getline(in, header);
  std::getline(in, row0);
  CHECK(header == "x,median,p20,p80,n");
  // values 1,2,3: median 2, p20 = 1.4, p80 = 2.6
  CHECK(row0 == "10,2,1.3999999999999999,2.6000000000000001,3");

  // single run: median is the identity, zero band
  PlotDataOptions single;
  single.glob = (dir / "series_seed0.csv").string();
  single.metric = "subopt";
  single.out_path = (dir / "single.csv").string();
  REQUIRE(cmd_plotdata(single) == 0);
  std::ifstream sin(single.out_path);
  std::getline(sin, header);
  std::getline(sin, row0);
  CHECK(row0 == "0,1,1,1,1");

  PlotDataOptions missing;
  missing.glob = (dir / "nothing_*.csv").string();
  CHECK(cmd_plotdata(missing) == 2);
  fs::remove_all(dir);
}

TEST_CASE("verification suites pass on the shipped instances") {
  const std::vector<VerifyResult> results = run_verify_suite("");
  REQUIRE(results.size() == 7);
  for (const VerifyResult& r : results) {
    INFO(r.name, ": ", r.detail);
    CHECK(r.pass);
  }
}

TEST_CASE("a perturbed Hessian oracle is detected") {
  const QuadraticBilevel clean = make_quadratic(881, 4, 3, 2, 2, 0.5, 2.0);
  // sanity: the clean instance passes the cross-oracle consistency suite
  CHECK(check_hypergradient_consistency(clean, 5).pass);
  // a linear (hence self-consistent) corruption of the hvp still shifts the
  // linear-system solution, which the fd cross-check flags
  const testing::PerturbedHvp broken(clean);
  CHECK(!check_hypergradient_consistency(broken, 5).pass);
}

TEST_CASE("empty verify filter guard") {
  CHECK(run_verify_suite("not-a-suite").empty());
  CHECK(cmd_verify("not-a-suite") == 3);
}

TEST_CASE("worstcase problem factory derives the gap from the chain target") {
  ProblemSpec spec;
  spec.kind = "worstcase";
  spec.m = 4;
  spec.n = 1;
  spec.eps = 1e-3;
  spec.chain = 8;
  spec.seed = 5;
  const BuiltProblem built = build_problem(spec);
  REQUIRE(built.worstcase.has_value());
  CHECK(built.worstcase->chain == 8);
  CHECK(built.problem->inner_dim() == 9 * 4);
}
