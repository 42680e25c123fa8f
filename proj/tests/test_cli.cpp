#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "doctest.h"
#include "minorproc/cli.hpp"

using namespace minorproc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOutput {
  int code = 0;
  std::string err;
};

RunOutput invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "minorproc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream captured;
  auto* old = std::cerr.rdbuf(captured.rdbuf());
  const int code = cli::run(static_cast<int>(argv.size()), argv.data());
  std::cerr.rdbuf(old);
  return {code, captured.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("minorproc_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips and spells non-finite values") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    const std::string s = cli::format_double(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(cli::format_double(0.5) == "0.5");
  CHECK(cli::format_double(std::nan("")) == "nan");
  CHECK(cli::format_double(-INFINITY) == "-inf");
}

TEST_CASE("sha256 of known inputs") {
  CHECK(cli::sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(cli::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config JSON round-trips and rejects unknown keys with a path") {
  ExperimentConfig c;
  c.kind = ExperimentKind::wishart_soft_edge;
  c.N = 80;
  c.q = 0.9;
  c.side = EdgeSide::left;
  c.pairs = {{1, 2}, {3, 5}};
  c.seed = 18446744073709551615ull;
  c.window = 50;
  const ExperimentConfig back = cli::config_from_json(cli::config_to_json(c));
  CHECK(cli::config_to_json(back) == cli::config_to_json(c));
  CHECK(back.seed == c.seed);

  json j = {{"N", 10}, {"offests", {1, 2}}};
  CHECK_THROWS_WITH_AS(cli::config_from_json(j), "config.offests: unknown key", std::invalid_argument);
  j = {{"offsets", {1, "x"}}};
  CHECK_THROWS_WITH_AS(cli::config_from_json(j), "config.offsets[1]: expected an integer", std::invalid_argument);
  j = {{"kind", "no_such_kind"}};
  CHECK_THROWS_AS(cli::config_from_json(j), std::invalid_argument);
  j = {{"E", "0.3"}};
  CHECK_THROWS_WITH_AS(cli::config_from_json(j), "config.E: expected a number", std::invalid_argument);
}

TEST_CASE("out-of-range E is rejected with exit code 1 and a field message") {
  const fs::path dir = scratch("badE");
  const RunOutput out = invoke({"wigner-bulk", "--N", "200", "--E", "2.5", "--offsets", "-1,0,1,2", "--seed", "1",
                                "--out-dir", dir.string(), "--quiet"});
  CHECK(out.code == 1);
  CHECK(out.err.find("E must lie in (-2,2)") != std::string::npos);
  CHECK(fs::is_empty(dir));
}

TEST_CASE("missing seed and unknown flags are usage errors") {
  CHECK(invoke({"wigner-bulk", "--N", "20"}).code == 1);
  CHECK(invoke({"wigner-bulk", "--seed", "1", "--bogus", "3"}).code == 1);
  CHECK(invoke({"wigner-edge", "--seed", "1", "--E", "0.1"}).code == 1);  // no --E on edge kinds
  CHECK(invoke({}).code == 1);
}

TEST_CASE("a bulk run writes CSV, JSON and manifest with matching digests") {
  const fs::path dir = scratch("bulk");
  const RunOutput out = invoke({"wigner-bulk", "--N", "40", "--E", "0.3", "--offsets", "-1,0,1,2", "--seed", "5",
                                "--replicas", "60", "--n-approx", "300", "--window", "48", "--out-dir", dir.string(),
                                "--quiet"});
  REQUIRE(out.code == 0);
  const std::string csv = slurp(dir / "wigner_bulk_hist.csv");
  const std::string js = slurp(dir / "wigner_bulk_hist.json");
  const json manifest = json::parse(slurp(dir / "wigner_bulk_hist.manifest.json"));
  CHECK(csv.rfind("experiment,offset,bin_left,bin_right,density_empirical,density_theoretical\n", 0) == 0);
  CHECK(csv.find("\nwigner_bulk_hist,-1,") != std::string::npos);
  CHECK(csv.find("\nwigner_bulk_hist,2,") != std::string::npos);
  CHECK(manifest["digests"]["wigner_bulk_hist.csv"] == cli::sha256_hex(csv));
  CHECK(manifest["digests"]["wigner_bulk_hist.json"] == cli::sha256_hex(js));
  CHECK(manifest["seed"] == 5);
  CHECK(manifest["artifact_version"] == cli::artifact_version);

  const json summary = json::parse(js);
  CHECK(summary["entries"].size() == 4);
  CHECK(summary["replicas"] == 60);
  CHECK(cli::config_from_json(summary["config"]).E.value() == 0.3);
  CHECK_FALSE(summary.contains("wall_seconds"));
}

TEST_CASE("reruns are byte-identical across worker counts") {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  const std::vector<std::string> base = {"wigner-edge", "--N", "50", "--pairs", "1:2,2:3", "--seed", "11",
                                         "--replicas", "80", "--quiet"};
  auto with = [&](const fs::path& d, const std::string& w) {
    auto v = base;
    v.insert(v.end(), {"--out-dir", d.string(), "--workers", w});
    return v;
  };
  REQUIRE(invoke(with(a, "1")).code == 0);
  REQUIRE(invoke(with(b, "3")).code == 0);
  CHECK(slurp(a / "wigner_edge.csv") == slurp(b / "wigner_edge.csv"));
  CHECK(slurp(a / "wigner_edge.json") == slurp(b / "wigner_edge.json"));
  const json ma = json::parse(slurp(a / "wigner_edge.manifest.json"));
  const json mb = json::parse(slurp(b / "wigner_edge.manifest.json"));
  CHECK(ma["workers"] == 1);
  CHECK(mb["workers"] == 3);
  CHECK(ma["digests"] == mb["digests"]);
}

TEST_CASE("flags override config-file values and the manifest records it") {
  const fs::path dir = scratch("override");
  const fs::path cfg = dir / "cfg.json";
  std::ofstream(cfg) << R"({"kind": "gap_law_wigner", "N": 30, "replicas": 50, "seed": 3, "beta": 2})";
  const RunOutput out = invoke({"gap-law-wigner", "--config", cfg.string(), "--N", "25", "--out-dir",
                                (dir / "out").string(), "--quiet"});
  REQUIRE(out.code == 0);
  const json m = json::parse(slurp(dir / "out" / "gap_law_wigner.manifest.json"));
  CHECK(m["config"]["N"] == 25);
  CHECK(m["config"]["beta"] == 2);
  CHECK(m["config"]["replicas"] == 50);
  CHECK(m["overrides"] == json::array({"N"}));
  CHECK(m["config_file"] == cfg.string());

  std::ofstream(cfg) << R"({"N": 30, "seed": 3, "repilcas": 5})";
  const RunOutput bad = invoke({"gap-law-wigner", "--config", cfg.string(), "--seed", "3", "--quiet"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("config.repilcas: unknown key") != std::string::npos);
}

TEST_CASE("an empty entry list yields a header-only CSV") {
  ExperimentResult r;
  r.config.kind = ExperimentKind::band_decay;
  CHECK(cli::result_csv(r) == "experiment,offset,bin_left,bin_right,density_empirical,density_theoretical\n");
}

TEST_CASE("NaN statistics serialize as null") {
  ExperimentResult r;
  r.config.kind = ExperimentKind::band_decay;
  OffsetResult e;
  e.label = "4";
  e.offset = 4;
  e.ks = std::nan("");
  r.entries.push_back(e);
  r.summary["slope"] = std::nan("");
  const json j = cli::result_json(r);
  CHECK(j["entries"][0]["ks"].is_null());
  CHECK(j["summary"]["slope"].is_null());
  CHECK(json::parse(cli::dump_json(j)) == j);
}

TEST_CASE("the installed tool runs end to end") {
  const fs::path dir = scratch("tool");
  const std::string cmd = std::string(MINORPROC_TOOL) + " band-decay --N 40 --E 0 --seed 2 --replicas 20 --quiet --out-dir " +
                          dir.string();
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "band_decay.csv"));
  CHECK(fs::exists(dir / "band_decay.manifest.json"));
  CHECK(std::system((std::string(MINORPROC_TOOL) + " --help > /dev/null").c_str()) == 0);
}
