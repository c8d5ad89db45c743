#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tweedie_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome run(const std::string& args) {
  const fs::path dir = fs::temp_directory_path();
  const fs::path out = dir / "tweedie_cli_stdout.txt";
  const fs::path err = dir / "tweedie_cli_stderr.txt";
  const std::string cmd = std::string("\"") + TWEEDIE_LAB + "\" " + args + " >\"" +
                          out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  o.out = slurp(out);
  o.err = slurp(err);
  return o;
}

// The manifest is the trailing JSON object on stdout.
nlohmann::json manifest_of(const Outcome& o) {
  const auto start = o.out.rfind("\n{");
  return nlohmann::json::parse(start == std::string::npos ? o.out : o.out.substr(start + 1));
}

const std::string kSmoke = std::string(CONFIG_DIR) + "/smoke.json";

}  // namespace

TEST_CASE("simulate emits every file and is reproducible") {
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  const auto t0 = std::chrono::steady_clock::now();
  const Outcome o = run("simulate --config \"" + kSmoke + "\" --out \"" + a.string() + "\"");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(o.code == 0);
  CHECK(seconds < 60.0);
  for (const char* f : {"report.json", "plot_data.csv", "manifest.json", "events/tweedie_run0.csv",
                        "events/mse_run0.csv", "events/weighted_run0.csv", "events/logloss_run0.csv"}) {
    INFO(f);
    CHECK(fs::exists(a / f));
  }
  const auto m = manifest_of(o);
  CHECK(m["command"] == "simulate");
  CHECK(m["master_seed"] == 0);
  CHECK(m["outputs"].size() == 7);
  CHECK(m.contains("versions"));
  CHECK(m.contains("wall_seconds"));
  CHECK(m["config_echo"]["world"]["n_users"] == 100);

  REQUIRE(run("simulate --config \"" + kSmoke + "\" --out \"" + b.string() + "\"").code == 0);
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "plot_data.csv") == slurp(b / "plot_data.csv"));
  CHECK(slurp(a / "events/tweedie_run0.csv") == slurp(b / "events/tweedie_run0.csv"));
}

TEST_CASE("simulate flags override the config") {
  const fs::path d = scratch("sim_flags");
  const Outcome o = run("--seed 9 simulate --config \"" + kSmoke + "\" --out \"" + d.string() +
                        "\" --runs 3 --kinds tweedie,logloss --p 1.3 --no-events");
  REQUIRE(o.code == 0);
  const auto report = nlohmann::json::parse(slurp(d / "report.json"));
  CHECK(report["config_echo"]["n_runs"] == 3);
  CHECK(report["config_echo"]["world"]["master_seed"] == 9);
  CHECK(report["config_echo"]["kinds"].size() == 2);
  CHECK(report["config_echo"]["kinds"][0] == "tweedie:1.3");
  CHECK_FALSE(fs::exists(d / "events"));
  CHECK(slurp(d / "plot_data.csv").rfind("# master_seed=9", 0) == 0);
}

TEST_CASE("simulate errors") {
  const fs::path d = scratch("sim_err");
  const Outcome missing = run("simulate --config /no/such/config.json --out \"" + d.string() + "\"");
  CHECK(missing.code == 1);
  CHECK(missing.err.find("config-parse-error") != std::string::npos);
  CHECK(missing.err.find("/no/such/config.json") != std::string::npos);

  CHECK(run("simulate --config \"" + kSmoke + "\" --out \"" + d.string() + "\" --kinds hinge").code == 1);
  CHECK(run("simulate --out x").code == 1);
  CHECK(run("frobnicate").code == 1);
}

TEST_CASE("sample and fit") {
  const fs::path d = scratch("fit");
  const Outcome s = run("--seed 4 sample --mu 0.2 --phi 1.5 --p 1.5 --n 20000 --out \"" +
                        (d / "draws.txt").string() + "\"");
  REQUIRE(s.code == 0);
  CHECK(slurp(d / "draws.txt").rfind("# master_seed=4\n", 0) == 0);
  CHECK(run("--seed 4 sample --n 20000 --out \"" + (d / "again.txt").string() + "\"").code == 0);
  CHECK(slurp(d / "draws.txt") == slurp(d / "again.txt"));

  const Outcome f = run("fit --sample \"" + (d / "draws.txt").string() + "\" --out \"" +
                        (d / "fit.csv").string() +
                        "\" --mu-grid 0.1:0.3:0.05 --p-grid 1.3:1.7:0.1 --phi-grid 1:2:0.25");
  REQUIRE(f.code == 0);
  const std::string table = slurp(d / "fit.csv");
  CHECK(table.rfind("# master_seed=0", 0) == 0);
  const auto pos = table.find("# p=");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::stod(table.substr(pos + 4)) - 1.5) <= 0.1 + 1e-9);
  CHECK(manifest_of(f)["command"] == "fit");

  std::ofstream(d / "neg.txt") << "0.5\n1.0\n-3\n";
  const Outcome neg = run("fit --sample \"" + (d / "neg.txt").string() + "\" --out x.csv");
  CHECK(neg.code == 1);
  CHECK(neg.err.find("line 3") != std::string::npos);

  std::ofstream(d / "empty.txt") << "";
  const Outcome empty = run("fit --sample \"" + (d / "empty.txt").string() + "\" --out x.csv");
  CHECK(empty.code == 1);
  CHECK(empty.err.find("empty-sample") != std::string::npos);

  CHECK(run("fit --sample \"" + (d / "draws.txt").string() + "\" --out x.csv --p-grid 0.5:1.5:0.1")
            .code == 1);
}

TEST_CASE("decompose") {
  const fs::path d = scratch("decompose");
  const Outcome exact = run("decompose --plant t=1,2,3 --out \"" + (d / "exact.json").string() + "\"");
  REQUIRE(exact.code == 0);
  const auto j = nlohmann::json::parse(slurp(d / "exact.json"));
  for (int i = 0; i < 3; ++i) CHECK(std::abs(j["t"][i].get<double>() - (i + 1)) < 1e-10);
  CHECK(j["library"].size() == 4);
  CHECK(j["compose_watch"]["cosine"].get<double>() == doctest::Approx(1.0));

  const Outcome noisy = run("--seed 3 decompose --plant t=1,2,3 --plant v=0.5,0,-1 --rows 50 "
                            "--noise 0.01 --out \"" + (d / "noisy.json").string() + "\"");
  REQUIRE(noisy.code == 0);
  const auto n = nlohmann::json::parse(slurp(d / "noisy.json"));
  const double t_true[] = {1, 2, 3};
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(n["t"][i].get<double>() - t_true[i]) < 3.0 * n["t_stderr"][i].get<double>());
  }

  std::ofstream(d / "obs.csv") << "c1,c2,c3,watch,conversion\n1,0,0,1,1\n0,1,0,2,2\n0,0,oops,3,3\n";
  const Outcome bad = run("decompose --observations \"" + (d / "obs.csv").string() +
                          "\" --out \"" + (d / "bad.json").string() + "\"");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("row 4") != std::string::npos);

  std::ofstream(d / "good.csv") << "1,0,0,1,4\n0,1,0,2,5\n0,0,1,3,6\n";
  const Outcome good = run("decompose --observations \"" + (d / "good.csv").string() +
                           "\" --out \"" + (d / "good.json").string() + "\"");
  CHECK(good.code == 0);

  std::ofstream(d / "dup.csv") << "1,1,0,1,4\n2,2,0,2,5\n3,3,1,3,6\n4,4,0,1,1\n";
  const Outcome dup = run("decompose --observations \"" + (d / "dup.csv").string() +
                          "\" --out \"" + (d / "dup.json").string() + "\"");
  CHECK(dup.code == 2);
  CHECK(dup.err.find("rank-deficient") != std::string::npos);

  CHECK(run("decompose --out x.json").code == 1);
}

TEST_CASE("gradcheck") {
  const Outcome ok = run("gradcheck");
  CHECK(ok.code == 0);
  CHECK(ok.out.find("FAIL") == std::string::npos);
  int rows = 0;
  for (std::size_t p = ok.out.find("PASS"); p != std::string::npos; p = ok.out.find("PASS", p + 1)) {
    ++rows;
  }
  CHECK(rows == 8);
  CHECK(manifest_of(ok)["command"] == "gradcheck");

  const Outcome bad = run("gradcheck --corrupt 0.5 --configs 3");
  CHECK(bad.code != 0);
  CHECK(bad.out.find("FAIL") != std::string::npos);
}
