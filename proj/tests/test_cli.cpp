#include <doctest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(OUTSEL_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const std::string kStack = std::string("--data ") + OUTSEL_FIXTURES "/stackloss.csv --response stack.loss";
const std::string kHills = std::string("--data ") + OUTSEL_FIXTURES "/hills.csv --response time";

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "outsel_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("fit reports the golden outlier sets") {
  const Run a = run("fit " + kStack + " --cutoff 4 --format json");
  REQUIRE(a.code == 0);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["detection"]["outliers"] == nlohmann::json::array({21}));
  CHECK(j["fit"]["coefficients"][1]["selectiveP"].get<double>() == doctest::Approx(0.00403).epsilon(0.05));

  const Run b = run("fit " + kHills + " --detect cooks --cutoff 2 --sigma exact --format json");
  REQUIRE(b.code == 0);
  CHECK(nlohmann::json::parse(b.out)["detection"]["outliers"] == nlohmann::json::array({7, 11, 18, 31}));
}

TEST_CASE("invalid input exits 2 with no output") {
  const fs::path ragged = scratch("ragged.csv");
  std::ofstream(ragged) << "y,x\n1,2\n3\n";
  const std::string cases[] = {
      "fit --data " + ragged.string() + " --response y",
      "fit --data /nonexistent.csv --response y",
      "fit " + std::string("--data ") + OUTSEL_FIXTURES "/stackloss.csv --response nope",
      "fit " + kStack + " --ci",
      "fit " + kStack + " --sigma abc",
      "fit " + kStack + " --detect lof",
      "fit " + kStack + " --bogus",
      "fit " + kStack + " --detect softipod",
      "simulate coverage --reps 0",
      "simulate power --reps 0",
      "simulate nothing",
      "",
  };
  for (const auto& args : cases) {
    INFO(args);
    const Run r = run(args);
    CHECK(r.code == 2);
    CHECK(r.out.empty());
  }
}

TEST_CASE("numerical failure exits 3 with no output") {
  const Run r = run("fit " + kStack + " --cutoff 0.01");
  CHECK(r.code == 3);
  CHECK(r.out.empty());
}

TEST_CASE("table and json agree") {
  const Run t = run("fit " + kStack + " --cutoff 2 --sigma 3 --ci");
  const Run j = run("fit " + kStack + " --cutoff 2 --sigma 3 --ci --format json");
  REQUIRE(t.code == 0);
  REQUIRE(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  for (const auto& c : doc["fit"]["coefficients"]) {
    for (const char* key : {"estimate", "naiveP", "selectiveP", "ciLo", "ciHi"}) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.6g", c[key].get<double>());
      CHECK(t.out.find(buf) != std::string::npos);
    }
  }
}

TEST_CASE("other detectors and sigma modes run") {
  CHECK(run("fit " + kStack + " --detect dffits").code == 0);
  CHECK(run("fit " + kStack + " --detect softipod --cutoff 0.1").code == 0);
  const Run est = run("fit " + kStack + " --sigma est --ci --format json");
  REQUIRE(est.code == 0);
  CHECK(nlohmann::json::parse(est.out)["fit"]["method"] == "SELECT-EST");
  CHECK(run("fit " + kStack + " --no-intercept").code == 0);
}

TEST_CASE("simulate is deterministic per seed") {
  const std::string args = "simulate coverage --reps 100 --seed 3";
  const Run a = run(args), b = run(args + " --threads 1");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["rates"].contains("est_cover_betaM"));
  CHECK(run("simulate coverage --reps 100 --seed 4").out != a.out);

  const fs::path prefix = scratch("cov");
  const Run w = run(args + " --out " + prefix.string());
  REQUIRE(w.code == 0);
  std::ifstream json(prefix.string() + ".json");
  std::stringstream buf;
  buf << json.rdbuf();
  CHECK(buf.str() == a.out);
  CHECK(fs::file_size(prefix.string() + ".csv") > 0);
}
