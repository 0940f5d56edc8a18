#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef ITR_CLI_PATH
#error "ITR_CLI_PATH must be defined by the build"
#endif
#ifndef ITR_TEST_DATA_DIR
#error "ITR_TEST_DATA_DIR must be defined by the build"
#endif

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

std::string temp_path(const std::string& name) {
  return std::string("/tmp/itr_cli_test_") + name;
}

RunResult run_cli(const std::string& args) {
  const std::string out_file = temp_path("stdout.txt");
  const std::string cmd = std::string(ITR_CLI_PATH) + " " + args + " > " +
                          out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream is(out_file);
  std::stringstream ss;
  ss << is.rdbuf();
  res.output = ss.str();
  return res;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("--help output is pinned") {
  const RunResult res = run_cli("--help");
  CHECK(res.exit_code == 0);
  const std::string golden =
      read_file(std::string(ITR_TEST_DATA_DIR) + "/golden_help.txt");
  CHECK(res.output == golden);
}

TEST_CASE("simulate writes a deterministic CSV with a sidecar") {
  const std::string out = temp_path("sim.csv");
  const std::string flags =
      "simulate --scenario a --design obs --N 100 --sites 5 --seed 7 --out " +
      out;
  CHECK(run_cli(flags).exit_code == 0);
  const std::string first = read_file(out);
  CHECK(count_lines(first) == 101);  // header + 100 units
  CHECK(first.substr(0, first.find('\n')) ==
        "id,y,a,x1,x2,x3,x4,x5,delta_star,prop_true");
  const nlohmann::json sidecar =
      nlohmann::json::parse(read_file(out + ".json"));
  CHECK(sidecar["N"] == 100);
  CHECK(sidecar["seed"] == 7);

  CHECK(run_cli(flags).exit_code == 0);
  CHECK(read_file(out) == first);
}

TEST_CASE("simulate rejects a non-dividing site count") {
  const RunResult res = run_cli(
      "simulate --scenario a --N 100 --sites 7 --out " + temp_path("bad.csv"));
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("remainder") != std::string::npos);
}

TEST_CASE("fit produces a model JSON; dce with one site matches fce") {
  const std::string data = temp_path("fit_data.csv");
  REQUIRE(run_cli("simulate --scenario a --design obs --N 300 --sites 1 "
                  "--seed 3 --out " +
                  data)
              .exit_code == 0);

  const std::string fce_out = temp_path("fce.json");
  REQUIRE(run_cli("fit --method fce --data " + data + " --sites 1 --out " +
                  fce_out)
              .exit_code == 0);
  const nlohmann::json fce = nlohmann::json::parse(read_file(fce_out));
  CHECK(fce["method"] == "fce");
  CHECK(fce["beta"].size() == 6);  // p + 1
  CHECK(fce["config"]["h"].get<double>() > 0.0);
  CHECK(fce["standardization"]["means"].size() == 5);

  const std::string dce_out = temp_path("dce.json");
  const std::string transcript = temp_path("dce_transcript.ndjson");
  // force b = h so the single-site protocol is exactly the pooled fit
  REQUIRE(run_cli("fit --method dce --data " + data +
                  " --sites 1 --h 0.2 --b 0.2 --out " + dce_out +
                  " --transcript " + transcript)
              .exit_code == 0);
  const std::string fce2_out = temp_path("fce2.json");
  REQUIRE(run_cli("fit --method fce --data " + data +
                  " --sites 1 --h 0.2 --out " + fce2_out)
              .exit_code == 0);
  const nlohmann::json dce = nlohmann::json::parse(read_file(dce_out));
  const nlohmann::json fce2 = nlohmann::json::parse(read_file(fce2_out));
  for (std::size_t j = 0; j < 6; ++j)
    CHECK(std::abs(dce["beta"][j].get<double>() -
                   fce2["beta"][j].get<double>()) <= 1e-6);
  CHECK(count_lines(read_file(transcript)) > 0);
}

TEST_CASE("fit rejects b < h") {
  const std::string data = temp_path("fit_data.csv");
  const RunResult res = run_cli("fit --method fce --data " + data +
                                " --sites 1 --b 0.01 --h 0.1");
  CHECK(res.exit_code == 2);
  CHECK(res.output.find("b must be >= h") != std::string::npos);
}

TEST_CASE("eval scores the oracle rule on scenario (c)") {
  const std::string data = temp_path("eval_data.csv");
  REQUIRE(run_cli("simulate --scenario c --design obs --N 2000 --sites 1 "
                  "--seed 9 --out " +
                  data)
              .exit_code == 0);

  const std::string model = temp_path("oracle_c.json");
  {
    std::ofstream os(model);
    os << R"({"method":"oracle","beta":[1.62,-1.8,0,0,0,0]})" << "\n";
  }
  const RunResult res = run_cli("eval --model " + model + " --data " + data);
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("1.000000") != std::string::npos);
}

TEST_CASE("eval without truth columns reports value only") {
  const std::string full = temp_path("eval_full.csv");
  REQUIRE(run_cli("simulate --scenario a --design obs --N 1000 --sites 1 "
                  "--seed 11 --out " +
                  full)
              .exit_code == 0);
  // strip the truth columns to mimic an ingested external file
  const std::string bare = temp_path("eval_bare.csv");
  {
    std::ifstream is(full);
    std::ofstream os(bare);
    std::string line;
    while (std::getline(is, line)) {
      std::size_t commas = 0, cut = line.size();
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == ',' && ++commas == 8) {
          cut = i;
          break;
        }
      }
      os << line.substr(0, cut) << "\n";
    }
  }
  const std::string model = temp_path("oracle_a.json");
  {
    std::ofstream os(model);
    os << R"({"method":"oracle","beta":[0,1,2,3,4,5]})" << "\n";
  }
  const RunResult res = run_cli("eval --model " + model + " --data " + bare);
  CHECK(res.exit_code == 0);
  CHECK(res.output.find("NA") != std::string::npos);
}

TEST_CASE("experiment runs a minimal grid and is reproducible") {
  const std::string config = temp_path("exp_config.json");
  {
    std::ofstream os(config);
    os << R"({"scenarios":["a"],"designs":["obs"],"N":[400],"n":[200],)"
       << R"("methods":["fce"],"reps":2,"test_size":1000,"master_seed":4})"
       << "\n";
  }
  const std::string results = temp_path("exp_results.csv");
  const std::string summary = temp_path("exp_summary.csv");
  const std::string flags = "experiment --config " + config +
                            " --out-results " + results + " --out-summary " +
                            summary;
  CHECK(run_cli(flags).exit_code == 0);
  const std::string r1 = read_file(results);
  const std::string s1 = read_file(summary);
  CHECK(count_lines(r1) == 3);  // header + 2 reps
  CHECK(count_lines(s1) == 2);  // header + 1 group

  CHECK(run_cli(flags).exit_code == 0);
  CHECK(read_file(results) == r1);
  CHECK(read_file(summary) == s1);
}

TEST_CASE("unknown flags exit with code 2") {
  CHECK(run_cli("fit --no-such-flag").exit_code == 2);
  CHECK(run_cli("").exit_code == 2);  // missing subcommand
}
