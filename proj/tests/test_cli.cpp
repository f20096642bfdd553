#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "retrylab/gridspec.hpp"
#include "retrylab/rational.hpp"

using namespace retrylab;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string out_path = "/tmp/retrylab_cli_out.txt";
  const std::string cmd =
      std::string(RETRYLAB_CLI_PATH) + " " + args + " > " + out_path + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult res;
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_path);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("grid syntax start:end:step includes both endpoints") {
  const auto grid = parse_grid("0:4000:50");
  REQUIRE(grid.size() == 81);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 4000.0);
  CHECK(parse_grid("100").size() == 1);
  CHECK_THROWS_AS(parse_grid("10:5:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("a:b:c"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("1:10"), std::invalid_argument);
}

TEST_CASE("rational parsing keeps exactness and rejects junk") {
  CHECK(parse_rational("1/2") == Rat(1, 2));
  CHECK(parse_rational("7") == Rat(7));
  CHECK(parse_rational("123456789012345678901/2") == Rat(BigInt("123456789012345678901"), 2));
  CHECK_THROWS_AS(parse_rational("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_rational("1/0"), std::invalid_argument);
}

TEST_CASE("predict emits one row per grid point") {
  const auto res = run_cli("predict --threads 4 --rc 50 --cc 50 --cw 0 --pw 0:4000:50");
  REQUIRE(res.exit_code == 0);
  const auto lines = lines_of(res.out);
  REQUIRE(lines.size() == 82);  // header + 81 rows
  CHECK(lines[0].rfind("pw,thr_low,thr_high", 0) == 0);
}

TEST_CASE("predict with one thread collapses the bounds") {
  const auto res = run_cli("predict --threads 1 --rc 50 --cc 50 --cw 0 --pw 0:1000:100");
  REQUIRE(res.exit_code == 0);
  const auto lines = lines_of(res.out);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    CHECK(cells[1] == cells[2]);  // thr_low == thr_high
  }
}

TEST_CASE("predict output is byte-stable across runs") {
  const auto a = run_cli("predict --threads 6 --rc 40 --cc 60 --cw 100 --pw 0:2000:100");
  const auto b = run_cli("predict --threads 6 --rc 40 --cc 60 --cw 100 --pw 0:2000:100");
  REQUIRE(a.exit_code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("predict writes a well-formed svg with three polylines") {
  const auto res = run_cli(
      "predict --threads 4 --rc 50 --cc 50 --cw 0 --pw 0:2000:100 --svg /tmp/retrylab.svg");
  REQUIRE(res.exit_code == 0);
  std::ifstream in("/tmp/retrylab.svg");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string svg = ss.str();
  CHECK(svg.find("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\"") !=
        std::string::npos);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) {
    ++polylines;
  }
  CHECK(polylines == 3);
  CHECK(svg.find("parallel work (cycles)") != std::string::npos);
  CHECK(svg.find("ops/ms") != std::string::npos);
}

TEST_CASE("simulate logical with a constructed seed reports the requested f") {
  const auto res =
      run_cli("simulate --mode logical --threads 4 --q 1 --r 1/2 --seed-construct-f 2");
  REQUIRE(res.exit_code == 0);
  const auto lines = lines_of(res.out);
  REQUIRE(lines.size() == 2);
  const auto cells = split_csv(lines[1]);
  // mode,P,q,r,detected,f,period_num,period_den,...
  CHECK(cells[4] == "1");
  CHECK(cells[5] == "2");
  CHECK(cells[6] == "9");
  CHECK(cells[7] == "2");
}

TEST_CASE("simulate with one thread never fails") {
  const auto res = run_cli("simulate --mode logical --threads 1 --q 3 --r 1/4");
  REQUIRE(res.exit_code == 0);
  const auto cells = split_csv(lines_of(res.out)[1]);
  CHECK(cells[5] == "0");
}

TEST_CASE("malformed rational is a usage error") {
  const auto res = run_cli("simulate --mode logical --threads 2 --q 1 --r nope");
  CHECK(res.exit_code == 2);
}

TEST_CASE("simulate hardware sweeps a pw grid") {
  const auto res = run_cli(
      "simulate --mode hardware --threads 2 --rc 50 --cc 50 --cw 0 --pw 0:400:200 "
      "--cycles 300000");
  REQUIRE(res.exit_code == 0);
  CHECK(lines_of(res.out).size() == 4);  // header + 3 points
}

TEST_CASE("simulate multi-loop chain reports per-stage fails") {
  const auto res = run_cli(
      "simulate --mode logical --threads 3 --stages '10:5;8:3' --horizon 1500");
  REQUIRE(res.exit_code == 0);
  const auto cells = split_csv(lines_of(res.out)[1]);
  CHECK(cells[0] == "logical-chain");
  CHECK(cells[2] == "2");
}

TEST_CASE("backoff prints the peak and the pad") {
  const auto res = run_cli("backoff --threads 8 --rc 50 --cc 50 --cw 0 --pw 200");
  REQUIRE(res.exit_code == 0);
  CHECK(res.out.find("\"peak_pw\"") != std::string::npos);
  CHECK(res.out.find("\"backoff\"") != std::string::npos);
}

TEST_CASE("calibrate rejects zero rounds with a usage error") {
  const auto res = run_cli("calibrate --rounds 0");
  CHECK(res.exit_code == 2);
}

TEST_CASE("backoff peak equals the argmax of the predicted average curve") {
  const auto pred = run_cli("predict --threads 8 --rc 50 --cc 50 --cw 0 --pw 0:2400:25");
  REQUIRE(pred.exit_code == 0);
  const auto lines = lines_of(pred.out);
  double best_pw = 0.0, best_avg = -1.0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv(lines[i]);
    const double avg = std::stod(cells[3]);
    if (avg > best_avg) {
      best_avg = avg;
      best_pw = std::stod(cells[0]);
    }
  }
  const auto rec = run_cli(
      "backoff --threads 8 --rc 50 --cc 50 --cw 0 --pw 200 --grid 0:2400:25");
  REQUIRE(rec.exit_code == 0);
  const auto peak_at = rec.out.find("\"peak_pw\":");
  REQUIRE(peak_at != std::string::npos);
  const double peak = std::stod(rec.out.substr(peak_at + 10));
  CHECK(peak == best_pw);
  const auto pad_at = rec.out.find("\"backoff\":");
  REQUIRE(pad_at != std::string::npos);
  CHECK(std::stod(rec.out.substr(pad_at + 10)) == best_pw - 200.0);
}

TEST_CASE("inject-thread runs the thread-addition experiment") {
  const auto res = run_cli(
      "simulate --mode logical --threads 3 --q 2 --r 3/8 --inject-thread 1/4");
  REQUIRE(res.exit_code == 0);
  const auto lines = lines_of(res.out);
  REQUIRE(lines.size() == 2);
  const auto cells = split_csv(lines[1]);
  CHECK(cells[0] == "logical-inject");
  CHECK(cells[1] == "4");           // P after injection
  CHECK(cells[4] == "1");           // steady state detected
  CHECK(cells[6] != "none");        // the newcomer succeeded
}

TEST_CASE("trace export writes the event log") {
  const auto res = run_cli(
      "simulate --mode logical --threads 2 --q 1 --r 1/2 --horizon 30 "
      "--trace /tmp/rl_trace.csv");
  REQUIRE(res.exit_code == 0);
  std::ifstream in("/tmp/rl_trace.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "thread,event,time_num,time_den");
}

TEST_CASE("compare accepts a bench csv keyed on pw_cycles") {
  REQUIRE(run_cli("predict --threads 2 --rc 50 --cc 50 --pw 0:400:200 --out /tmp/rl_p.csv")
              .exit_code == 0);
  {
    std::ofstream bench_csv("/tmp/rl_bench.csv");
    bench_csv << "# retrylab bench build=test rc=50 cc=50 P=2\n";
    bench_csv << "pw_cycles,threads,structure,strategy,thr_meas_per_ms\n";
    bench_csv << "0,2,counter,none,1000\n200,2,counter,none,900\n400,2,counter,none,800\n";
  }
  const auto res = run_cli(
      "compare --predict /tmp/rl_p.csv --simulate /tmp/rl_p.csv --bench /tmp/rl_bench.csv");
  REQUIRE(res.exit_code == 0);
  CHECK(lines_of(res.out).size() == 4);
  CHECK(res.out.find("bench") != std::string::npos);
}

TEST_CASE("compare joins on pw and flags grid mismatches") {
  REQUIRE(run_cli("predict --threads 2 --rc 50 --cc 50 --pw 0:400:200 --out /tmp/rl_a.csv")
              .exit_code == 0);
  REQUIRE(run_cli("predict --threads 2 --rc 50 --cc 50 --pw 0:600:200 --out /tmp/rl_b.csv")
              .exit_code == 0);
  const auto bad = run_cli("compare --predict /tmp/rl_a.csv --simulate /tmp/rl_b.csv");
  CHECK(bad.exit_code == 2);
  const auto good = run_cli("compare --predict /tmp/rl_a.csv --simulate /tmp/rl_a.csv");
  REQUIRE(good.exit_code == 0);
  CHECK(lines_of(good.out).size() == 4);
}

TEST_CASE("config file supplies defaults, flags override") {
  {
    std::ofstream cfg("/tmp/rl_cfg.json");
    cfg << R"({"threads": 2, "rc": 50, "cc": 50, "pw": "0:400:200"})";
  }
  const auto from_cfg = run_cli("--config /tmp/rl_cfg.json predict");
  const auto explicit_args = run_cli("predict --threads 2 --rc 50 --cc 50 --pw 0:400:200");
  REQUIRE(from_cfg.exit_code == 0);
  CHECK(from_cfg.out == explicit_args.out);

  const auto overridden = run_cli("--config /tmp/rl_cfg.json predict --threads 4");
  const auto four = run_cli("predict --threads 4 --rc 50 --cc 50 --pw 0:400:200");
  REQUIRE(overridden.exit_code == 0);
  CHECK(overridden.out == four.out);
}

TEST_CASE("unknown subcommand is a usage error") {
  CHECK(run_cli("frobnicate").exit_code == 2);
}
