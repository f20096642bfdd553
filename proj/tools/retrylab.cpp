// retrylab: predict throughput curves for CAS retry loops, run the exact
// simulator, benchmark real structures, and compute model-driven back-off.
//
// Exit codes: 0 ok, 2 usage, 3 non-convergence, 4 hardware unavailable.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "retrylab/bench.hpp"
#include "retrylab/estimator.hpp"
#include "retrylab/gridspec.hpp"
#include "retrylab/logical.hpp"
#include "retrylab/model.hpp"
#include "retrylab/rational.hpp"
#include "retrylab/simulator.hpp"
#include "retrylab/svg.hpp"

namespace {

using nlohmann::json;
using namespace retrylab;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitHardwareUnavailable = 4;

json load_config(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") {
      std::ifstream in(argv[i + 1]);
      if (!in) throw std::invalid_argument(std::string("cannot open config ") + argv[i + 1]);
      json j;
      in >> j;
      return j;
    }
  }
  return json::object();
}

// Flags override the config file: only fill in options the user did not pass.
template <typename T>
void overlay(const CLI::App* cmd, const json& cfg, const std::string& key, T& value) {
  if (!cfg.contains(key)) return;
  const auto* opt = cmd->get_option_no_throw("--" + key);
  if (opt != nullptr && opt->count() > 0) return;
  value = cfg.at(key).get<T>();
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty()) return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file " + path);
  return file;
}

std::vector<Rat> parse_rational_list(const std::string& text) {
  std::vector<Rat> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(parse_rational(tok));
  }
  return out;
}

void print_estimate_header(std::ostream& os) {
  os << "pw,thr_low,thr_high,thr_avg,f_low,f_high,expansion_low,expansion_high,"
        "occupancy_low,occupancy_high,converged\n";
}

void print_estimate_row(std::ostream& os, const ThroughputEstimate& e) {
  os << e.parallel_work << ',' << e.thr_low << ',' << e.thr_high << ',' << e.thr_avg << ','
     << e.fails_low << ',' << e.fails_high << ',' << e.expansion_low << ','
     << e.expansion_high << ',' << e.occupancy_low << ',' << e.occupancy_high << ','
     << (e.converged ? 1 : 0) << '\n';
}

struct PredictArgs {
  int threads = 4;
  double rc = 50, cc = 50, cw = 0;
  std::string pw = "0:4000:50";
  bool poisson = false;
  double ghz = 1.0;
  std::string out, svg_path;
};

int cmd_predict(const PredictArgs& a) {
  PlatformProfile profile{a.rc, a.cc, a.threads};
  WorkloadSpec workload{0.0, a.cw,
                        a.poisson ? PwDistribution::kPoissonMean : PwDistribution::kConstant};
  const auto grid = parse_grid(a.pw);
  const auto rows = sweep(profile, workload, grid);

  std::ofstream file;
  auto& os = open_out(file, a.out);
  os << std::setprecision(12);
  print_estimate_header(os);
  bool all_converged = true;
  for (const auto& e : rows) {
    print_estimate_row(os, e);
    all_converged = all_converged && e.converged;
  }

  if (!a.svg_path.empty()) {
    const double per_ms = a.ghz * 1e6;  // cycles per millisecond
    svg::Series low{"thr_low", "#c0392b", {}, {}};
    svg::Series high{"thr_high", "#27ae60", {}, {}};
    svg::Series avg{"thr_avg", "#2980b9", {}, {}};
    for (const auto& e : rows) {
      low.x.push_back(e.parallel_work);
      low.y.push_back(e.thr_low * per_ms);
      high.x.push_back(e.parallel_work);
      high.y.push_back(e.thr_high * per_ms);
      avg.x.push_back(e.parallel_work);
      avg.y.push_back(e.thr_avg * per_ms);
    }
    std::ofstream svg_file(a.svg_path);
    if (!svg_file) throw std::runtime_error("cannot open svg output " + a.svg_path);
    svg::write_plot(svg_file, {low, high, avg}, "parallel work (cycles)",
                    "throughput (ops/ms)");
  }
  return all_converged ? kExitOk : kExitNoConvergence;
}

struct SimulateArgs {
  std::string mode = "logical";
  int threads = 4;
  long q = 1;
  std::string r = "1/2";
  std::string offsets;
  std::string horizon = "400";
  long construct_f = -1;
  std::string inject;
  std::string stages;
  std::string trace_path;
  // hardware mode
  double rc = 50, cc = 50;
  long long cw = 0;
  std::string pw = "100";
  bool poisson = false;
  std::uint64_t seed = 1;
  long long cycles = 2'000'000;
};

int cmd_simulate(const SimulateArgs& a) {
  std::cout << std::setprecision(12);
  if (a.mode == "logical" && a.stages.empty()) {
    sim::LogicalConfig config;
    config.threads = a.threads;
    config.whole = a.q;
    config.fraction = parse_rational(a.r);
    config.horizon = parse_rational(a.horizon);
    if (a.construct_f >= 0) {
      const auto seed_cfg =
          construct_seed<Rat>(a.threads, a.q, config.fraction, a.construct_f);
      config.offsets = seed_cfg.success_starts;
    } else if (!a.offsets.empty()) {
      config.offsets = parse_rational_list(a.offsets);
    }

    if (!a.inject.empty()) {
      const auto outcome = sim::inject_thread(config, parse_rational(a.inject));
      std::cout << "mode,P,base_f,after_f,after_detected,inject_time,first_success\n";
      std::cout << "logical-inject," << a.threads + 1 << ',' << outcome.base.fails << ','
                << outcome.after.fails << ',' << (outcome.after.detected ? 1 : 0) << ','
                << rat_to_string(outcome.inject_time) << ','
                << (outcome.injected_first_success
                        ? rat_to_string(*outcome.injected_first_success)
                        : std::string("none"))
                << '\n';
      return kExitOk;
    }

    const auto trace = sim::run_logical(config);
    const auto steady = sim::detect_steady_state(trace);
    if (trace.r_zero_warning) {
      std::cerr << "warning: r = 0 lies outside the generic regime; ties broken by thread index\n";
    }
    if (!a.trace_path.empty()) {
      std::ofstream tf(a.trace_path);
      sim::export_csv(trace, tf);
    }
    std::cout << "mode,P,q,r,detected,f,period_num,period_den,throughput,occupancy,"
                 "h0,h1,h2,h3,h4,h5,h6plus\n";
    const Rat period = steady.period();
    const double thr = steady.detected ? rat_to_double(steady.throughput(a.threads)) : 0.0;
    const double occ = steady.detected ? rat_to_double(steady.occupancy(a.threads)) : 0.0;
    std::cout << "logical," << a.threads << ',' << a.q << ',' << a.r << ','
              << (steady.detected ? 1 : 0) << ',' << steady.fails << ',' << rat_num(period)
              << ',' << rat_den(period) << ',' << thr << ',' << occ;
    for (const auto h : steady.fail_histogram) std::cout << ',' << h;
    std::cout << '\n';
    return kExitOk;
  }

  if (a.mode == "logical") {  // multi-loop
    sim::MultiLoopConfig config;
    config.threads = a.threads;
    config.horizon = parse_rational(a.horizon);
    std::stringstream ss(a.stages);
    std::string stage;
    while (std::getline(ss, stage, ';')) {
      const auto colon = stage.find(':');
      if (colon == std::string::npos) {
        throw std::invalid_argument("stage must be pw:rlw, got '" + stage + "'");
      }
      config.stages.push_back({parse_rational(stage.substr(0, colon)),
                               parse_rational(stage.substr(colon + 1))});
    }
    if (!a.offsets.empty()) config.offsets = parse_rational_list(a.offsets);
    const auto trace = sim::run_multi_loop(config);
    const auto steady = sim::detect_steady_state(trace);
    std::cout << "mode,P,stages,rotation,detected,f,period_num,period_den,throughput,"
                 "completions,fails_per_stage\n";
    const Rat period = steady.period();
    const double thr = steady.detected ? rat_to_double(steady.throughput(a.threads)) : 0.0;
    std::cout << "logical-chain," << a.threads << ',' << config.stages.size() << ','
              << trace.rotation << ',' << (steady.detected ? 1 : 0) << ',' << steady.fails
              << ',' << rat_num(period) << ',' << rat_den(period) << ',' << thr << ','
              << trace.completions << ',';
    for (std::size_t i = 0; i < trace.fails_per_stage.size(); ++i) {
      std::cout << (i ? ";" : "") << trace.fails_per_stage[i];
    }
    std::cout << '\n';
    return kExitOk;
  }

  if (a.mode != "hardware") throw std::invalid_argument("mode must be logical or hardware");

  std::cout << "mode,P,pw,thr_per_cycle,occupancy,avg_stall,fails_per_success,detected,"
               "h0,h1,h2,h3,h4,h5,h6plus\n";
  for (const double pw : parse_grid(a.pw)) {
    sim::HardwareConfig config;
    config.profile = PlatformProfile{a.rc, a.cc, a.threads};
    config.parallel_work = static_cast<long long>(pw);
    config.critical_work = a.cw;
    config.sampler = a.poisson ? sim::PwSampler::kPoisson : sim::PwSampler::kConstant;
    config.rng_seed = a.seed;
    config.horizon = a.cycles;
    const auto trace = sim::run_hardware(config);
    const auto steady = sim::detect_steady_state(trace);
    const auto stats = sim::measure_window(trace, config.horizon / 4, config.horizon);
    if (!a.trace_path.empty()) {
      std::ofstream tf(a.trace_path, std::ios::app);
      sim::export_csv(trace, tf);
    }
    std::cout << "hardware," << a.threads << ',' << pw << ',' << stats.throughput << ','
              << stats.occupancy << ',' << stats.avg_stall << ',' << stats.fails_per_success
              << ',' << (steady.detected ? 1 : 0);
    for (const auto h : steady.fail_histogram) std::cout << ',' << h;
    std::cout << '\n';
  }
  return kExitOk;
}

struct BackoffArgs {
  int threads = 8;
  double rc = 50, cc = 50, cw = 0;
  double pw = 200;
  std::string grid;
};

int cmd_backoff(const BackoffArgs& a) {
  PlatformProfile profile{a.rc, a.cc, a.threads};
  WorkloadSpec workload{a.pw, a.cw, PwDistribution::kConstant};
  std::vector<double> grid;
  if (!a.grid.empty()) {
    grid = parse_grid(a.grid);
  } else {
    const double rlw = min_retry_cost(profile, workload);
    for (double x = 0.0; x <= 3.0 * a.threads * rlw; x += rlw / 4.0) grid.push_back(x);
  }
  const auto rec = recommend_backoff(profile, workload, grid);
  if (rec.boundary_warning) {
    std::cerr << "warning: peak sits on the search grid boundary; widen the grid\n";
  }
  json out{{"peak_pw", rec.peak_parallel_work},
           {"pw", a.pw},
           {"backoff", rec.backoff_for(a.pw)}};
  std::cout << out.dump() << '\n';
  return kExitOk;
}

int cmd_calibrate(int rounds) {
  const auto result = bench::calibrate(rounds);
  json out{{"rc", result.profile.read_latency},
           {"cc", result.profile.cas_latency},
           {"rc_iqr", result.read_iqr},
           {"cc_iqr", result.cas_iqr},
           {"rc_owned", result.read_owned_median},
           {"threads", result.profile.threads},
           {"rounds", result.rounds},
           {"timer_warning", result.timer_warning}};
  if (result.timer_warning) {
    std::cerr << "warning: timer resolution is suspect; results may be virtualized\n";
  }
  std::cout << out.dump() << '\n';
  return kExitOk;
}

struct BenchArgs {
  std::string structure = "counter";
  int threads = 2;
  std::string pw = "0:2000:200";
  std::string strategy = "none";
  double rc = 0, cc = 0;
  int duration_ms = 200;
  int reps = 3;
  bool poisson = false;
  std::uint64_t seed = 1;
  int calibrate_rounds = 2000;
  std::size_t stride = 1;
  std::size_t pop_width = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  bench::StructureKind kind;
  if (a.structure == "counter") kind = bench::StructureKind::kCounter;
  else if (a.structure == "stack") kind = bench::StructureKind::kStack;
  else if (a.structure == "queue") kind = bench::StructureKind::kQueue;
  else throw std::invalid_argument("structure must be counter, stack or queue");

  bench::BackoffPolicy policy;
  if (a.strategy == "none") {
    policy.kind = bench::BackoffPolicy::Kind::kNone;
  } else if (a.strategy.rfind("linear:", 0) == 0) {
    policy.kind = bench::BackoffPolicy::Kind::kLinear;
    policy.parameter = std::stod(a.strategy.substr(7));
  } else if (a.strategy.rfind("exp:", 0) == 0) {
    policy.kind = bench::BackoffPolicy::Kind::kExponential;
    policy.parameter = std::stod(a.strategy.substr(4));
  } else if (a.strategy == "model") {
    policy.kind = bench::BackoffPolicy::Kind::kModel;
  } else {
    throw std::invalid_argument("strategy must be none, linear:STEP, exp:BASE or model");
  }

  PlatformProfile profile{a.rc, a.cc, a.threads};
  if (a.rc <= 0 || a.cc <= 0) {
    const auto cal = bench::calibrate(a.calibrate_rounds);
    profile.read_latency = cal.profile.read_latency;
    profile.cas_latency = cal.profile.cas_latency;
  }

  bench::BenchOptions options;
  options.duration_ms = a.duration_ms;
  options.repetitions = a.reps;
  options.distribution = a.poisson ? PwDistribution::kPoissonMean : PwDistribution::kConstant;
  options.seed = a.seed;
  options.stack_stride_lines = a.stride;
  options.stack_pop_width = a.pop_width;

  const auto rows =
      bench::run_bench(kind, profile, parse_grid(a.pw), a.threads, policy, options);
  std::ofstream file;
  auto& os = open_out(file, a.out);
  os << std::setprecision(10);
  bench::write_csv(os, rows, profile);
  return kExitOk;
}

struct CompareArgs {
  std::string predict_csv, simulate_csv, bench_csv;
  std::string out;
};

// Join model / simulator / bench CSVs on the pw column.
int cmd_compare(const CompareArgs& a) {
  const auto load = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string header;
    std::map<double, std::string> rows;
    std::string line;
    std::size_t pw_col = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (header.empty()) {
        header = line;
        std::stringstream hs(line);
        std::string col;
        std::size_t idx = 0;
        pw_col = std::string::npos;
        while (std::getline(hs, col, ',')) {
          if (col == "pw" || col == "pw_cycles") pw_col = idx;
          ++idx;
        }
        if (pw_col == std::string::npos) throw std::runtime_error(path + ": no pw column");
        continue;
      }
      std::stringstream ls(line);
      std::string col;
      for (std::size_t i = 0; i <= pw_col; ++i) std::getline(ls, col, ',');
      rows[std::stod(col)] = line;
    }
    return std::make_pair(header, rows);
  };

  auto [ph, predict_rows] = load(a.predict_csv);
  auto [sh, simulate_rows] = load(a.simulate_csv);
  std::vector<double> mismatched;
  for (const auto& [pw, _] : predict_rows) {
    if (!simulate_rows.count(pw)) mismatched.push_back(pw);
  }
  for (const auto& [pw, _] : simulate_rows) {
    if (!predict_rows.count(pw)) mismatched.push_back(pw);
  }
  if (!mismatched.empty()) {
    std::cerr << "error: grids do not match at pw values:";
    for (const double pw : mismatched) std::cerr << ' ' << pw;
    std::cerr << '\n';
    return kExitUsage;
  }
  std::map<double, std::string> bench_rows;
  if (!a.bench_csv.empty()) {
    auto [bh, br] = load(a.bench_csv);
    bench_rows = std::move(br);
  }

  std::ofstream file;
  auto& os = open_out(file, a.out);
  os << "pw,predict,simulate" << (a.bench_csv.empty() ? "" : ",bench") << '\n';
  for (const auto& [pw, row] : predict_rows) {
    os << pw << ",\"" << row << "\",\"" << simulate_rows.at(pw) << '"';
    if (!a.bench_csv.empty()) {
      os << ",\"" << (bench_rows.count(pw) ? bench_rows.at(pw) : "") << '"';
    }
    os << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"throughput analysis for lock-free retry loops"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config mirroring the flags");

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "model throughput over a pw grid");
  predict->add_option("--threads", pa.threads);
  predict->add_option("--rc", pa.rc);
  predict->add_option("--cc", pa.cc);
  predict->add_option("--cw", pa.cw);
  predict->add_option("--pw", pa.pw, "grid start:end:step");
  predict->add_flag("--poisson", pa.poisson);
  predict->add_option("--ghz", pa.ghz, "clock for the ops/ms axis");
  predict->add_option("--out", pa.out);
  predict->add_option("--svg", pa.svg_path);

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "run the exact simulator");
  simulate->add_option("--mode", sa.mode, "logical or hardware");
  simulate->add_option("--threads,-P", sa.threads);
  simulate->add_option("--q", sa.q);
  simulate->add_option("--r", sa.r, "rational, e.g. 1/2");
  simulate->add_option("--offsets", sa.offsets, "comma-separated rationals");
  simulate->add_option("--horizon", sa.horizon, "retry units (logical)");
  simulate->add_option("--seed-construct-f", sa.construct_f,
                       "seed the run with the bound-reaching configuration");
  simulate->add_option("--inject-thread", sa.inject, "offset for the thread-addition run");
  simulate->add_option("--stages", sa.stages, "multi-loop chain pw:rlw;pw:rlw;...");
  simulate->add_option("--trace", sa.trace_path, "write the event trace CSV here");
  simulate->add_option("--rc", sa.rc);
  simulate->add_option("--cc", sa.cc);
  simulate->add_option("--cw", sa.cw);
  simulate->add_option("--pw", sa.pw, "cycles (hardware); grid allowed");
  simulate->add_flag("--poisson", sa.poisson);
  simulate->add_option("--seed", sa.seed);
  simulate->add_option("--cycles", sa.cycles, "hardware horizon in cycles");

  BackoffArgs ba;
  auto* backoff = app.add_subcommand("backoff", "model-driven back-off value");
  backoff->add_option("--threads", ba.threads);
  backoff->add_option("--rc", ba.rc);
  backoff->add_option("--cc", ba.cc);
  backoff->add_option("--cw", ba.cw);
  backoff->add_option("--pw", ba.pw);
  backoff->add_option("--grid", ba.grid, "search grid start:end:step");

  int calibrate_rounds = 0;
  auto* calibrate = app.add_subcommand("calibrate", "measure rc and cc on this machine");
  calibrate->add_option("--rounds", calibrate_rounds)->required();

  BenchArgs bna;
  auto* bench_cmd = app.add_subcommand("bench", "measure a real structure");
  bench_cmd->add_option("--structure", bna.structure, "counter, stack or queue");
  bench_cmd->add_option("--threads", bna.threads);
  bench_cmd->add_option("--pw", bna.pw, "grid start:end:step");
  bench_cmd->add_option("--strategy", bna.strategy, "none, linear:STEP, exp:BASE, model");
  bench_cmd->add_option("--rc", bna.rc, "skip calibration and use this rc");
  bench_cmd->add_option("--cc", bna.cc, "skip calibration and use this cc");
  bench_cmd->add_option("--duration-ms", bna.duration_ms);
  bench_cmd->add_option("--reps", bna.reps);
  bench_cmd->add_flag("--poisson", bna.poisson);
  bench_cmd->add_option("--seed", bna.seed);
  bench_cmd->add_option("--calibrate-rounds", bna.calibrate_rounds);
  bench_cmd->add_option("--stride", bna.stride, "stack pool stride in cache lines");
  bench_cmd->add_option("--pop-width", bna.pop_width, "elements per multi-pop");
  bench_cmd->add_option("--out", bna.out);

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "join predict/simulate/bench CSVs on pw");
  compare->add_option("--predict", ca.predict_csv)->required();
  compare->add_option("--simulate", ca.simulate_csv)->required();
  compare->add_option("--bench", ca.bench_csv);
  compare->add_option("--out", ca.out);

  try {
    app.parse(argc, argv);
    const json cfg = load_config(argc, argv);
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");

    if (predict->parsed()) {
      overlay(predict, cfg, "threads", pa.threads);
      overlay(predict, cfg, "rc", pa.rc);
      overlay(predict, cfg, "cc", pa.cc);
      overlay(predict, cfg, "cw", pa.cw);
      overlay(predict, cfg, "pw", pa.pw);
      overlay(predict, cfg, "ghz", pa.ghz);
      return cmd_predict(pa);
    }
    if (simulate->parsed()) {
      overlay(simulate, cfg, "threads", sa.threads);
      overlay(simulate, cfg, "q", sa.q);
      overlay(simulate, cfg, "r", sa.r);
      overlay(simulate, cfg, "horizon", sa.horizon);
      overlay(simulate, cfg, "rc", sa.rc);
      overlay(simulate, cfg, "cc", sa.cc);
      overlay(simulate, cfg, "pw", sa.pw);
      return cmd_simulate(sa);
    }
    if (backoff->parsed()) return cmd_backoff(ba);
    if (calibrate->parsed()) {
      if (calibrate_rounds < 1) {
        std::cerr << "error: --rounds must be >= 1\n";
        return kExitUsage;
      }
      return cmd_calibrate(calibrate_rounds);
    }
    if (bench_cmd->parsed()) return cmd_bench(bna);
    if (compare->parsed()) return cmd_compare(ca);
    return kExitUsage;
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const bench::HardwareUnavailable& e) {
    std::cerr << "hardware unavailable: " << e.what() << '\n';
    return kExitHardwareUnavailable;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNoConvergence;
  }
}
