// pairpref: simulate, benchmark, serve and replay preference-elicitation
// sessions.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage error, 3 replay divergence.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <pthread.h>

#include <CLI11.hpp>

#include "pairpref/record_io.hpp"
#include "pairpref/service/http_server.hpp"
#include "pairpref/service/session_store.hpp"
#include "pairpref/session.hpp"

namespace fs = std::filesystem;
using namespace pairpref;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDivergence = 3;

const CLI::Range kCount(std::size_t{1}, std::size_t{10'000'000});

struct EngineFlags {
  int dims = 2;
  std::size_t steps = 30;
  double delta = 0.0;
  std::string guard = "scaled";
  std::size_t m_samples = MhConfig{}.m_samples;
  std::size_t burn_in = MhConfig{}.burn_in;
  std::size_t thin = MhConfig{}.thin;
  double step_scale = MhConfig{}.step_scale;
  double jitter = MhConfig{}.jitter;
  std::size_t m_outer = MiConfig{}.m_outer;
  std::size_t m_inner = MiConfig{}.m_inner;
  std::size_t candidates = MiConfig{}.n_candidates;
  std::string weighting = "uniform";
  std::string update_mode = "adf";

  void attach(CLI::App& app) {
    app.add_option("--dims,-d", dims, "Number of preference dimensions D")
        ->check(CLI::Range(1, 32))->capture_default_str();
    app.add_option("--steps,-n", steps, "Maximum number of interactions")
        ->check(kCount)->capture_default_str();
    app.add_option("--delta", delta, "Stopping threshold on per-step MI")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--guard", guard, "Stopping guard: scaled (MI <= l*delta) or plain")
        ->check(CLI::IsMember({"scaled", "plain"}))->capture_default_str();
    app.add_option("--mh-samples", m_samples, "Retained MH draws per update")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10'000'000}))->capture_default_str();
    app.add_option("--burn-in", burn_in, "MH burn-in iterations")
        ->check(CLI::NonNegativeNumber)->capture_default_str();
    app.add_option("--thin", thin, "MH thinning interval")
        ->check(kCount)->capture_default_str();
    app.add_option("--step-scale", step_scale, "MH proposal scale")
        ->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--jitter", jitter, "Diagonal jitter on the moment-matched covariance")
        ->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--mi-outer,-M", m_outer, "Outer (alpha) MI samples")
        ->check(kCount)->capture_default_str();
    app.add_option("--mi-inner", m_inner, "Inner (gamma|alpha) MI samples")
        ->check(kCount)->capture_default_str();
    app.add_option("--candidates,-N", candidates, "Alternatives scored per trial")
        ->check(kCount)->capture_default_str();
    app.add_option("--weighting", weighting, "MI sample weighting")
        ->check(CLI::IsMember({"uniform", "paper_density"}))->capture_default_str();
    app.add_option("--update-mode", update_mode, "adf or full_history")
        ->check(CLI::IsMember({"adf", "full_history"}))->capture_default_str();
  }

  EngineConfig build() const {
    EngineConfig cfg = EngineConfig::for_dims(dims);
    cfg.stop.delta = delta;
    cfg.stop.max_steps = steps;
    cfg.stop.guard = guard == "plain" ? StopGuard::kPlain : StopGuard::kScaled;
    cfg.mh.m_samples = m_samples;
    cfg.mh.burn_in = burn_in;
    cfg.mh.thin = thin;
    cfg.mh.step_scale = step_scale;
    cfg.mh.jitter = jitter;
    cfg.mi.m_outer = m_outer;
    cfg.mi.m_inner = m_inner;
    cfg.mi.n_candidates = candidates;
    cfg.mi.weighting =
        weighting == "paper_density" ? Weighting::kPaperDensity : Weighting::kUniform;
    cfg.update_mode =
        update_mode == "full_history" ? UpdateMode::kFullHistory : UpdateMode::kAdf;
    cfg.validate();
    return cfg;
  }
};

std::string join(const Vector& v) {
  std::ostringstream os;
  for (Index i = 0; i < v.size(); ++i) os << (i ? "," : "") << format_number(v[i]);
  return os.str();
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  writer(os);
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

// ---- simulate --------------------------------------------------------------

struct SimulateFlags {
  EngineFlags engine;
  std::uint64_t seed = 1;
  std::vector<double> theta;
  std::vector<double> lambda;
  std::string out_dir = ".";
  std::string prefix = "run";
};

int run_simulate(const SimulateFlags& f) {
  const EngineConfig cfg = f.engine.build();
  UserParams truth;
  if (!f.theta.empty()) {
    if (static_cast<Index>(f.theta.size()) != cfg.dims()) {
      throw std::invalid_argument("--theta needs exactly --dims values");
    }
    truth.theta = Eigen::Map<const Vector>(f.theta.data(), cfg.dims());
    truth.lambda = f.lambda.empty()
                       ? Vector::Ones(cfg.dims())
                       : Vector(Eigen::Map<const Vector>(f.lambda.data(),
                                                         static_cast<Index>(f.lambda.size())));
  } else {
    // Same truth/seed split as run 0 of `benchmark --seed`.
    Rng truth_rng(derive_seed(f.seed, 0));
    truth = draw_truth(cfg.dims(), truth_rng);
  }
  truth.validate();

  std::vector<double> times;
  const RunRecord record = run_simulation(
      truth, cfg, derive_seed(f.seed, 1), [&](const RunRow& row, double secs) {
        times.push_back(secs);
        std::cerr << "step " << row.step << " r=" << to_int(row.response)
                  << " mi=" << (row.designed ? format_number(row.mi_bits) : "-")
                  << " rmse=" << format_number(row.rmse_post) << " time=" << secs << "s\n";
      });

  const fs::path base = fs::path(f.out_dir) / f.prefix;
  write_file(base.string() + ".csv", [&](std::ostream& os) { write_run_csv(os, record); });
  write_file(base.string() + ".ndjson",
             [&](std::ostream& os) { write_run_ndjson(os, record); });

  std::cout << "truth_theta " << join(truth.theta) << "\n"
            << "theta_hat " << join(record.estimate.theta) << "\n"
            << "rmse " << format_number(rmse(record.estimate.theta, truth.theta)) << "\n"
            << "rsu " << format_number(record.final_rsu) << "\n"
            << "steps " << record.rows.size() << "\n"
            << "status " << to_string(record.status) << "\n"
            << "median_step_seconds " << quantile(times, 0.5) << "\n";
  return kExitOk;
}

// ---- benchmark -------------------------------------------------------------

struct BenchmarkFlags {
  EngineFlags engine;
  std::size_t runs = 10;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool per_run = false;
};

int run_benchmark(const BenchmarkFlags& f) {
  const EngineConfig cfg = f.engine.build();
  std::vector<double> times;
  const BenchmarkResult result =
      benchmark(f.runs, cfg, f.seed, [&](std::size_t run, const RunRow& row, double secs) {
        times.push_back(secs);
        if (row.step == 1 || row.step % 10 == 0) {
          std::cerr << "run " << run + 1 << "/" << f.runs << " step " << row.step
                    << " rmse=" << format_number(row.rmse_post) << " time=" << secs << "s\n";
        }
      });

  const fs::path dir(f.out_dir);
  write_file(dir / "benchmark.csv", [&](std::ostream& os) { write_benchmark_csv(os, result); });
  write_file(dir / "benchmark.ndjson",
             [&](std::ostream& os) { write_benchmark_ndjson(os, result); });
  if (f.per_run) {
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      write_file(dir / ("run_" + std::to_string(i + 1) + ".csv"),
                 [&](std::ostream& os) { write_run_csv(os, result.runs[i]); });
    }
  }

  const BenchmarkRow& first = result.table.front();
  const BenchmarkRow& last = result.table.back();
  std::cout << "runs " << f.runs << "\n"
            << "rows " << result.table.size() << "\n"
            << "rmse_median_first " << format_number(first.rmse.median) << "\n"
            << "rmse_median_last " << format_number(last.rmse.median) << "\n"
            << "rsu_median_last " << format_number(last.rsu.median) << "\n"
            << "median_step_seconds " << quantile(times, 0.5) << "\n";
  return kExitOk;
}

// ---- serve -----------------------------------------------------------------

struct ServeFlags {
  std::string config_path;
  std::string host;
  int port = -1;
  std::string log_path;
};

int run_serve(const ServeFlags& f) {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string log_path = "pairpref.wal.ndjson";
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw std::runtime_error("cannot read config " + f.config_path);
    const auto doc = service::json::parse(in);
    host = doc.value("host", host);
    port = doc.value("port", port);
    log_path = doc.value("log_path", log_path);
  }
  if (const char* env = std::getenv("PAIRPREF_PORT")) port = std::stoi(env);
  if (const char* env = std::getenv("PAIRPREF_LOG")) log_path = env;
  if (!f.host.empty()) host = f.host;
  if (f.port >= 0) port = f.port;
  if (!f.log_path.empty()) log_path = f.log_path;

  // Block termination signals before any thread starts so only the waiter
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::SessionStore store(log_path);
  if (store.quarantined_lines() > 0) {
    std::cerr << "quarantined " << store.quarantined_lines() << " torn log line(s)\n";
  }
  for (const auto& d : store.recovery_divergences()) std::cerr << "recovery: " << d << "\n";
  std::cerr << "recovered " << store.size() << " session(s) from " << log_path << "\n";

  service::HttpServer server(store);
  const int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return kExitRuntime;
  }
  std::cout << "listening on " << host << ":" << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  const bool ok = server.listen();
  // listen() can also return on its own; wake the waiter so it can exit.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << "stopped\n";
  return ok ? kExitOk : kExitRuntime;
}

// ---- replay ----------------------------------------------------------------

int run_replay(const std::string& log_path) {
  if (!fs::exists(log_path)) {
    std::cerr << "error: log " << log_path << " does not exist\n";
    return kExitRuntime;
  }
  const auto read = service::read_log(log_path, /*repair=*/false);
  for (const auto& bad : read.quarantined) {
    std::cerr << "skipping unparseable line (" << bad.size() << " bytes)\n";
  }
  const auto report = service::replay_records(read.records);
  for (const auto& d : report.divergences) std::cerr << "divergence: " << d << "\n";
  std::cout << "records " << read.records.size() << "\n"
            << "sessions " << report.sessions.size() << "\n"
            << "divergences " << report.divergences.size() << "\n";
  return report.divergences.empty() ? kExitOk : kExitDivergence;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pairwise-comparison preference learning engine"};
  app.require_subcommand(1);

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Run one seeded simulated session");
  sim.engine.attach(*simulate);
  simulate->add_option("--seed,-s", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--theta", sim.theta, "True optimum in (0,1)^D (default: random)")
      ->delimiter(',');
  simulate->add_option("--lambda", sim.lambda, "True sensitivities (default: 1)")
      ->delimiter(',');
  simulate->add_option("--out-dir,-o", sim.out_dir, "Output directory")->capture_default_str();
  simulate->add_option("--prefix", sim.prefix, "Output file stem")->capture_default_str();

  BenchmarkFlags bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "Aggregate T seeded simulations");
  bench.engine.attach(*bench_cmd);
  bench_cmd->add_option("--runs,-T", bench.runs, "Number of simulated users")
      ->check(kCount)->capture_default_str();
  bench_cmd->add_option("--seed,-s", bench.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out-dir,-o", bench.out_dir, "Output directory")->capture_default_str();
  bench_cmd->add_flag("--per-run", bench.per_run, "Also write one CSV per run");

  ServeFlags srv;
  auto* serve = app.add_subcommand("serve", "Serve sessions over HTTP with log recovery");
  serve->add_option("--config,-c", srv.config_path, "JSON config file");
  serve->add_option("--host", srv.host, "Bind address");
  serve->add_option("--port,-p", srv.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--log", srv.log_path, "Write-ahead log path");

  std::string replay_log;
  auto* replay = app.add_subcommand("replay", "Recompute sessions from a log and verify");
  replay->add_option("--log,log", replay_log, "Write-ahead log path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim);
    if (*bench_cmd) return run_benchmark(bench);
    if (*serve) return run_serve(srv);
    if (*replay) return run_replay(replay_log);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
