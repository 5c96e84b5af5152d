// Command-line workbench: run scenario files, verify them against their
// bundled oracles, and spot-check the resolvent identities.
//
// Exit codes: 0 all checks pass, 1 oracle mismatch or not converged,
// 2 runtime failure (unreadable input, invalid scenario, non-finite iterates).

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include <drsplit/drsplit.hpp>

namespace fs = std::filesystem;
using namespace drsplit;

namespace {

std::string vec_str(const Vector& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.dim(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s + "]";
}

const char* status_word(int code) {
  switch (code) {
    case 0: return "PASS";
    case 1: return "MISMATCH";
    default: return "FAIL";
  }
}

void print_checks(const ScenarioOutcome& out, std::ostream& os) {
  if (!out.summary.contains("checks")) return;
  for (const auto& c : out.summary["checks"]) {
    os << "  [" << (c["pass"].get<bool>() ? " ok " : "FAIL") << "] "
       << c["name"].get<std::string>() << ": " << c["detail"].get<std::string>() << "\n";
  }
}

int run_one(const fs::path& file, const std::optional<fs::path>& out_dir,
            const RunOverrides& overrides, std::ostream& os) {
  ScenarioOutcome outcome;
  try {
    ScenarioFile sc = load_scenario(file);
    outcome = run_scenario(sc, overrides);
    if (out_dir) write_outputs(outcome, *out_dir);
  } catch (const Error& e) {
    os << file.filename().string() << ": FAIL\n  " << e.what() << "\n";
    return 2;
  }
  print_checks(outcome, os);
  if (outcome.summary.contains("estimate")) {
    const auto& est = outcome.summary["estimate"];
    os << "  v   = " << est["v"].dump() << "\n"
       << "  v_d = " << est["v_d"].dump() << "\n"
       << "  v_r = " << est["v_r"].dump() << "\n";
  }
  for (const std::string& note : outcome.notes) os << "  note: " << note << "\n";
  if (out_dir) {
    os << "  wrote " << (*out_dir / (outcome.name + "_trace.csv")).string() << " and "
       << (*out_dir / (outcome.name + "_summary.json")).string() << "\n";
  }
  os << outcome.name << ": " << status_word(outcome.exit_code) << "\n";
  return outcome.exit_code;
}

int run_all(const fs::path& dir, const std::optional<fs::path>& out_dir,
            const RunOverrides& overrides, std::size_t jobs) {
  if (!fs::is_directory(dir)) {
    std::cerr << "not a directory: " << dir.string() << "\n";
    return 2;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no scenario files found in " << dir.string() << "\n";
    return 2;
  }

  struct Slot {
    std::string text;
    int code = 2;
  };
  std::vector<Slot> slots(files.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      std::ostringstream os;
      slots[i].code = run_one(files[i], out_dir, overrides, os);
      slots[i].text = os.str();
    }
  };
  jobs = std::clamp<std::size_t>(jobs, 1, files.size());
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  int worst = 0;
  std::size_t passed = 0;
  for (const Slot& s : slots) {
    std::cout << s.text;
    worst = std::max(worst, s.code);
    if (s.code == 0) ++passed;
  }
  std::cout << passed << "/" << files.size() << " scenarios passed\n";
  return worst;
}

int run_identities(const fs::path& file, std::size_t samples, std::uint64_t seed) {
  ScenarioFile sc = load_scenario(file);
  ProblemSpec spec = to_problem(sc);
  std::optional<Vector> v;
  if (sc.oracle && sc.oracle->v) {
    v = sc.oracle->v;
  } else {
    RunConfig cfg = sc.run_cfg;
    cfg.max_iters = std::min<std::size_t>(cfg.max_iters, 2000);
    if (cfg.stop_tol <= 0.0) cfg.stop_tol = kConvergenceTol;
    v = run(spec, cfg).final_estimate.v;
  }
  IdentityCheckReport report = check_identities(spec, samples, seed, v);
  std::cout << "samples:          " << report.samples << "\n"
            << "inverse sum:      " << format_double(report.max_inverse_sum) << "\n"
            << "double identity:  " << format_double(report.max_double_identity) << "\n"
            << "shift identity:   " << format_double(report.max_shift) << "\n"
            << "firmness excess:  " << format_double(report.max_firmness) << "\n"
            << "normal identity:  " << format_double(report.max_normal)
            << "  (v = " << vec_str(*v) << ")\n"
            << (report.pass() ? "identities: PASS" : "identities: MISMATCH") << "\n";
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Splitting-iteration workbench for possibly inconsistent problems"};
  app.require_subcommand(1);

  std::string scenario_path, dir_path, out_path;
  std::size_t max_iters = 0;
  double tol = 0.0;
  std::size_t samples = 1000;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  bool no_write = false;
  std::uint64_t seed = 0;
  bool seed_given = false;

  CLI::App* cmd_run = app.add_subcommand("run", "run one scenario and write trace/summary");
  cmd_run->add_option("scenario", scenario_path, "scenario JSON file")->required();
  cmd_run->add_option("--out", out_path, "output directory (default: out)");
  cmd_run->add_option("--max-iters", max_iters, "override the iteration budget");
  cmd_run->add_option("--tol", tol, "override the displacement comparison tolerance");
  cmd_run->add_flag("--no-write", no_write, "skip writing trace/summary files");

  CLI::App* cmd_all = app.add_subcommand("run-all", "run every scenario in a directory");
  cmd_all->add_option("dir", dir_path, "directory with scenario JSON files")->required();
  cmd_all->add_option("--out", out_path, "output directory (default: out)");
  cmd_all->add_option("--max-iters", max_iters, "override the iteration budget");
  cmd_all->add_option("--tol", tol, "override the displacement comparison tolerance");
  cmd_all->add_option("--jobs", jobs, "worker threads");

  CLI::App* cmd_verify = app.add_subcommand("verify", "run and compare, no file output");
  cmd_verify->add_option("scenario", scenario_path, "scenario JSON file")->required();
  cmd_verify->add_option("--max-iters", max_iters, "override the iteration budget");
  cmd_verify->add_option("--tol", tol, "override the displacement comparison tolerance");

  CLI::App* cmd_ids = app.add_subcommand("identities", "randomized resolvent identity checks");
  cmd_ids->add_option("scenario", scenario_path, "scenario JSON file")->required();
  cmd_ids->add_option("--samples", samples, "number of sample points");
  cmd_ids->add_option("--seed", seed, "RNG seed (default: DRTOOL_SEED or 0)")
      ->each([&](const std::string&) { seed_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  RunOverrides overrides;
  if (max_iters > 0) overrides.max_iters = max_iters;
  if (tol > 0.0) overrides.oracle_tol = tol;

  try {
    if (cmd_run->parsed()) {
      std::optional<fs::path> out_dir;
      if (!no_write) out_dir = out_path.empty() ? fs::path("out") : fs::path(out_path);
      return run_one(scenario_path, out_dir, overrides, std::cout);
    }
    if (cmd_all->parsed()) {
      fs::path out_dir = out_path.empty() ? fs::path("out") : fs::path(out_path);
      return run_all(dir_path, out_dir, overrides, jobs);
    }
    if (cmd_verify->parsed()) {
      return run_one(scenario_path, std::nullopt, overrides, std::cout);
    }
    if (cmd_ids->parsed()) {
      if (!seed_given) seed = env_seed();
      return run_identities(scenario_path, samples, seed);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
