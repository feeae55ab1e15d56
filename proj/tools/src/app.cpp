#include "ethlab/cli/app.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "ethlab/cli/config.hpp"
#include "ethlab/cli/experiments.hpp"
#include "ethlab/cli/selector.hpp"

namespace ethlab::cli {

unsigned worker_count() {
  const char* env = std::getenv("ETHLAB_THREADS");
  if (env == nullptr || *env == '\0') return std::max(1u, std::thread::hardware_concurrency());
  const long n = parse_integer(env, "ETHLAB_THREADS");
  if (n < 1 || n > 1024) throw ConfigError("ETHLAB_THREADS must be in 1..1024");
  return static_cast<unsigned>(n);
}

namespace {

struct Request {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

int execute(Experiment experiment, const Request& request, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  std::unique_ptr<Plan> plan;
  std::uint64_t seed = 0;
  std::filesystem::path dir;
  unsigned threads = 1;
  Config config;
  try {
    config = Config::from_file(request.config_path);
    if (config.has("run.experiment") && config.text("run.experiment") != to_string(experiment)) {
      throw ConfigError("config is for '" + config.text("run.experiment") + "', not '" + to_string(experiment) + "'");
    }
    seed = config.unsigned_integer("run.seed", 0);
    if (request.seed) seed = *request.seed;
    std::optional<std::string> configured;
    if (config.has("run.output_dir")) configured = config.text("run.output_dir");
    if (request.out) {
      dir = *request.out;
    } else if (configured) {
      dir = *configured;
    } else {
      throw ConfigError("no output directory: set run.output_dir or pass --out");
    }
    threads = worker_count();
    plan = plan_experiment(experiment, config, seed);
  } catch (const ConfigError& e) {
    err << "ethlab: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SelectorError& e) {
    err << "ethlab: config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "ethlab: error: " << e.what() << '\n';
    return kRuntimeFailure;
  }

  try {
    std::filesystem::create_directories(dir);
    Outputs outputs(dir);
    plan->run(outputs, "", threads);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const nlohmann::json manifest{{"tool", "ethlab"},
                                  {"version", ETHLAB_VERSION},
                                  {"experiment", to_string(experiment)},
                                  {"seed", seed},
                                  {"threads", threads},
                                  {"config_path", request.config_path},
                                  {"config", config.echo()},
                                  {"wall_time_seconds", wall},
                                  {"files", outputs.checksums()}};
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << '\n';
    if (!m) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
    out << "ethlab " << to_string(experiment) << ": " << outputs.files().size() << " files in " << dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "ethlab: error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kSuccess;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact-diagonalization experiments on qubit and qutrit chains", "ethlab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ETHLAB_VERSION);
  Request request;
  std::uint64_t seed = 0;
  std::string out_dir;
  const std::vector<std::pair<Experiment, const char*>> commands{
      {Experiment::Spectrum, "Eigenvalues per symmetry sector"},
      {Experiment::Levels, "Unfolded level-spacing histograms and chaos classification"},
      {Experiment::Evolve, "Exact evolution of random initial-state ensembles"},
      {Experiment::Eth, "Energy-basis matrix-element diagnostics"},
      {Experiment::Thermal, "Gibbs and microcanonical reference curves"},
      {Experiment::ChargeSpread, "Local charge profiles under the qutrit dynamics"},
      {Experiment::Sweep, "Repeat another experiment over parameter points"}};
  std::vector<std::pair<Experiment, CLI::App*>> subs;
  for (const auto& [e, help] : commands) {
    CLI::App* sub = app.add_subcommand(to_string(e), help);
    sub->add_option("--config", request.config_path, "Experiment config (INI)")->required();
    sub->add_option("--seed", seed, "Master seed, overrides run.seed");
    sub->add_option("--out", out_dir, "Output directory, overrides run.output_dir");
    subs.emplace_back(e, sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }
  for (const auto& [e, sub] : subs) {
    if (!sub->parsed()) continue;
    if (sub->count("--seed") > 0) request.seed = seed;
    if (sub->count("--out") > 0) request.out = out_dir;
    return execute(e, request, out, err);
  }
  return kConfigError;
}

}  // namespace ethlab::cli
