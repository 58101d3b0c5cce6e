// qpots command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 protocol error,
// 4 numerical failure, 1 anything else.

#include "qpots/experiment.hpp"
#include "qpots/history.hpp"
#include "qpots/pareto.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace qpots;

constexpr int kConfigExit = 2;
constexpr int kProtocolExit = 3;
constexpr int kNumericExit = 4;

VectorXd parse_ref(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--ref: '" + item + "' is not a number");
    }
  }
  if (vals.empty()) throw ConfigError("--ref: empty reference point");
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

int cmd_run(const std::string& config_path, unsigned workers, const std::string& policy, const std::string& out) {
  ExperimentConfig cfg = load_config(config_path);
  if (!policy.empty()) {
    cfg.policy = policy;
    // Re-validate through the parser so an unknown policy is a config error.
    cfg = parse_config(serialize_config(cfg));
  }
  const auto dir = resolve_output_dir(cfg, out);
  const ExperimentResult res = run_experiment(cfg, workers, dir);
  for (const auto& run : res.runs) {
    std::cout << "rep " << run.repetition << ": final hv " << format_double(run.records.back().hv) << " ("
              << run.records.back().evaluations << " evaluations)\n";
  }
  for (const auto& [rep, msg] : res.failures) std::cerr << "rep " << rep << " failed: " << msg << "\n";
  std::cout << "outputs in " << res.policy_dir.string() << "\n";
  return res.failure_code;
}

int cmd_hv(const std::string& archive_path, const std::string& ref_text) {
  const VectorXd ref = parse_ref(ref_text);
  ParetoArchive a;
  try {
    a = read_archive_csv(archive_path, ref.size());
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  const HypervolumeResult r = hypervolume_detailed(a.Y, ref);
  std::cout << format_double(r.value) << "\n";
  if (!r.exact) std::cerr << "monte carlo estimate, standard error " << format_double(r.std_error) << "\n";
  if (r.excluded > 0) std::cerr << "warning: " << r.excluded << " point(s) do not dominate the reference point\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpots: batch Pareto optimal Thompson sampling"};
  app.require_subcommand(1);

  std::string config_path, policy, out, state_path, obs_path, archive_path, ref_text, proposals_path;
  unsigned workers = 0;
  Index rep = 0;

  auto* run = app.add_subcommand("run", "run every repetition of an experiment");
  run->add_option("--config", config_path, "experiment config file")->required();
  run->add_option("--workers", workers, "parallel repetitions (default: all cores)");
  run->add_option("--policy", policy, "override the config's policy (qpots, sobol, scalarized-ts)");
  run->add_option("--out", out, "output directory (default: config output_dir, then $QPOTS_OUTPUT_DIR)");

  auto* init = app.add_subcommand("init", "create an ask/tell state file");
  init->add_option("--config", config_path, "experiment config file")->required();
  init->add_option("--state", state_path, "state file to create")->required();
  init->add_option("--rep", rep, "repetition index (seed = base_seed + rep)");

  auto* ask_cmd = app.add_subcommand("ask", "propose the next batch (JSON lines)");
  ask_cmd->add_option("--state", state_path, "state file")->required();
  ask_cmd->add_option("--proposals", proposals_path, "write proposals here instead of stdout");

  auto* tell_cmd = app.add_subcommand("tell", "report observations for the pending batch");
  tell_cmd->add_option("--state", state_path, "state file")->required();
  tell_cmd->add_option("--obs", obs_path, "observations file (JSON lines)")->required();

  auto* hv = app.add_subcommand("hv", "hypervolume of an archive CSV");
  hv->add_option("--archive", archive_path, "CSV with x columns then y columns")->required();
  hv->add_option("--ref", ref_text, "reference point r1,r2,...")->required();

  auto* resume = app.add_subcommand("resume", "finish a run from its checkpoint");
  resume->add_option("--state", state_path, "repetition checkpoint (repN.state.json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigExit;
  }

  try {
    if (*run) return cmd_run(config_path, workers, policy, out);
    if (*init) {
      ask_tell_init(load_config(config_path), rep, state_path);
      return 0;
    }
    if (*ask_cmd) {
      if (proposals_path.empty()) {
        ask(state_path, std::cout);
      } else {
        std::ofstream f(proposals_path);
        if (!f) throw ConfigError("cannot write " + proposals_path);
        ask(state_path, f);
      }
      return 0;
    }
    if (*tell_cmd) {
      std::ifstream f(obs_path);
      if (!f) throw ProtocolError("cannot read observations file " + obs_path);
      tell(state_path, f);
      return 0;
    }
    if (*hv) return cmd_hv(archive_path, ref_text);
    if (*resume) {
      const RunHistory h = resume_run(state_path);
      std::cout << "rep " << h.repetition << ": final hv " << format_double(h.records.back().hv) << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfigExit;
  } catch (const ProtocolError& e) {
    std::cerr << "protocol error: " << e.what() << "\n";
    return kProtocolExit;
  } catch (const CheckpointError& e) {
    std::cerr << "state file error: " << e.what() << "\n";
    return kProtocolExit;
  } catch (const IllConditionedError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericExit;
  } catch (const OracleFailureError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericExit;
  } catch (const PathCacheOverflow& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
