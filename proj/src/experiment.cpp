#include "qpots/experiment.hpp"

#include "qpots/baselines.hpp"
#include "qpots/benchmarks.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <thread>

namespace qpots {

using nlohmann::json;

std::uint64_t repetition_seed(const ExperimentConfig& cfg, Index rep) {
  return cfg.base_seed + static_cast<std::uint64_t>(rep);
}

MatrixXd seed_design(const ExperimentConfig& cfg, Index rep) {
  Rng rng(derive_seed(repetition_seed(cfg, rep), hash_tag("seed-design")));
  MatrixXd X(cfg.n_seed, cfg.d);
  for (Index i = 0; i < cfg.n_seed; ++i) {
    for (Index j = 0; j < cfg.d; ++j) X(i, j) = rng.uniform(cfg.lower[j], cfg.upper[j]);
  }
  return X;
}

Oracle benchmark_oracle(const ExperimentConfig& cfg, Index rep) {
  if (cfg.external()) throw ConfigError("config key 'benchmark': external oracles are driven through ask/tell");
  auto bench = std::make_shared<const Benchmark>(make_benchmark(cfg.benchmark, cfg.K));
  const std::uint64_t seed = repetition_seed(cfg, rep);
  const std::uint64_t policy_tag = hash_tag(cfg.policy);
  const Index n_seed = cfg.n_seed;
  const double noise = cfg.noise_var;
  return [bench, seed, policy_tag, n_seed, noise](const VectorXd& x, Index eval) {
    const std::uint64_t key = eval < n_seed ? derive_seed(seed, hash_tag("noise"), eval)
                                            : derive_seed(seed, hash_tag("noise"), policy_tag, eval);
    Rng rng(key);
    return observe(*bench, x, noise, rng);
  };
}

namespace {

VectorXd resolve_ref(const ExperimentConfig& cfg, const MatrixXd& Y) {
  if (cfg.ref_point.size() == cfg.K) return cfg.ref_point;
  return default_reference_point(Y);
}

void check_failures(const BOState& bo, Index budget) {
  if (10 * bo.failures() > budget) {
    throw OracleFailureError("oracle failed on " + std::to_string(bo.failures()) +
                             " evaluations, more than 10% of the budget of " + std::to_string(budget));
  }
}

RunState seeded_state(const ExperimentConfig& cfg, Index rep, const MatrixXd& X, const MatrixXd& Y) {
  RunState s;
  s.config = cfg;
  s.repetition = rep;
  s.seeded = true;
  Dataset data(cfg.space(), X, Y, cfg.noise_var);
  data.validate();
  s.bo = make_state(std::move(data), repetition_seed(cfg, rep), resolve_ref(cfg, Y), qpots_options(cfg),
                    policy_uses_models(cfg.policy));
  s.bo.history.repetition = rep;
  s.bo.history.policy = cfg.policy;
  check_failures(s.bo, cfg.budget);
  return s;
}

std::filesystem::path state_file(const std::filesystem::path& dir, Index rep) {
  return dir / ("rep" + std::to_string(rep) + ".state.json");
}

int failure_class(const std::exception_ptr& e) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError&) {
    return 2;
  } catch (const ProtocolError&) {
    return 3;
  } catch (const CheckpointError&) {
    return 3;
  } catch (const IllConditionedError&) {
    return 4;
  } catch (const OracleFailureError&) {
    return 4;
  } catch (const PathCacheOverflow&) {
    return 4;
  } catch (...) {
    return 1;
  }
}

int worse(int a, int b) {
  // Prefer the most specific code; 1 (unclassified) only if nothing else.
  if (a == 0) return b;
  if (b == 0) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  return std::max(a, b);
}

}  // namespace

RunState start_run(const ExperimentConfig& cfg, Index rep, const Oracle& oracle) {
  const MatrixXd X = seed_design(cfg, rep);
  const MatrixXd Y = evaluate_oracle(oracle, X, 0, cfg.K);
  return seeded_state(cfg, rep, X, Y);
}

void policy_step(RunState& state, const Oracle& oracle) {
  const ExperimentConfig& cfg = state.config;
  if (cfg.policy == "qpots") {
    qpots_step(state.bo, qpots_options(cfg), oracle);
  } else if (cfg.policy == "scalarized-ts") {
    scalarized_ts_step(state.bo, qpots_options(cfg), oracle);
  } else if (cfg.policy == "sobol") {
    std::optional<std::uint64_t> shift;
    if (cfg.sobol_shift) shift = derive_seed(state.bo.seed, hash_tag("sobol-shift"));
    SobolStream stream(cfg.d, shift);
    for (Index i = cfg.n_seed; i < state.bo.data.size(); ++i) stream.next();
    sobol_step(state.bo, cfg.q, cfg.budget, stream, oracle);
  } else {
    throw ConfigError("config key 'policy': unknown policy '" + cfg.policy + "'");
  }
}

void advance_to_budget(RunState& state, const Oracle& oracle, const std::optional<std::filesystem::path>& checkpoint) {
  if (!state.seeded) throw ProtocolError("run has no seed data yet");
  if (state.pending) throw ProtocolError("run has a pending ask/tell batch; answer it with tell");
  while (state.bo.data.size() < state.config.budget) {
    policy_step(state, oracle);
    if (checkpoint) write_checkpoint(*checkpoint, state);
  }
}

RunHistory finish(const RunState& state) {
  RunHistory h = state.bo.history;
  h.repetition = state.repetition;
  h.policy = state.config.policy;
  h.archive = state.bo.archive();
  return h;
}

RunHistory run_policy(const ExperimentConfig& cfg, Index rep, const Oracle& oracle) {
  RunState s = start_run(cfg, rep, oracle);
  advance_to_budget(s, oracle);
  return finish(s);
}

RunHistory run_qpots(const ExperimentConfig& cfg, Index rep, const Oracle& oracle) {
  ExperimentConfig c = cfg;
  c.policy = "qpots";
  return run_policy(c, rep, oracle);
}

RunHistory run_sobol(const ExperimentConfig& cfg, Index rep, const Oracle& oracle) {
  ExperimentConfig c = cfg;
  c.policy = "sobol";
  return run_policy(c, rep, oracle);
}

RunHistory run_scalarized_ts(const ExperimentConfig& cfg, Index rep, const Oracle& oracle) {
  ExperimentConfig c = cfg;
  c.policy = "scalarized-ts";
  return run_policy(c, rep, oracle);
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "results";
}

void write_run_outputs(const std::filesystem::path& dir, const RunState& state) {
  const RunHistory h = finish(state);
  const std::string stem = "rep" + std::to_string(state.repetition);
  write_history_csv(dir / (stem + "_history.csv"), {h});
  write_events_jsonl(dir / (stem + "_events.jsonl"), h);
  write_archive_csv(dir / (stem + "_archive.csv"), h.archive);
  write_observations_csv(dir / (stem + "_observations.csv"), state.bo.data.X, state.bo.data.Y);
}

void write_merged_outputs(const std::filesystem::path& dir) {
  std::vector<std::pair<Index, RunHistory>> found;
  const std::regex pattern(R"(rep(\d+)\.state\.json)");
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (!std::regex_match(name, m, pattern)) continue;
    const RunState s = read_checkpoint(entry.path());
    if (!s.seeded || s.bo.data.size() < s.config.budget) continue;
    found.emplace_back(s.repetition, finish(s));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<RunHistory> runs;
  for (auto& [r, h] : found) runs.push_back(std::move(h));
  write_history_csv(dir / "history.csv", runs);
  write_summary_csv(dir / "summary.csv", runs);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers, const std::filesystem::path& out_dir) {
  ExperimentResult result;
  result.policy_dir = out_dir / cfg.policy;
  std::filesystem::create_directories(result.policy_dir);
  {
    std::ofstream out(result.policy_dir / "config.txt", std::ios::binary | std::ios::trunc);
    out << serialize_config(cfg);
  }
  if (workers == 0) workers = std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.repetitions));

  const auto R = static_cast<std::size_t>(cfg.repetitions);
  std::vector<std::optional<RunHistory>> slots(R);
  std::vector<std::exception_ptr> errors(R);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < R; r = next++) {
      const auto rep = static_cast<Index>(r);
      try {
        const Oracle oracle = benchmark_oracle(cfg, rep);
        const auto ckpt = state_file(result.policy_dir, rep);
        RunState s = start_run(cfg, rep, oracle);
        write_checkpoint(ckpt, s);
        advance_to_budget(s, oracle, ckpt);
        write_run_outputs(result.policy_dir, s);
        slots[r] = finish(s);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (std::size_t r = 0; r < R; ++r) {
    if (slots[r]) {
      result.runs.push_back(std::move(*slots[r]));
      continue;
    }
    std::string msg = "unknown error";
    try {
      std::rethrow_exception(errors[r]);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    result.failures.emplace_back(static_cast<Index>(r), msg);
    result.failure_code = worse(result.failure_code, failure_class(errors[r]));
  }
  write_history_csv(result.policy_dir / "history.csv", result.runs);
  write_summary_csv(result.policy_dir / "summary.csv", result.runs);
  return result;
}

RunHistory resume_run(const std::filesystem::path& state_path) {
  RunState s = read_checkpoint(state_path);
  const Oracle oracle = benchmark_oracle(s.config, s.repetition);
  if (!s.seeded) {
    if (s.pending) throw ProtocolError("state has a pending ask/tell batch; answer it with tell");
    s = start_run(s.config, s.repetition, oracle);
    write_checkpoint(state_path, s);
  }
  advance_to_budget(s, oracle, state_path);
  const auto dir = state_path.has_parent_path() ? state_path.parent_path() : std::filesystem::path(".");
  write_run_outputs(dir, s);
  write_merged_outputs(dir);
  return finish(s);
}

void ask_tell_init(const ExperimentConfig& cfg, Index rep, const std::filesystem::path& state_path) {
  if (cfg.policy != "qpots") throw ConfigError("config key 'policy': ask/tell supports the qpots policy only");
  if (rep < 0) throw ConfigError("repetition must be >= 0");
  RunState s;
  s.config = cfg;
  s.repetition = rep;
  s.bo.seed = repetition_seed(cfg, rep);
  s.bo.data = Dataset(cfg.space(), MatrixXd(0, cfg.d), MatrixXd(0, cfg.K), cfg.noise_var);
  s.bo.history.repetition = rep;
  s.bo.history.policy = cfg.policy;
  write_checkpoint(state_path, s);
}

void ask(const std::filesystem::path& state_path, std::ostream& proposals) {
  RunState s = read_checkpoint(state_path);
  if (s.pending) throw ProtocolError("a batch is already pending; tell its observations first");
  PendingBatch pb;
  if (!s.seeded) {
    pb.seed_phase = true;
    pb.proposal.batch.points = seed_design(s.config, s.repetition);
    for (Index i = 0; i < pb.proposal.batch.points.rows(); ++i) pb.ids.push_back("seed-" + std::to_string(i));
  } else {
    const Index remaining = s.config.budget - s.bo.data.size();
    if (remaining <= 0) throw ProtocolError("evaluation budget exhausted");
    pb.proposal = propose_batch(s.bo, qpots_options(s.config), std::min(s.config.q, remaining));
    for (Index j = 0; j < pb.proposal.batch.points.rows(); ++j) {
      pb.ids.push_back("it" + std::to_string(s.bo.iteration + 1) + "-" + std::to_string(j));
    }
  }
  const MatrixXd& P = pb.proposal.batch.points;
  for (Index i = 0; i < P.rows(); ++i) {
    json line;
    line["id"] = pb.ids[static_cast<std::size_t>(i)];
    std::vector<double> x(static_cast<std::size_t>(P.cols()));
    for (Index j = 0; j < P.cols(); ++j) x[static_cast<std::size_t>(j)] = P(i, j);
    line["x"] = x;
    proposals << line.dump() << "\n";
  }
  proposals.flush();
  s.pending = std::move(pb);
  write_checkpoint(state_path, s);
}

void tell(const std::filesystem::path& state_path, std::istream& observations) {
  RunState s = read_checkpoint(state_path);
  if (!s.pending) throw ProtocolError("no pending batch: tell without a preceding ask, or a duplicate tell");
  const PendingBatch& pb = *s.pending;
  const Index K = s.config.K;
  const auto n = static_cast<Index>(pb.ids.size());
  MatrixXd Y = MatrixXd::Constant(n, K, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(static_cast<std::size_t>(n), 0);

  std::string line;
  int lineno = 0;
  while (std::getline(observations, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw ProtocolError("observation line " + std::to_string(lineno) + " is not valid JSON");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw ProtocolError("observation line " + std::to_string(lineno) + " lacks a string \"id\"");
    }
    const std::string id = j["id"].get<std::string>();
    const auto it = std::find(pb.ids.begin(), pb.ids.end(), id);
    if (it == pb.ids.end()) throw ProtocolError("observation id '" + id + "' does not match the pending batch");
    const auto row = static_cast<std::size_t>(it - pb.ids.begin());
    if (seen[row]) throw ProtocolError("observation id '" + id + "' given twice");
    seen[row] = 1;
    const bool failed = j.contains("failed") && j["failed"].is_boolean() && j["failed"].get<bool>();
    if (failed) continue;
    if (!j.contains("y") || !j["y"].is_array() || static_cast<Index>(j["y"].size()) != K) {
      throw ProtocolError("observation '" + id + "' needs \"y\" with " + std::to_string(K) + " numbers");
    }
    for (Index k = 0; k < K; ++k) {
      const json& v = j["y"][static_cast<std::size_t>(k)];
      if (!v.is_number()) throw ProtocolError("observation '" + id + "' has a non-numeric y entry");
      Y(static_cast<Index>(row), k) = v.get<double>();
    }
  }
  for (Index i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      throw ProtocolError("missing observation for id '" + pb.ids[static_cast<std::size_t>(i)] + "'");
    }
  }

  if (pb.seed_phase) {
    RunState next = seeded_state(s.config, s.repetition, pb.proposal.batch.points, Y);
    s = std::move(next);
  } else {
    const Proposal proposal = pb.proposal;
    s.pending.reset();
    incorporate(s.bo, proposal, Y, qpots_options(s.config));
  }
  s.pending.reset();
  write_checkpoint(state_path, s);
}

}  // namespace qpots
