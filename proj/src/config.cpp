#include "qpots/config.hpp"

#include "qpots/benchmarks.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace qpots {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw ConfigError("config key '" + key + "': " + why);
}

long long parse_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) bad(key, "expected a nonnegative integer, got '" + v + "'");
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  if (v.empty()) bad(key, "expected a number");
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(out)) {
    bad(key, "expected a finite number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, "expected true/false, got '" + v + "'");
}

VectorXd parse_vector(const std::string& key, const std::string& v) {
  std::vector<double> vals;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) vals.push_back(parse_real(key, trim(item)));
  if (vals.empty()) bad(key, "expected a comma-separated list");
  return Eigen::Map<VectorXd>(vals.data(), static_cast<Index>(vals.size()));
}

std::string join(const VectorXd& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

bool vec_eq(const VectorXd& a, const VectorXd& b) {
  return a.size() == b.size() && (a.size() == 0 || a == b);
}

const std::vector<std::string> kKeys = {
    "benchmark",     "policy",        "d",
    "K",             "lower",         "upper",
    "n_seed",        "budget",        "q",
    "noise_var",     "learn_noise",   "pop_size",
    "generations",   "crossover_prob", "crossover_eta",
    "mutation_prob", "mutation_eta",  "archive_all",
    "inject_incumbents", "ref_point", "repetitions",
    "base_seed",     "nystrom",       "nystrom_threshold",
    "path_mode",     "refit_every",   "fit_starts",
    "refit_starts",
    "fit_max_iter",  "maximin_space", "sobol_shift",
    "output_dir",
};

}  // namespace

std::vector<std::string> policy_names() { return {"qpots", "sobol", "scalarized-ts"}; }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.benchmark == b.benchmark && a.policy == b.policy && a.d == b.d && a.K == b.K && vec_eq(a.lower, b.lower) &&
         vec_eq(a.upper, b.upper) && a.n_seed == b.n_seed && a.budget == b.budget && a.q == b.q &&
         a.noise_var == b.noise_var && a.learn_noise == b.learn_noise && a.ea.pop_size == b.ea.pop_size &&
         a.ea.generations == b.ea.generations && a.ea.crossover_prob == b.ea.crossover_prob &&
         a.ea.crossover_eta == b.ea.crossover_eta && a.ea.mutation_prob == b.ea.mutation_prob &&
         a.ea.mutation_eta == b.ea.mutation_eta && a.ea.archive_all == b.ea.archive_all &&
         a.ea.inject_incumbents == b.ea.inject_incumbents && vec_eq(a.ref_point, b.ref_point) &&
         a.repetitions == b.repetitions && a.base_seed == b.base_seed && a.nystrom == b.nystrom &&
         a.nystrom_threshold == b.nystrom_threshold && a.path_mode == b.path_mode && a.refit_every == b.refit_every &&
         a.fit_starts == b.fit_starts && a.refit_starts == b.refit_starts && a.fit_max_iter == b.fit_max_iter &&
         a.maximin_space == b.maximin_space && a.sobol_shift == b.sobol_shift && a.output_dir == b.output_dir;
}

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) bad(key, "unknown key");
    if (!kv.emplace(key, val).second) bad(key, "given more than once");
  }
  auto has = [&](const char* k) { return kv.count(k) > 0; };
  auto get = [&](const char* k) { return kv.at(k); };

  ExperimentConfig c;
  if (!has("benchmark")) bad("benchmark", "required");
  c.benchmark = get("benchmark");
  if (has("policy")) c.policy = get("policy");
  if (const auto names = policy_names(); std::find(names.begin(), names.end(), c.policy) == names.end()) {
    bad("policy", "unknown policy '" + c.policy + "'");
  }

  if (c.external()) {
    if (!has("d") || !has("K")) bad(has("d") ? "K" : "d", "required for external oracles");
    c.d = parse_int("d", get("d"));
    c.K = parse_int("K", get("K"));
    if (c.d < 1) bad("d", "must be >= 1");
    if (c.K < 1) bad("K", "must be >= 1");
    c.lower = has("lower") ? parse_vector("lower", get("lower")) : VectorXd::Zero(c.d);
    c.upper = has("upper") ? parse_vector("upper", get("upper")) : VectorXd::Ones(c.d);
    if (c.lower.size() != c.d) bad("lower", "length must equal d");
    if (c.upper.size() != c.d) bad("upper", "length must equal d");
    if ((c.lower.array() >= c.upper.array()).any()) bad("upper", "must exceed lower componentwise");
  } else {
    Benchmark b;
    try {
      b = make_benchmark(c.benchmark, has("K") ? parse_int("K", get("K")) : 0);
    } catch (const ConfigError& e) {
      bad(has("K") && std::string(e.what()).find("K must") != std::string::npos ? "K" : "benchmark", e.what());
    }
    c.d = b.d;
    c.K = b.K;
    if (has("d") && parse_int("d", get("d")) != b.d) bad("d", "does not match benchmark " + c.benchmark);
    if (has("lower") || has("upper")) bad(has("lower") ? "lower" : "upper", "benchmarks use the unit cube");
    c.lower = b.space.lower;
    c.upper = b.space.upper;
    c.ref_point = b.ref_point;
  }

  c.n_seed = has("n_seed") ? parse_int("n_seed", get("n_seed")) : 10 * c.d;
  if (c.n_seed < 2) bad("n_seed", "must be >= 2");
  c.budget = has("budget") ? parse_int("budget", get("budget")) : c.n_seed + 100;
  if (c.budget < c.n_seed) bad("budget", "must be >= n_seed");
  if (has("q")) c.q = parse_int("q", get("q"));
  if (c.q < 1) bad("q", "must be >= 1");
  if (has("noise_var")) c.noise_var = parse_real("noise_var", get("noise_var"));
  if (c.noise_var < 0.0) bad("noise_var", "must be >= 0");
  if (has("learn_noise")) c.learn_noise = parse_bool("learn_noise", get("learn_noise"));

  c.ea.pop_size = has("pop_size") ? parse_int("pop_size", get("pop_size")) : 100 * c.d;
  if (c.ea.pop_size < 2 || c.ea.pop_size % 2 != 0) bad("pop_size", "must be even and >= 2");
  if (has("generations")) c.ea.generations = static_cast<int>(parse_int("generations", get("generations")));
  if (c.ea.generations < 1) bad("generations", "must be >= 1");
  if (has("crossover_prob")) c.ea.crossover_prob = parse_real("crossover_prob", get("crossover_prob"));
  if (c.ea.crossover_prob < 0.0 || c.ea.crossover_prob > 1.0) bad("crossover_prob", "must lie in [0,1]");
  if (has("crossover_eta")) c.ea.crossover_eta = parse_real("crossover_eta", get("crossover_eta"));
  if (c.ea.crossover_eta <= 0.0) bad("crossover_eta", "must be positive");
  c.ea.mutation_prob = has("mutation_prob") ? parse_real("mutation_prob", get("mutation_prob"))
                                            : 1.0 / static_cast<double>(c.d);
  if (c.ea.mutation_prob < 0.0 || c.ea.mutation_prob > 1.0) bad("mutation_prob", "must lie in [0,1]");
  if (has("mutation_eta")) c.ea.mutation_eta = parse_real("mutation_eta", get("mutation_eta"));
  if (c.ea.mutation_eta <= 0.0) bad("mutation_eta", "must be positive");
  if (has("archive_all")) c.ea.archive_all = parse_bool("archive_all", get("archive_all"));
  if (has("inject_incumbents")) c.ea.inject_incumbents = parse_bool("inject_incumbents", get("inject_incumbents"));

  if (has("ref_point") && get("ref_point") != "auto") {
    c.ref_point = parse_vector("ref_point", get("ref_point"));
    if (c.ref_point.size() != c.K) bad("ref_point", "length must equal K");
  }
  if (has("repetitions")) c.repetitions = parse_int("repetitions", get("repetitions"));
  if (c.repetitions < 1) bad("repetitions", "must be >= 1");
  if (has("base_seed")) c.base_seed = parse_u64("base_seed", get("base_seed"));

  if (has("nystrom")) {
    const auto v = get("nystrom");
    if (v == "auto") c.nystrom = NystromPolicy::Auto;
    else if (v == "on") c.nystrom = NystromPolicy::On;
    else if (v == "off") c.nystrom = NystromPolicy::Off;
    else bad("nystrom", "expected auto|on|off");
  }
  if (has("nystrom_threshold")) c.nystrom_threshold = parse_int("nystrom_threshold", get("nystrom_threshold"));
  if (c.nystrom_threshold < 1) bad("nystrom_threshold", "must be >= 1");
  if (has("path_mode")) {
    const auto v = get("path_mode");
    if (v == "consistent") c.path_mode = PathMode::Consistent;
    else if (v == "per-generation") c.path_mode = PathMode::PerGeneration;
    else bad("path_mode", "expected consistent|per-generation");
  }
  if (has("refit_every")) c.refit_every = static_cast<int>(parse_int("refit_every", get("refit_every")));
  if (c.refit_every < 1) bad("refit_every", "must be >= 1");
  if (has("fit_starts")) c.fit_starts = static_cast<int>(parse_int("fit_starts", get("fit_starts")));
  if (c.fit_starts < 1) bad("fit_starts", "must be >= 1");
  if (has("refit_starts")) c.refit_starts = static_cast<int>(parse_int("refit_starts", get("refit_starts")));
  if (c.refit_starts < 0) bad("refit_starts", "must be >= 0");
  if (has("fit_max_iter")) c.fit_max_iter = static_cast<int>(parse_int("fit_max_iter", get("fit_max_iter")));
  if (c.fit_max_iter < 1) bad("fit_max_iter", "must be >= 1");
  if (has("maximin_space")) {
    const auto v = get("maximin_space");
    if (v == "unit") c.maximin_space = MaximinSpace::Unit;
    else if (v == "raw") c.maximin_space = MaximinSpace::Raw;
    else bad("maximin_space", "expected unit|raw");
  }
  if (has("sobol_shift")) c.sobol_shift = parse_bool("sobol_shift", get("sobol_shift"));
  if (has("output_dir")) c.output_dir = get("output_dir");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "benchmark = " << c.benchmark << "\n";
  o << "policy = " << c.policy << "\n";
  o << "d = " << c.d << "\n";
  o << "K = " << c.K << "\n";
  if (c.external()) {
    o << "lower = " << join(c.lower) << "\n";
    o << "upper = " << join(c.upper) << "\n";
  }
  o << "n_seed = " << c.n_seed << "\n";
  o << "budget = " << c.budget << "\n";
  o << "q = " << c.q << "\n";
  o << "noise_var = " << format_double(c.noise_var) << "\n";
  o << "learn_noise = " << (c.learn_noise ? "true" : "false") << "\n";
  o << "pop_size = " << c.ea.pop_size << "\n";
  o << "generations = " << c.ea.generations << "\n";
  o << "crossover_prob = " << format_double(c.ea.crossover_prob) << "\n";
  o << "crossover_eta = " << format_double(c.ea.crossover_eta) << "\n";
  o << "mutation_prob = " << format_double(c.ea.mutation_prob) << "\n";
  o << "mutation_eta = " << format_double(c.ea.mutation_eta) << "\n";
  o << "archive_all = " << (c.ea.archive_all ? "true" : "false") << "\n";
  o << "inject_incumbents = " << (c.ea.inject_incumbents ? "true" : "false") << "\n";
  o << "ref_point = " << (c.ref_point.size() ? join(c.ref_point) : std::string("auto")) << "\n";
  o << "repetitions = " << c.repetitions << "\n";
  o << "base_seed = " << c.base_seed << "\n";
  o << "nystrom = "
    << (c.nystrom == NystromPolicy::Auto ? "auto" : c.nystrom == NystromPolicy::On ? "on" : "off") << "\n";
  o << "nystrom_threshold = " << c.nystrom_threshold << "\n";
  o << "path_mode = " << (c.path_mode == PathMode::Consistent ? "consistent" : "per-generation") << "\n";
  o << "refit_every = " << c.refit_every << "\n";
  o << "fit_starts = " << c.fit_starts << "\n";
  o << "refit_starts = " << c.refit_starts << "\n";
  o << "fit_max_iter = " << c.fit_max_iter << "\n";
  o << "maximin_space = " << (c.maximin_space == MaximinSpace::Unit ? "unit" : "raw") << "\n";
  o << "sobol_shift = " << (c.sobol_shift ? "true" : "false") << "\n";
  if (!c.output_dir.empty()) o << "output_dir = " << c.output_dir << "\n";
  return o.str();
}

QpotsOptions qpots_options(const ExperimentConfig& c) {
  QpotsOptions o;
  o.q = c.q;
  o.ea = c.ea;
  o.path.mode = c.path_mode;
  o.path.nystrom = c.nystrom;
  o.path.nystrom_threshold = c.nystrom_threshold;
  o.fit.n_starts = c.fit_starts;
  o.fit.max_iter = c.fit_max_iter;
  o.fit.learn_noise = c.learn_noise;
  o.refit_every = c.refit_every;
  o.refit_starts = c.refit_starts;
  o.maximin_space = c.maximin_space;
  o.budget = c.budget;
  return o;
}

}  // namespace qpots
