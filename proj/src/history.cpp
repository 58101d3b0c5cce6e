#include "qpots/history.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace qpots {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_rows(std::ofstream& out, const MatrixXd& X, const MatrixXd& Y) {
  for (Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << "x" << j + 1;
  for (Index k = 0; k < Y.cols(); ++k) out << (X.cols() + k ? "," : "") << "y" << k + 1;
  out << "\n";
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) out << (j ? "," : "") << format_double(X(i, j));
    for (Index k = 0; k < Y.cols(); ++k) out << (X.cols() + k ? "," : "") << format_double(Y(i, k));
    out << "\n";
  }
}

nlohmann::json matrix_json(const MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    nlohmann::json r = nlohmann::json::array();
    for (Index j = 0; j < M.cols(); ++j) {
      if (std::isfinite(M(i, j))) r.push_back(M(i, j));
      else r.push_back(nullptr);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

void write_history_csv(const std::filesystem::path& path, const std::vector<RunHistory>& runs) {
  auto out = open_out(path);
  out << "rep,iter,evals,hv,wallclock_s\n";
  for (const auto& run : runs) {
    for (const auto& r : run.records) {
      out << run.repetition << "," << r.iteration << "," << r.evaluations << "," << format_double(r.hv) << ","
          << format_double(r.wallclock_s) << "\n";
    }
  }
}

void write_events_jsonl(const std::filesystem::path& path, const RunHistory& run) {
  auto out = open_out(path);
  for (const auto& r : run.records) {
    nlohmann::json j;
    j["rep"] = run.repetition;
    j["policy"] = run.policy;
    j["iter"] = r.iteration;
    j["evals"] = r.evaluations;
    j["hv"] = r.hv;
    j["batch_x"] = matrix_json(r.batch_X);
    j["batch_y"] = matrix_json(r.batch_Y);
    j["xstar_index"] = r.xstar_index;
    j["maximin_distance"] = std::vector<double>(r.maximin_distance.data(),
                                                r.maximin_distance.data() + r.maximin_distance.size());
    j["xstar_size"] = r.xstar_size;
    j["wallclock_s"] = r.wallclock_s;
    out << j.dump() << "\n";
  }
}

void write_archive_csv(const std::filesystem::path& path, const ParetoArchive& archive) {
  auto out = open_out(path);
  write_rows(out, archive.X, archive.Y);
}

void write_observations_csv(const std::filesystem::path& path, const MatrixXd& X, const MatrixXd& Y) {
  auto out = open_out(path);
  write_rows(out, X, Y);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunHistory>& runs) {
  struct Acc {
    Index evals = 0;
    std::vector<double> hv;
  };
  std::map<Index, Acc> by_iter;
  for (const auto& run : runs) {
    for (const auto& r : run.records) {
      auto& a = by_iter[r.iteration];
      a.evals = std::max(a.evals, r.evaluations);
      a.hv.push_back(r.hv);
    }
  }
  auto out = open_out(path);
  out << "iter,evals,hv_mean,hv_std,n_reps\n";
  for (const auto& [iter, a] : by_iter) {
    double mean = 0.0;
    for (double v : a.hv) mean += v;
    mean /= static_cast<double>(a.hv.size());
    double var = 0.0;
    for (double v : a.hv) var += (v - mean) * (v - mean);
    var /= static_cast<double>(a.hv.size());
    out << iter << "," << a.evals << "," << format_double(mean) << "," << format_double(std::sqrt(var)) << ","
        << a.hv.size() << "\n";
  }
}

ParetoArchive read_archive_csv(const std::filesystem::path& path, Index K) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto cols = static_cast<Index>(header.size());
  if (K <= 0) {
    K = 0;
    for (const auto& h : header) K += (!h.empty() && h[0] == 'y') ? 1 : 0;
  }
  if (K < 1 || K > cols) throw std::runtime_error(path.string() + ": cannot determine objective columns");
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> r;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      r.push_back(v);
    }
    if (static_cast<Index>(r.size()) != cols) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong column count");
    }
    rows.push_back(std::move(r));
  }
  ParetoArchive a;
  const auto n = static_cast<Index>(rows.size());
  a.X.resize(n, cols - K);
  a.Y.resize(n, K);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const double v = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (j < cols - K) a.X(i, j) = v;
      else a.Y(i, j - (cols - K)) = v;
    }
  }
  return a;
}

}  // namespace qpots
