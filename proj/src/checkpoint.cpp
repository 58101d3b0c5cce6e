#include "qpots/checkpoint.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace qpots {

using nlohmann::json;

namespace {

json vec_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i])) a.push_back(v[i]);
    else a.push_back(nullptr);
  }
  return a;
}

json mat_json(const MatrixXd& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) rows.push_back(vec_json(M.row(i).transpose()));
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", rows}};
}

VectorXd json_vec(const json& a) {
  VectorXd v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v[static_cast<Index>(i)] = a[i].is_null() ? std::numeric_limits<double>::quiet_NaN() : a[i].get<double>();
  }
  return v;
}

MatrixXd json_mat(const json& j) {
  MatrixXd M(j.at("rows").get<Index>(), j.at("cols").get<Index>());
  const json& rows = j.at("data");
  if (static_cast<Index>(rows.size()) != M.rows()) throw CheckpointError("checkpoint: matrix row count mismatch");
  for (Index i = 0; i < M.rows(); ++i) {
    const VectorXd r = json_vec(rows[static_cast<std::size_t>(i)]);
    if (r.size() != M.cols()) throw CheckpointError("checkpoint: matrix column count mismatch");
    M.row(i) = r.transpose();
  }
  return M;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json proposal_json(const Proposal& p) {
  return json{{"points", mat_json(p.batch.points)},
              {"xstar_index", p.batch.xstar_index},
              {"distance", vec_json(p.batch.distance)},
              {"xstar_size", p.xstar_size},
              {"seconds", p.seconds}};
}

Proposal json_proposal(const json& j) {
  Proposal p;
  p.batch.points = json_mat(j.at("points"));
  p.batch.xstar_index = j.at("xstar_index").get<std::vector<Index>>();
  p.batch.distance = json_vec(j.at("distance"));
  p.xstar_size = j.at("xstar_size").get<Index>();
  p.seconds = j.at("seconds").get<double>();
  return p;
}

}  // namespace

bool policy_uses_models(const std::string& policy) { return policy != "sobol"; }

std::string checkpoint_text(const RunState& s) {
  const BOState& bo = s.bo;
  json payload;
  payload["config"] = serialize_config(s.config);
  payload["repetition"] = s.repetition;
  payload["seeded"] = s.seeded;
  payload["seed"] = bo.seed;
  payload["iteration"] = bo.iteration;
  payload["ref_point"] = vec_json(bo.ref_point);
  payload["noise_var"] = bo.data.noise_var;
  payload["noise_override"] = vec_json(bo.data.noise_override);
  payload["X"] = mat_json(bo.data.X);
  payload["Y"] = mat_json(bo.data.Y);
  json hypers = json::array();
  for (const auto& h : bo.hypers) {
    hypers.push_back(
        json{{"lengthscales", vec_json(h.lengthscales)}, {"signal_var", h.signal_var}, {"noise_var", h.noise_var}});
  }
  payload["hypers"] = hypers;
  json records = json::array();
  for (const auto& r : bo.history.records) {
    records.push_back(json{{"iteration", r.iteration},
                           {"evaluations", r.evaluations},
                           {"hv", r.hv},
                           {"batch_X", mat_json(r.batch_X)},
                           {"batch_Y", mat_json(r.batch_Y)},
                           {"xstar_index", r.xstar_index},
                           {"maximin_distance", vec_json(r.maximin_distance)},
                           {"xstar_size", r.xstar_size},
                           {"wallclock_s", r.wallclock_s}});
  }
  payload["history"] = records;
  if (s.pending) {
    payload["pending"] = json{{"ids", s.pending->ids},
                              {"seed_phase", s.pending->seed_phase},
                              {"proposal", proposal_json(s.pending->proposal)}};
  } else {
    payload["pending"] = nullptr;
  }
  const std::string body = payload.dump();
  json doc;
  doc["format"] = "qpots-state";
  doc["version"] = kCheckpointVersion;
  doc["checksum"] = hex64(hash_tag(body));
  doc["payload"] = payload;
  return doc.dump(1) + "\n";
}

RunState parse_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  RunState s;
  try {
    if (doc.value("format", std::string()) != "qpots-state") throw CheckpointError("not a qpots state file");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    const json& payload = doc.at("payload");
    if (hex64(hash_tag(payload.dump())) != doc.at("checksum").get<std::string>()) {
      throw CheckpointError("checkpoint checksum mismatch (file corrupted or edited)");
    }
    s.config = parse_config(payload.at("config").get<std::string>());
    s.repetition = payload.at("repetition").get<Index>();
    s.seeded = payload.at("seeded").get<bool>();
    BOState& bo = s.bo;
    bo.seed = payload.at("seed").get<std::uint64_t>();
    bo.iteration = payload.at("iteration").get<Index>();
    bo.ref_point = json_vec(payload.at("ref_point"));
    bo.data.space = s.config.space();
    bo.data.noise_var = payload.at("noise_var").get<double>();
    bo.data.noise_override = json_vec(payload.at("noise_override"));
    bo.data.X = json_mat(payload.at("X"));
    bo.data.Y = json_mat(payload.at("Y"));
    bo.data.validate();
    for (const auto& h : payload.at("hypers")) {
      GPHyperparams g;
      g.lengthscales = json_vec(h.at("lengthscales"));
      g.signal_var = h.at("signal_var").get<double>();
      g.noise_var = h.at("noise_var").get<double>();
      bo.hypers.push_back(g);
    }
    bo.history.ref_point = bo.ref_point;
    bo.history.repetition = s.repetition;
    bo.history.policy = s.config.policy;
    for (const auto& r : payload.at("history")) {
      IterationRecord rec;
      rec.iteration = r.at("iteration").get<Index>();
      rec.evaluations = r.at("evaluations").get<Index>();
      rec.hv = r.at("hv").get<double>();
      rec.batch_X = json_mat(r.at("batch_X"));
      rec.batch_Y = json_mat(r.at("batch_Y"));
      rec.xstar_index = r.at("xstar_index").get<std::vector<Index>>();
      rec.maximin_distance = json_vec(r.at("maximin_distance"));
      rec.xstar_size = r.at("xstar_size").get<Index>();
      rec.wallclock_s = r.at("wallclock_s").get<double>();
      bo.history.records.push_back(std::move(rec));
    }
    if (!payload.at("pending").is_null()) {
      const json& p = payload.at("pending");
      PendingBatch pb;
      pb.ids = p.at("ids").get<std::vector<std::string>>();
      pb.seed_phase = p.at("seed_phase").get<bool>();
      pb.proposal = json_proposal(p.at("proposal"));
      s.pending = std::move(pb);
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint is missing fields: ") + e.what());
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint holds an invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("checkpoint holds invalid data: ") + e.what());
  }
  if (s.seeded && policy_uses_models(s.config.policy) && !s.bo.hypers.empty()) {
    condition_models(s.bo, qpots_options(s.config));
  }
  return s;
}

void write_checkpoint(const std::filesystem::path& path, const RunState& state) {
  const std::string text = checkpoint_text(state);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out << text;
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace qpots
