#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "submodes/engine.hpp"
#include "submodes/runner/config.hpp"

namespace submodes {

inline constexpr int kMetricsVersion = 1;
inline constexpr int kSnapshotVersion = 1;

//! Shortest round-trip text for a double, identical across runs.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json event_json(const Event& e, const std::string& phase, int episode) {
  return {{"t", e.t},       {"kind", event_name(e.kind)}, {"from", e.from},     {"to", e.to},
          {"e", e.e},       {"e_mean", e.mean},           {"e_sd", e.sd},       {"phase", phase},
          {"episode", episode}};
}

inline void write_step_header(std::ostream& os) {
  os << "# submodes steps v" << kMetricsVersion << "\n";
  os << "t,active_id,e,e_mean,threshold,mode,searching\n";
}

inline void write_step_row(std::ostream& os, const StepInfo& s) {
  os << s.t << ',' << s.active << ',' << fmt(s.e) << ',' << fmt(s.mean) << ',' << fmt(s.threshold) << ','
     << mode_name(s.mode) << ',' << (s.searching ? 1 : 0) << '\n';
}

inline void write_trajectory_header(std::ostream& os) {
  os << "# submodes trajectory v" << kMetricsVersion << "\n";
  os << "t,x,y,alpha,v,zone,active_id\n";
}

inline json net_json(const LinearNet& n) {
  return {{"head", head_name(n.head())},
          {"learning_rate", n.params().learning_rate},
          {"l1", n.params().l1},
          {"W", detail::write_matrix(n.weights())},
          {"b", detail::write_vector(n.bias())}};
}

//! Learned state with weights inline; replay buffers are not stored.
inline json snapshot_json(const Engine& eng, const ExperimentConfig& cfg) {
  const BehaviorGraph& g = eng.graph();
  json j;
  j["version"] = kSnapshotVersion;
  j["config"] = config_to_json(cfg);
  j["active"] = eng.active();
  json models = json::array();
  for (int i = 0; i < g.size(); ++i) {
    models.push_back({{"id", g.models[i].id},
                      {"created_at", g.models[i].created_at},
                      {"net", net_json(g.models[i].net)},
                      {"error_mean", g.errors[i].mean},
                      {"error_var", g.errors[i].var}});
  }
  j["models"] = models;
  json edges = json::array();
  for (const auto& [key, tm] : g.edges) {
    if (tm.count == 0 && tm.prob.buffer().empty()) continue;
    edges.push_back({{"from", tm.from},
                     {"to", tm.to},
                     {"count", tm.count},
                     {"duration_sum", tm.duration_sum},
                     {"probability", net_json(tm.prob)},
                     {"effect", net_json(tm.effect)}});
  }
  j["transitions"] = edges;
  j["dep"] = {{"C", detail::write_matrix(eng.dep().correlation())},
              {"W", detail::write_matrix(eng.dep().weights())},
              {"h", detail::write_vector(eng.dep().bias())}};
  return j;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error(path + ": cannot open for writing");
  return os;
}

}  // namespace submodes
