#pragma once

#include <algorithm>
#include <istream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "upir/protocol.hpp"
#include "upir/version.hpp"

namespace upir {

/// JSON-lines trace: a params record, then every post/forward event merged
/// in event order. Emission is byte-deterministic for a given trace.
inline std::string trace_to_jsonl(const SimulationTrace& trace) {
  std::ostringstream out;
  nlohmann::json params{
      {"type", "params"},
      {"version", std::string(kVersion)},
      {"protocol", to_string(trace.params.protocol)},
      {"self_submission", trace.params.self_submission},
      {"steps", trace.params.steps},
      {"seed", trace.params.seed},
      {"cfg",
       {{"v", trace.params.v},
        {"b", trace.params.b},
        {"r", trace.params.r},
        {"k", trace.params.k}}},
  };
  out << params.dump() << '\n';

  std::size_t ti = 0;
  std::size_t si = 0;
  while (ti < trace.truth_log.size() || si < trace.server_log.size()) {
    const bool take_truth =
        si == trace.server_log.size() ||
        (ti < trace.truth_log.size() &&
         trace.truth_log[ti].seq < trace.server_log[si].seq);
    if (take_truth) {
      const auto& rec = trace.truth_log[ti++];
      out << nlohmann::json{{"type", "post"},
                            {"seq", rec.seq},
                            {"step", rec.step},
                            {"owner", rec.owner},
                            {"query", rec.query_id},
                            {"line", rec.line}}
                 .dump()
          << '\n';
    } else {
      const auto& rec = trace.server_log[si++];
      out << nlohmann::json{{"type", "forward"},
                            {"seq", rec.seq},
                            {"step", rec.step},
                            {"proxy", rec.proxy},
                            {"query", rec.query_id},
                            {"line", rec.line}}
                 .dump()
          << '\n';
    }
  }
  return out.str();
}

inline SimulationTrace trace_from_jsonl(std::istream& in) {
  SimulationTrace trace;
  std::string line;
  bool have_params = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "params") {
      trace.params.protocol = j.at("protocol").get<std::string>() == "upir2"
                                  ? Protocol::Upir2
                                  : Protocol::Upir1;
      trace.params.self_submission = j.at("self_submission").get<double>();
      trace.params.steps = j.at("steps").get<std::uint32_t>();
      trace.params.seed = j.at("seed").get<std::uint64_t>();
      const auto& cfg = j.at("cfg");
      trace.params.v = cfg.at("v").get<Point>();
      trace.params.b = cfg.at("b").get<std::uint32_t>();
      trace.params.r = cfg.at("r").get<std::uint32_t>();
      trace.params.k = cfg.at("k").get<std::uint32_t>();
      have_params = true;
    } else if (type == "post") {
      trace.truth_log.push_back({j.at("seq").get<std::uint64_t>(),
                                 j.at("step").get<std::uint32_t>(),
                                 j.at("owner").get<Point>(),
                                 j.at("query").get<std::string>(),
                                 j.at("line").get<LineIndex>()});
    } else if (type == "forward") {
      trace.server_log.push_back({j.at("seq").get<std::uint64_t>(),
                                  j.at("step").get<std::uint32_t>(),
                                  j.at("proxy").get<Point>(),
                                  j.at("query").get<std::string>(),
                                  j.at("line").get<LineIndex>()});
    } else {
      throw std::runtime_error("trace line " + std::to_string(line_no) +
                               ": unknown record type '" + type + "'");
    }
  }
  if (!have_params) throw std::runtime_error("trace has no params record");
  return trace;
}

inline SimulationTrace trace_from_jsonl(const std::string& text) {
  std::istringstream in(text);
  return trace_from_jsonl(in);
}

/// Per-owner proxy counts of every owner with at least one forwarded query,
/// as CSV rows (owner, proxy, count) sorted by owner then proxy.
inline std::string proxy_summary_csv(const SimulationTrace& trace) {
  std::map<Point, ProxyDistribution> dists;
  std::map<std::string, Point> owner_by_query;
  for (const auto& rec : trace.truth_log) {
    owner_by_query.emplace(rec.query_id, rec.owner);
  }
  for (const auto& rec : trace.server_log) {
    auto it = owner_by_query.find(rec.query_id);
    if (it == owner_by_query.end()) continue;
    auto& dist = dists[it->second];
    ++dist.counts[rec.proxy];
    ++dist.total;
  }
  std::ostringstream out;
  out << "# upir-lab " << kVersion << " seed=" << trace.params.seed << '\n';
  out << "owner,proxy,count\n";
  for (const auto& [owner, dist] : dists) {
    for (const auto& [proxy, count] : dist.counts) {
      out << owner << ',' << proxy << ',' << count << '\n';
    }
  }
  return out.str();
}

}  // namespace upir
