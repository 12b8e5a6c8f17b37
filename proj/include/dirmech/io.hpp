#pragma once

// JSON and CSV for instances and reports. Doubles are written with 17
// significant digits so they round-trip.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dirmech/certify.hpp"
#include "dirmech/error.hpp"
#include "dirmech/online.hpp"
#include "dirmech/rounding.hpp"
#include "dirmech/scheduling.hpp"

namespace dirmech::io {

using Json = nlohmann::ordered_json;

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Reads a whole file, or stdin for "-".
inline std::string read_text(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError({"cannot open " + path});
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Json parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({std::string("malformed JSON: ") + e.what()});
  }
}

namespace detail {

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError({where + ": missing field \"" + key + "\""});
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError({where + ": field \"" + key + "\" has the wrong type"});
  }
}

inline std::map<std::string, std::size_t> index_of(const std::vector<std::string>& names) {
  std::map<std::string, std::size_t> m;
  for (std::size_t i = 0; i < names.size(); ++i) m.emplace(names[i], i);
  return m;
}

// JSON writer that keeps 17 significant digits for every double.
inline void write_value(std::ostream& os, const Json& j, int indent, int level);

inline void newline(std::ostream& os, int indent, int level) {
  if (indent < 0) return;
  os << '\n' << std::string(static_cast<std::size_t>(indent * level), ' ');
}

inline void write_value(std::ostream& os, const Json& j, int indent, int level) {
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        os << fmt(v);
      } else {
        os << "null";
      }
      break;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        newline(os, indent, level + 1);
        os << Json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        write_value(os, it.value(), indent, level + 1);
      }
      newline(os, indent, level);
      os << '}';
      break;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      // Short numeric arrays stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",");
        first = false;
        if (!flat) newline(os, indent, level + 1);
        write_value(os, e, indent, level + 1);
      }
      if (!flat) newline(os, indent, level);
      os << ']';
      break;
    }
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline std::string dump(const Json& j, int indent = 2) {
  std::ostringstream os;
  detail::write_value(os, j, indent, 0);
  return os.str();
}

// ---- BipartiteInstance ----

inline BipartiteInstance bipartite_from_json(const Json& j) {
  BipartiteInstance inst;
  inst.left = detail::get<std::vector<std::string>>(j, "left", "instance");
  inst.right = detail::get<std::vector<std::string>>(j, "right", "instance");
  const auto L = detail::index_of(inst.left), R = detail::index_of(inst.right);
  const Json edges = detail::get<Json>(j, "edges", "instance");
  if (!edges.is_array()) throw ValidationError({"instance: \"edges\" must be an array"});
  std::vector<std::string> bad;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const std::string where = "edge " + std::to_string(e);
    const auto u = detail::get<std::string>(edges[e], "u", where);
    const auto v = detail::get<std::string>(edges[e], "v", where);
    const auto x = detail::get<double>(edges[e], "x", where);
    const auto rho = detail::get<double>(edges[e], "rho", where);
    const auto iu = L.find(u);
    const auto iv = R.find(v);
    if (iu == L.end()) bad.push_back(where + " references undeclared left node " + u);
    if (iv == R.end()) bad.push_back(where + " references undeclared right node " + v);
    if (iu != L.end() && iv != R.end()) inst.edges.push_back({iu->second, iv->second, x, rho});
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return inst;
}

inline Json to_json(const BipartiteInstance& inst) {
  Json j;
  j["left"] = inst.left;
  j["right"] = inst.right;
  j["edges"] = Json::array();
  for (const auto& e : inst.edges) {
    j["edges"].push_back({{"u", inst.left.at(e.u)}, {"v", inst.right.at(e.v)}, {"x", e.x}, {"rho", e.rho}});
  }
  return j;
}

// ---- MatchingStream ----

inline MatchingStream stream_from_json(const Json& j) {
  MatchingStream s;
  s.offline = detail::get<std::vector<std::string>>(j, "offline", "stream");
  const auto U = detail::index_of(s.offline);
  const Json arrivals = detail::get<Json>(j, "arrivals", "stream");
  if (!arrivals.is_array()) throw ValidationError({"stream: \"arrivals\" must be an array"});
  std::vector<std::string> bad;
  for (std::size_t a = 0; a < arrivals.size(); ++a) {
    const std::string where = "arrival " + std::to_string(a);
    Arrival arr;
    arr.v = detail::get<std::string>(arrivals[a], "v", where);
    const Json g = detail::get<Json>(arrivals[a], "g", where);
    if (!g.is_object()) throw ValidationError({where + ": \"g\" must be an object"});
    for (auto it = g.begin(); it != g.end(); ++it) {
      const auto iu = U.find(it.key());
      if (iu == U.end()) {
        bad.push_back(where + " references undeclared offline node " + it.key());
        continue;
      }
      if (!it.value().is_number()) {
        bad.push_back(where + ": demand for " + it.key() + " is not a number");
        continue;
      }
      arr.demands.push_back({iu->second, it.value().get<double>()});
    }
    s.arrivals.push_back(std::move(arr));
  }
  if (!bad.empty()) throw ValidationError(std::move(bad));
  return s;
}

inline Json to_json(const MatchingStream& s) {
  Json j;
  j["offline"] = s.offline;
  j["arrivals"] = Json::array();
  for (const auto& a : s.arrivals) {
    Json g = Json::object();
    for (const auto& [u, d] : a.demands) g[s.offline.at(u)] = d;
    j["arrivals"].push_back({{"v", a.v}, {"g", g}});
  }
  return j;
}

// ---- SchedulingInstance ----

inline SchedulingInstance scheduling_from_json(const Json& j) {
  SchedulingInstance s;
  s.machines = detail::get<std::size_t>(j, "machines", "instance");
  s.jobs = detail::get<std::size_t>(j, "jobs", "instance");
  s.p = detail::get<std::vector<std::vector<double>>>(j, "p", "instance");
  s.w = detail::get<std::vector<std::vector<double>>>(j, "w", "instance");
  s.x = detail::get<std::vector<std::vector<double>>>(j, "x", "instance");
  return s;
}

inline Json to_json(const SchedulingInstance& s) {
  return Json{{"machines", s.machines}, {"jobs", s.jobs}, {"p", s.p}, {"w", s.w}, {"x", s.x}};
}

// ---- reports ----

inline Json to_json(const StatsReport& r, const BipartiteInstance& inst) {
  Json j;
  j["right_violations"] = r.right_violations;
  j["all_pass"] = r.all_pass();
  j["rows"] = Json::array();
  for (const auto& row : r.rows) {
    std::vector<std::string> names;
    for (std::size_t e : row.edges) names.push_back(inst.edge_name(e));
    j["rows"].push_back({{"kind", row.kind},
                         {"edges", names},
                         {"empirical", row.empirical},
                         {"bound", row.bound},
                         {"sigma", row.sigma},
                         {"half_width", row.half_width},
                         {"pass", row.pass}});
  }
  return j;
}

inline std::string to_csv(const StatsReport& r, const BipartiteInstance& inst) {
  std::ostringstream os;
  os << "kind,ids,empirical,bound,half_width,pass\n";
  for (const auto& row : r.rows) {
    std::string ids;
    for (std::size_t k = 0; k < row.edges.size(); ++k) ids += (k ? "|" : "") + inst.edge_name(row.edges[k]);
    os << row.kind << ',' << ids << ',' << fmt(row.empirical) << ',' << fmt(row.bound) << ',' << fmt(row.half_width)
       << ',' << (row.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

inline Json to_json(const Interval& i) { return Json::array({i.lo, i.hi}); }

inline Json to_json(const Box4& b) {
  return Json{{"r1", to_json(b.r1())}, {"r2", to_json(b.r2())}, {"g1", to_json(b.g1())}, {"g2", to_json(b.g2())}};
}

inline Json to_json(const CertReport& r) {
  Json j;
  j["region"] = Json{{"r1", to_json(r.region.r1)},
                     {"r2", to_json(r.region.r2)},
                     {"g1", to_json(r.region.g1)},
                     {"g2", to_json(r.region.g2)}};
  j["epsilon"] = r.epsilon;
  j["c"] = r.c;
  j["max_depth"] = r.max_depth;
  j["boxes_checked"] = r.boxes_checked;
  j["boxes_passed"] = r.boxes_passed;
  j["leaves"] = r.leaves;
  j["worst_bound"] = r.boxes_checked ? Json(r.worst_bound) : Json(nullptr);
  j["worst_box"] = r.worst_box ? to_json(*r.worst_box) : Json(nullptr);
  j["witness"] = r.witness ? to_json(*r.witness) : Json(nullptr);
  j["runtime_seconds"] = r.runtime_seconds;
  j["pass"] = r.pass;
  return j;
}

inline std::string trace_csv(const OdrsResult& res, const MatchingStream& s) {
  std::ostringstream os;
  os << "arrival_index,u,v,g,r,y,rho,x,selected,committed\n";
  for (const auto& t : res.trace) {
    os << t.arrival << ',' << s.offline.at(t.u) << ',' << s.arrivals.at(t.arrival).v << ',' << fmt(t.g) << ','
       << fmt(t.r) << ',' << fmt(t.params.y) << ',' << fmt(t.params.rho) << ',' << fmt(t.params.x) << ','
       << (t.selected ? 1 : 0) << ',' << (t.committed ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace dirmech::io
