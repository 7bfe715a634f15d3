#pragma once

// Sweep harness behind the command-line tool: YAML experiment configs,
// per-figure row generators, deterministic parallel execution and CSV/JSON
// writers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "json.hpp"

#include "homsim/metrics.hpp"
#include "homsim/schemes.hpp"

#ifndef HOMSIM_VERSION
#define HOMSIM_VERSION "0.1.0"
#endif

namespace homsim {

inline constexpr const char* kToolVersion = HOMSIM_VERSION;

// ---------------------------------------------------------------- config

class ConfigError : public Error {
 public:
  enum class Kind { parse, range };

  ConfigError(Kind kind, std::string field, int line, const std::string& what)
      : Error(ErrorKind::config_invalid, format(kind, field, line, what)), kind_(kind), field_(std::move(field)), line_(line) {}

  Kind config_kind() const { return kind_; }
  const std::string& field() const { return field_; }
  int line() const { return line_; }  // 1-based, 0 when unknown

 private:
  static std::string format(Kind kind, const std::string& field, int line, const std::string& what) {
    std::string s = kind == Kind::parse ? "ParseError" : "RangeError";
    if (line > 0) s += " at line " + std::to_string(line);
    if (!field.empty()) s += " in '" + field + "'";
    return s + ": " + what;
  }

  Kind kind_;
  std::string field_;
  int line_;
};

struct CustomAmplitude {
  std::vector<int> occupation;
  complex amplitude;
};

struct CustomGate {
  enum class Type { beam_splitter, squeezer } type;
  Mode m1 = 0, m2 = 0;
  double t = std::numbers::sqrt2 / 2;  // beam splitter: real t, r = -sqrt(1 - t^2)
  std::optional<double> s;             // squeezer; empty = swept value
  double phi = 0.0;
};

struct CustomHerald {
  Mode mode = 0;
  enum class Type { fock, click, no_click } type = Type::fock;
  int n = 0;
  std::optional<double> eta;  // click/no_click; empty = swept value (ideal_spd if no sweep)
};

struct CustomCircuit {
  std::vector<int> cutoffs;
  std::size_t input_modes = 0;
  std::vector<CustomAmplitude> input;
  std::vector<CustomGate> gates;
  std::vector<CustomHerald> herald;
  std::vector<CustomAmplitude> target;
};

struct ExperimentConfig {
  std::string experiment;
  std::vector<double> s, eta, p;
  std::vector<int> n;
  int cutoff = 12;
  int idler_cutoff = 10;
  bool physical = false;  // noon only
  std::string out;
  std::string format = "csv";
  int workers = 1;
  std::size_t max_points = 100000;
  double leakage_bound = 1e-8;
  std::optional<CustomCircuit> circuit;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"fig4a", "fig4b", "fig5a", "fig5b", "fig6a", "fig6b", "noon", "custom"};
  return ids;
}

namespace detail {

inline std::vector<double> range_grid(double start, double stop, double step) {
  std::vector<double> g;
  const long count = std::lround(std::floor((stop - start) / step + 1e-9)) + 1;
  // rounded so 0.1 + 2 * 0.1 prints as 0.3
  for (long i = 0; i < count; ++i) g.push_back(std::round((start + double(i) * step) * 1e12) / 1e12);
  return g;
}

}  // namespace detail

// Pinned defaults per experiment id; shipped configs repeat them verbatim.
inline ExperimentConfig default_config(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  if (id == "fig4a") {
    c.s = detail::range_grid(0.05, 0.60, 0.05);
    c.cutoff = kFig4Cutoff;
  } else if (id == "fig4b") {
    c.s = detail::range_grid(0.01, 0.60, 0.01);
    c.cutoff = kFig4Cutoff;
  } else if (id == "fig5a") {
    c.s = detail::range_grid(0.01, 0.20, 0.01);
    c.eta = detail::range_grid(0.1, 0.9, 0.1);
  } else if (id == "fig5b") {
    c.s = detail::range_grid(0.01, 0.20, 0.01);
    c.eta = {0.66};
  } else if (id == "fig6a" || id == "fig6b") {
    c.s = {0.05};
    c.eta = {0.3, 0.4, 0.5, 0.6, 0.66, 0.7, 0.8, 0.9};
    c.p = detail::range_grid(0.50, 1.00, 0.01);
  } else if (id == "noon") {
    c.n = {2, 4, 6, 8};
    c.s = {0.05};
    c.eta = {0.66};
  } else if (id == "custom") {
    c.s = {0.0};
    c.eta = {};
  } else {
    throw ConfigError(ConfigError::Kind::parse, "experiment", 0, "unknown experiment id '" + id + "'");
  }
  return c;
}

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

[[noreturn]] inline void parse_error(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ConfigError(ConfigError::Kind::parse, field, line_of(node), what);
}

[[noreturn]] inline void range_error(const YAML::Node& node, const std::string& field, const std::string& what) {
  throw ConfigError(ConfigError::Kind::range, field, line_of(node), what);
}

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) parse_error(node, field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    parse_error(node, field, "cannot read '" + node.Scalar() + "'");
  }
}

inline void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) {
  if (!map.IsMap()) parse_error(map, where, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) parse_error(kv.first, where.empty() ? key : where + "." + key, "unknown key");
  }
}

// A grid is either a list of values or {start, stop, step}.
inline std::vector<double> real_grid(const YAML::Node& node, const std::string& field) {
  if (node.IsSequence()) {
    std::vector<double> g;
    for (const auto& v : node) g.push_back(scalar<double>(v, field));
    if (g.empty()) range_error(node, field, "grid must not be empty");
    return g;
  }
  if (node.IsMap()) {
    check_keys(node, field, {"start", "stop", "step"});
    if (!node["start"] || !node["stop"] || !node["step"]) parse_error(node, field, "range needs start, stop and step");
    const double a = scalar<double>(node["start"], field + ".start");
    const double b = scalar<double>(node["stop"], field + ".stop");
    const double h = scalar<double>(node["step"], field + ".step");
    if (!(h > 0.0)) range_error(node["step"], field + ".step", "step must be positive");
    if (!(b >= a)) range_error(node["stop"], field + ".stop", "stop must be >= start");
    return range_grid(a, b, h);
  }
  if (node.IsScalar()) return {scalar<double>(node, field)};
  parse_error(node, field, "expected a list or a {start, stop, step} range");
}

inline void check_interval(const YAML::Node& node, const std::string& field, const std::vector<double>& values, double lo,
                           double hi) {
  for (double v : values)
    if (!(v >= lo && v <= hi)) {
      std::ostringstream os;
      os << "value " << v << " outside [" << lo << ", " << hi << "]";
      range_error(node, field, os.str());
    }
}

inline std::vector<CustomAmplitude> amplitudes(const YAML::Node& node, const std::string& field, std::size_t modes) {
  if (!node.IsSequence() || node.size() == 0) parse_error(node, field, "expected a nonempty list of {occupation, amplitude}");
  std::vector<CustomAmplitude> out;
  for (const auto& item : node) {
    check_keys(item, field, {"occupation", "amplitude"});
    if (!item["occupation"] || !item["amplitude"]) parse_error(item, field, "entry needs occupation and amplitude");
    CustomAmplitude a;
    for (const auto& o : item["occupation"]) a.occupation.push_back(scalar<int>(o, field + ".occupation"));
    if (a.occupation.size() != modes) range_error(item["occupation"], field + ".occupation", "wrong number of modes");
    const auto& amp = item["amplitude"];
    if (amp.IsSequence()) {
      if (amp.size() != 2) parse_error(amp, field + ".amplitude", "complex amplitude is [re, im]");
      a.amplitude = {scalar<double>(amp[0], field + ".amplitude"), scalar<double>(amp[1], field + ".amplitude")};
    } else {
      a.amplitude = {scalar<double>(amp, field + ".amplitude"), 0.0};
    }
    out.push_back(std::move(a));
  }
  return out;
}

inline CustomCircuit parse_circuit(const YAML::Node& node) {
  check_keys(node, "circuit", {"cutoffs", "input_modes", "input", "gates", "herald", "target"});
  for (const char* k : {"cutoffs", "input_modes", "input", "gates", "herald", "target"})
    if (!node[k]) parse_error(node, std::string("circuit.") + k, "missing");
  CustomCircuit c;
  for (const auto& v : node["cutoffs"]) c.cutoffs.push_back(scalar<int>(v, "circuit.cutoffs"));
  if (c.cutoffs.size() < 2) range_error(node["cutoffs"], "circuit.cutoffs", "need at least two modes");
  for (int v : c.cutoffs)
    if (v < 0 || v > 40) range_error(node["cutoffs"], "circuit.cutoffs", "cutoffs must lie in [0, 40]");
  std::size_t dim = 1;
  for (int v : c.cutoffs) dim *= std::size_t(v + 1);
  if (dim > 2'000'000) range_error(node["cutoffs"], "circuit.cutoffs", "register dimension above 2e6");
  const int im = scalar<int>(node["input_modes"], "circuit.input_modes");
  if (im < 1 || std::size_t(im) >= c.cutoffs.size())
    range_error(node["input_modes"], "circuit.input_modes", "must leave at least one ancilla mode");
  c.input_modes = std::size_t(im);
  c.input = amplitudes(node["input"], "circuit.input", c.input_modes);

  auto mode_of = [&](const YAML::Node& v, const std::string& field) {
    const int m = scalar<int>(v, field);
    if (m < 0 || std::size_t(m) >= c.cutoffs.size()) range_error(v, field, "mode index out of range");
    return Mode(m);
  };
  if (!node["gates"].IsSequence()) parse_error(node["gates"], "circuit.gates", "expected a list");
  for (const auto& g : node["gates"]) {
    check_keys(g, "circuit.gates", {"type", "modes", "t", "s", "phi"});
    if (!g["type"] || !g["modes"]) parse_error(g, "circuit.gates", "gate needs type and modes");
    if (!g["modes"].IsSequence() || g["modes"].size() != 2) parse_error(g["modes"], "circuit.gates.modes", "two mode indices");
    CustomGate gate;
    gate.m1 = mode_of(g["modes"][0], "circuit.gates.modes");
    gate.m2 = mode_of(g["modes"][1], "circuit.gates.modes");
    if (gate.m1 == gate.m2) range_error(g["modes"], "circuit.gates.modes", "modes must differ");
    const auto type = scalar<std::string>(g["type"], "circuit.gates.type");
    if (type == "beam_splitter") {
      gate.type = CustomGate::Type::beam_splitter;
      if (g["t"]) gate.t = scalar<double>(g["t"], "circuit.gates.t");
      if (!(gate.t >= 0.0 && gate.t <= 1.0)) range_error(g["t"], "circuit.gates.t", "t must lie in [0, 1]");
    } else if (type == "squeezer") {
      gate.type = CustomGate::Type::squeezer;
      if (g["s"]) {
        gate.s = scalar<double>(g["s"], "circuit.gates.s");
        if (!(*gate.s >= 0.0 && *gate.s <= 0.8)) range_error(g["s"], "circuit.gates.s", "s must lie in [0, 0.8]");
      }
      if (g["phi"]) gate.phi = scalar<double>(g["phi"], "circuit.gates.phi");
    } else {
      parse_error(g["type"], "circuit.gates.type", "expected beam_splitter or squeezer");
    }
    c.gates.push_back(gate);
  }
  if (!node["herald"].IsSequence() || node["herald"].size() == 0)
    parse_error(node["herald"], "circuit.herald", "expected a nonempty list");
  for (const auto& h : node["herald"]) {
    check_keys(h, "circuit.herald", {"mode", "outcome", "n", "eta"});
    if (!h["mode"] || !h["outcome"]) parse_error(h, "circuit.herald", "entry needs mode and outcome");
    CustomHerald e;
    e.mode = mode_of(h["mode"], "circuit.herald.mode");
    if (e.mode < c.input_modes) range_error(h["mode"], "circuit.herald.mode", "herald may only measure ancilla modes");
    const auto o = scalar<std::string>(h["outcome"], "circuit.herald.outcome");
    if (o == "fock") {
      e.type = CustomHerald::Type::fock;
      if (!h["n"]) parse_error(h, "circuit.herald.n", "fock outcome needs n");
      e.n = scalar<int>(h["n"], "circuit.herald.n");
      if (e.n < 0 || e.n > c.cutoffs[e.mode]) range_error(h["n"], "circuit.herald.n", "outside the mode cutoff");
    } else if (o == "click" || o == "no_click") {
      e.type = o == "click" ? CustomHerald::Type::click : CustomHerald::Type::no_click;
      if (h["eta"]) {
        e.eta = scalar<double>(h["eta"], "circuit.herald.eta");
        if (!(*e.eta >= 0.0 && *e.eta <= 1.0)) range_error(h["eta"], "circuit.herald.eta", "eta must lie in [0, 1]");
      }
    } else {
      parse_error(h["outcome"], "circuit.herald.outcome", "expected fock, click or no_click");
    }
    c.herald.push_back(e);
  }
  c.target = amplitudes(node["target"], "circuit.target", c.cutoffs.size() - c.herald.size());
  return c;
}

}  // namespace detail

inline ExperimentConfig parse_config(const YAML::Node& root) {
  using namespace detail;
  if (!root.IsMap()) parse_error(root, "", "config must be a mapping");
  check_keys(root, "", {"experiment", "grid", "cutoff", "idler_cutoff", "physical", "output", "workers", "max_points",
                        "leakage_bound", "circuit"});
  if (!root["experiment"]) throw ConfigError(ConfigError::Kind::parse, "experiment", line_of(root), "missing experiment id");
  const auto id = scalar<std::string>(root["experiment"], "experiment");
  if (std::find(experiment_ids().begin(), experiment_ids().end(), id) == experiment_ids().end())
    parse_error(root["experiment"], "experiment", "unknown experiment id '" + id + "'");
  ExperimentConfig c = default_config(id);

  if (const auto g = root["grid"]) {
    check_keys(g, "grid", {"s", "eta", "p", "n"});
    if (g["s"]) {
      c.s = real_grid(g["s"], "grid.s");
      check_interval(g["s"], "grid.s", c.s, 0.0, 0.8);
    }
    if (g["eta"]) {
      c.eta = real_grid(g["eta"], "grid.eta");
      check_interval(g["eta"], "grid.eta", c.eta, 0.0, 1.0);
    }
    if (g["p"]) {
      c.p = real_grid(g["p"], "grid.p");
      check_interval(g["p"], "grid.p", c.p, 0.0, 1.0);
    }
    if (g["n"]) {
      c.n.clear();
      if (!g["n"].IsSequence()) parse_error(g["n"], "grid.n", "expected a list");
      for (const auto& v : g["n"]) {
        const int n = scalar<int>(v, "grid.n");
        if (n < 2 || n % 2 != 0 || n > 20) range_error(v, "grid.n", "N must be even and in [2, 20]");
        c.n.push_back(n);
      }
      if (c.n.empty()) range_error(g["n"], "grid.n", "grid must not be empty");
    }
  }
  if (root["cutoff"]) {
    c.cutoff = scalar<int>(root["cutoff"], "cutoff");
    if (c.cutoff < 2 || c.cutoff > 40) range_error(root["cutoff"], "cutoff", "cutoff must lie in [2, 40]");
  }
  if (root["idler_cutoff"]) {
    c.idler_cutoff = scalar<int>(root["idler_cutoff"], "idler_cutoff");
    if (c.idler_cutoff < 1 || c.idler_cutoff > 20) range_error(root["idler_cutoff"], "idler_cutoff", "must lie in [1, 20]");
  }
  if (root["physical"]) c.physical = scalar<bool>(root["physical"], "physical");
  if (const auto o = root["output"]) {
    check_keys(o, "output", {"path", "format"});
    if (o["path"]) c.out = scalar<std::string>(o["path"], "output.path");
    if (o["format"]) {
      c.format = scalar<std::string>(o["format"], "output.format");
      if (c.format != "csv" && c.format != "json") range_error(o["format"], "output.format", "expected csv or json");
    }
  }
  if (root["workers"]) {
    c.workers = scalar<int>(root["workers"], "workers");
    if (c.workers < 1 || c.workers > 256) range_error(root["workers"], "workers", "must lie in [1, 256]");
  }
  if (root["max_points"]) {
    const long m = scalar<long>(root["max_points"], "max_points");
    if (m < 1) range_error(root["max_points"], "max_points", "must be positive");
    c.max_points = std::size_t(m);
  }
  if (root["leakage_bound"]) {
    c.leakage_bound = scalar<double>(root["leakage_bound"], "leakage_bound");
    if (!(c.leakage_bound > 0.0)) range_error(root["leakage_bound"], "leakage_bound", "must be positive");
  }
  if (id == "custom") {
    if (!root["circuit"]) parse_error(root, "circuit", "custom experiment needs a circuit");
    c.circuit = parse_circuit(root["circuit"]);
  } else if (root["circuit"]) {
    parse_error(root["circuit"], "circuit", "only custom experiments take a circuit");
  }
  if ((id == "fig5a" || id == "fig5b" || id == "fig6a" || id == "fig6b") && c.cutoff < 6)
    range_error(root["cutoff"] ? root["cutoff"] : root, "cutoff", "this experiment needs cutoff >= 6");
  if (id == "noon")
    for (int n : c.n)
      if (c.cutoff < n) range_error(root["cutoff"] ? root["cutoff"] : root, "cutoff", "cutoff must be >= every N");
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::BadFile&) {
    throw ConfigError(ConfigError::Kind::parse, "", 0, "cannot open '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(ConfigError::Kind::parse, "", e.mark.line + 1, e.msg);
  }
  return parse_config(root);
}

struct ValidationReport {
  bool ok;
  std::string message;
};

inline ValidationReport validate_config(const std::string& path) {
  try {
    const auto c = load_config(path);
    return {true, "ok: " + c.experiment + " config is valid"};
  } catch (const ConfigError& e) {
    return {false, e.what()};
  }
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment;
  j["grid"] = {{"s", c.s}, {"eta", c.eta}, {"p", c.p}, {"n", c.n}};
  j["cutoff"] = c.cutoff;
  j["idler_cutoff"] = c.idler_cutoff;
  j["physical"] = c.physical;
  j["output"] = {{"path", c.out}, {"format", c.format}};
  j["max_points"] = c.max_points;
  j["leakage_bound"] = c.leakage_bound;
  if (c.circuit) {
    const auto& k = *c.circuit;
    auto amps = [](const std::vector<CustomAmplitude>& v) {
      nlohmann::ordered_json a = nlohmann::ordered_json::array();
      for (const auto& x : v) a.push_back({{"occupation", x.occupation}, {"amplitude", {x.amplitude.real(), x.amplitude.imag()}}});
      return a;
    };
    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    for (const auto& g : k.gates) {
      nlohmann::ordered_json x{{"type", g.type == CustomGate::Type::beam_splitter ? "beam_splitter" : "squeezer"},
                               {"modes", {g.m1, g.m2}}};
      if (g.type == CustomGate::Type::beam_splitter) x["t"] = g.t;
      else {
        x["s"] = g.s ? nlohmann::ordered_json(*g.s) : nlohmann::ordered_json("sweep");
        x["phi"] = g.phi;
      }
      gates.push_back(x);
    }
    nlohmann::ordered_json herald = nlohmann::ordered_json::array();
    for (const auto& h : k.herald) {
      nlohmann::ordered_json x{{"mode", h.mode}};
      if (h.type == CustomHerald::Type::fock) {
        x["outcome"] = "fock";
        x["n"] = h.n;
      } else {
        x["outcome"] = h.type == CustomHerald::Type::click ? "click" : "no_click";
        x["eta"] = h.eta ? nlohmann::ordered_json(*h.eta) : nlohmann::ordered_json("sweep");
      }
      herald.push_back(x);
    }
    j["circuit"] = {{"cutoffs", k.cutoffs}, {"input_modes", k.input_modes}, {"input", amps(k.input)},
                    {"gates", gates},       {"herald", herald},             {"target", amps(k.target)}};
  }
  return j;
}

// ---------------------------------------------------------------- results

struct Row {
  std::vector<double> values;
  std::string status = "ok";
};

struct SweepResult {
  std::string experiment;
  std::vector<std::string> columns;  // numeric columns; "status" is appended on output
  std::vector<Row> rows;

  std::size_t column(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) fail(ErrorKind::invalid_argument, "no column '" + name + "'");
    return std::size_t(it - columns.begin());
  }
  double value(std::size_t row, const std::string& name) const { return rows.at(row).values.at(column(name)); }
  bool any_flagged() const {
    return std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.status != "ok"; });
  }
};

// Documented column schema per experiment id.
inline std::vector<std::string> columns_for(const std::string& id) {
  if (id == "fig4a")
    return {"s", "entropy_tmss_bits", "r_first", "entropy_first_bits", "r_second", "entropy_second_bits", "probability", "leakage"};
  if (id == "fig4b") return {"s", "epr_tmss", "r_first", "epr_first", "r_second", "epr_second", "probability", "leakage"};
  if (id == "fig5a" || id == "fig5b") return {"s", "eta", "fidelity", "probability", "leakage"};
  if (id == "fig6a") return {"s", "eta", "p", "delta_phi", "phi_opt", "probability", "leakage"};
  if (id == "fig6b") return {"s", "eta", "p", "fidelity", "probability", "leakage"};
  if (id == "noon") return {"n", "physical", "s", "eta", "fidelity", "fidelity_any_phase", "relative_phase", "probability", "leakage"};
  if (id == "custom") return {"s", "eta", "fidelity", "probability", "leakage"};
  fail(ErrorKind::invalid_argument, "unknown experiment id '" + id + "'");
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& os, const SweepResult& r) {
  for (const auto& c : r.columns) os << c << ',';
  os << "status\n";
  for (const auto& row : r.rows) {
    for (double v : row.values) os << format_double(v) << ',';
    os << row.status << '\n';
  }
}

inline nlohmann::ordered_json to_json(const SweepResult& r) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    nlohmann::ordered_json x;
    for (std::size_t i = 0; i < r.columns.size(); ++i) x[r.columns[i]] = row.values[i];
    x["status"] = row.status;
    rows.push_back(x);
  }
  auto cols = r.columns;
  cols.push_back("status");
  return {{"experiment", r.experiment}, {"columns", cols}, {"rows", rows}};
}

inline void write_result(std::ostream& os, const SweepResult& r, const std::string& format) {
  if (format == "json") os << to_json(r).dump(2) << '\n';
  else write_csv(os, r);
}

inline nlohmann::ordered_json manifest(const ExperimentConfig& c, const SweepResult& r, double wall_seconds) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  const auto pc = r.column("probability"), lc = r.column("leakage");
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    rows.push_back({{"row", i}, {"probability", r.rows[i].values[pc]}, {"leakage", r.rows[i].values[lc]}, {"status", r.rows[i].status}});
  return {{"tool", "homsim"}, {"version", kToolVersion}, {"config", config_to_json(c)}, {"rows", rows}, {"wall_seconds", wall_seconds}};
}

// ---------------------------------------------------------------- runners

namespace detail {

// Runs tasks [0, count) on `workers` threads; results land by index so the
// output order never depends on scheduling.
template <class Result>
std::vector<Result> parallel_map(std::size_t count, int workers, const std::function<Result(std::size_t)>& task) {
  std::vector<Result> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next++) < count;) {
      try {
        out[i] = task(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, int(count)));
  std::vector<std::thread> threads;
  for (int t = 1; t < n; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline std::string status_for(double leakage, double bound) { return leakage > bound ? "leakage" : "ok"; }

inline PureState noon_target(const ModeLayout& layout, int n, double sign) {
  PureState t(layout);
  t[layout.index_of({n, 0})] = std::sqrt(0.5);
  t[layout.index_of({0, n})] = sign * std::sqrt(0.5);
  return t;
}

// Fig. 5: (|2,0> - |0,2>)/sqrt2 through S_ac S_bd B_cd, evolved once per s;
// each eta only re-weights the herald.
inline std::vector<Row> fig5_rows(const ExperimentConfig& c, double s) {
  const ModeLayout sig{c.cutoff, c.cutoff};
  const PureState psi2 = detail::noon_target(sig, 2, -1.0);
  const PureState psi4 = detail::noon_target(sig, 4, -1.0);
  std::vector<Row> rows;
  const SchemeOptions opt{c.idler_cutoff, 6};
  if (s == 0.0) {
    for (double eta : c.eta) rows.push_back({{s, eta, 0.0, 0.0, 0.0}, "zero_probability"});
    return rows;
  }
  const Circuit circ = add2_circuit(sig, {s, 0.0}, {s, pump_phase_for(0.0)}, CoincidenceHerald::exact(), opt);
  const std::vector<Branch> evolved{{1.0, circ.evolve(psi2)}};
  for (double eta : c.eta) {
    try {
      const auto r = herald_evolved(evolved, coincidence_on_off(2, 3, eta));
      const double leak = r.state.leakage();
      rows.push_back({{s, eta, fidelity(psi4, r.state), r.probability, leak}, status_for(leak, c.leakage_bound)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::zero_norm_state) throw;
      rows.push_back({{s, eta, 0.0, 0.0, 0.0}, "zero_probability"});
    }
  }
  return rows;
}

// Fig. 6: imperfect single photons into B_ab, then the Fig. 5 operation.
// The four input branches are evolved once per s and re-weighted per p.
inline std::vector<Row> fig6_rows(const ExperimentConfig& c, double s, bool phase) {
  const ModeLayout sig{c.cutoff, c.cutoff};
  const PureState psi4 = detail::noon_target(sig, 4, -1.0);
  const SchemeOptions opt{c.idler_cutoff, 6};
  std::vector<Row> rows;
  auto zero_row = [&](double eta, double p) {
    return phase ? Row{{s, eta, p, 0.0, 0.0, 0.0, 0.0}, "zero_probability"} : Row{{s, eta, p, 0.0, 0.0, 0.0}, "zero_probability"};
  };
  if (s == 0.0) {
    for (double eta : c.eta)
      for (double p : c.p) rows.push_back(zero_row(eta, p));
    return rows;
  }
  const Circuit circ = add2_circuit(sig, {s, 0.0}, {s, pump_phase_for(0.0)}, CoincidenceHerald::exact(), opt);
  const MixedState basis = prepare_hom_input({0.5});  // all four branches present
  std::vector<PureState> evolved;
  for (const auto& b : basis.branches()) evolved.push_back(circ.evolve(embed(b.state, sig)));
  for (double eta : c.eta) {
    for (double p : c.p) {
      const double q = 1.0 - p;
      const double w[] = {q * q, p * q, q * p, p * p};
      std::vector<Branch> in;
      for (std::size_t i = 0; i < 4; ++i) in.push_back({w[i], evolved[i]});
      try {
        const auto r = herald_evolved(in, coincidence_on_off(2, 3, eta));
        const double leak = r.state.leakage();
        const auto status = status_for(leak, c.leakage_bound);
        if (phase) {
          try {
            const auto opt_phase = optimal_phase_sensitivity(r.state);
            rows.push_back({{s, eta, p, opt_phase.delta_phi, opt_phase.phi, r.probability, leak}, status});
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::derivative_vanishes) throw;
            rows.push_back({{s, eta, p, 0.0, 0.0, r.probability, leak}, "derivative_vanishes"});
          }
        } else {
          rows.push_back({{s, eta, p, fidelity(psi4, r.state), r.probability, leak}, status});
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::zero_norm_state) throw;
        rows.push_back(zero_row(eta, p));
      }
    }
  }
  return rows;
}

inline Row fig4_row(const ExperimentConfig& c, double s, Objective objective) {
  const PureState tmss = tmss_state(s, ModeLayout{c.cutoff, c.cutoff});
  const auto first = optimize_r(objective, Order::first, s, c.cutoff);
  const auto second = optimize_r(objective, Order::second, s, c.cutoff);
  double leak = tmss.leakage();
  std::string status = status_for(leak, c.leakage_bound);
  if (objective == Objective::max_entropy)
    return {{s, entanglement_entropy(tmss, {0}), first.r, first.value, second.r, second.value, 1.0, leak}, status};

  // Quadrature moments near the cutoff are truncated; flag rows where the
  // optimized states put weight there.
  double top = epr_sum(tmss, 0, 1).top_population;
  for (auto [res, order] : {std::pair{first, Order::first}, std::pair{second, Order::second}}) {
    const double t = std::sqrt(1.0 - res.r * res.r);
    const auto st = order == Order::first ? apply_first_order_superpose(tmss, t, res.r) : apply_second_order_superpose(tmss, t, res.r);
    top = std::max(top, epr_sum(st.state, 0, 1).top_population);
  }
  if (top >= 1e-8) status = "truncated";
  return {{s, epr_sum(tmss, 0, 1).value, first.r, first.value, second.r, second.value, 1.0, leak}, status};
}

inline Row noon_row(const ExperimentConfig& c, int n) {
  const bool phys = c.physical;
  const double s = phys ? c.s.front() : 0.0;
  const double eta = phys && !c.eta.empty() ? c.eta.front() : 1.0;
  const auto mode = phys ? CascadeMode::heralded(s, c.eta.empty() ? std::nullopt : std::optional<double>(eta)) : CascadeMode::ideal();
  try {
    const auto r = noon_cascade(n, mode, std::max(c.cutoff, n), SchemeOptions{c.idler_cutoff, 6});
    const auto& layout = r.state.layout();
    const double f = fidelity(detail::noon_target(layout, n, 1.0), r.state);
    // max over theta of F against (|N,0> + e^{i theta}|0,N>)/sqrt2
    const auto i0 = layout.index_of({n, 0}), i1 = layout.index_of({0, n});
    double diag = 0.0;
    complex off{};
    for (const auto& b : r.state.branches()) {
      diag += b.weight * (std::norm(b.state[i0]) + std::norm(b.state[i1]));
      off += b.weight * b.state[i1] * std::conj(b.state[i0]);
    }
    const double leak = r.state.leakage();
    return {{double(n), phys ? 1.0 : 0.0, s, eta, f, 0.5 * diag + std::abs(off), std::arg(off), r.probability, leak},
            status_for(leak, c.leakage_bound)};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::zero_norm_state) throw;
    return {{double(n), phys ? 1.0 : 0.0, s, eta, 0.0, 0.0, 0.0, 0.0, 0.0}, "zero_probability"};
  }
}

inline PureState build_amplitudes(const ModeLayout& layout, const std::vector<CustomAmplitude>& amps) {
  PureState psi(layout);
  for (const auto& a : amps) psi[layout.index_of(a.occupation)] += a.amplitude;
  return normalize(psi).state;
}

inline std::vector<Row> custom_rows(const ExperimentConfig& c, double s) {
  const auto& k = *c.circuit;
  Circuit circ;
  circ.layout = ModeLayout(k.cutoffs);
  circ.input_modes = k.input_modes;
  for (const auto& g : k.gates) {
    if (g.type == CustomGate::Type::beam_splitter) {
      circ.gates.push_back(BeamSplitterGate{g.m1, g.m2, BeamSplitterParam{complex{g.t, 0.0}, complex{-std::sqrt(1.0 - g.t * g.t), 0.0}}});
    } else {
      circ.gates.push_back(SqueezerGate{g.m1, g.m2, SqueezeParam{g.s.value_or(s), g.phi}});
    }
  }
  const PureState input = build_amplitudes(circ.input_layout(), k.input);
  std::vector<Mode> measured;
  for (const auto& h : k.herald) measured.push_back(h.mode);
  const PureState target = build_amplitudes(circ.layout.without(measured), k.target);
  const std::vector<Branch> evolved{{1.0, circ.evolve(input)}};

  const std::vector<double> etas = c.eta.empty() ? std::vector<double>{1.0} : c.eta;
  std::vector<Row> rows;
  for (double eta : etas) {
    HeraldSpec spec;
    for (const auto& h : k.herald) {
      if (h.type == CustomHerald::Type::fock) {
        spec.add(h.mode, ExactFock{h.n});
        continue;
      }
      const DetectorModel det = h.eta ? DetectorModel::on_off(*h.eta)
                                      : (c.eta.empty() ? DetectorModel::ideal() : DetectorModel::on_off(eta));
      if (h.type == CustomHerald::Type::click) spec.add(h.mode, Click{det});
      else spec.add(h.mode, NoClick{det});
    }
    circ.herald = spec;
    circ.validate();
    try {
      const auto r = herald_evolved(evolved, spec);
      const double leak = r.state.leakage();
      rows.push_back({{s, eta, fidelity(target, r.state), r.probability, leak}, status_for(leak, c.leakage_bound)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::zero_norm_state) throw;
      rows.push_back({{s, eta, 0.0, 0.0, 0.0}, "zero_probability"});
    }
  }
  return rows;
}

}  // namespace detail

inline std::size_t grid_points(const ExperimentConfig& c) {
  const auto& id = c.experiment;
  if (id == "fig4a" || id == "fig4b") return c.s.size();
  if (id == "fig5a" || id == "fig5b") return c.s.size() * c.eta.size();
  if (id == "fig6a" || id == "fig6b") return c.s.size() * c.eta.size() * c.p.size();
  if (id == "noon") return c.n.size();
  return c.s.size() * std::max<std::size_t>(1, c.eta.size());
}

// Rows in grid order: the first listed parameter varies slowest.
inline SweepResult run_sweep(const ExperimentConfig& c) {
  const std::size_t points = grid_points(c);
  if (points > c.max_points)
    fail(ErrorKind::grid_too_large, std::to_string(points) + " grid points exceed the cap of " + std::to_string(c.max_points));
  const auto& id = c.experiment;
  if ((id == "fig5a" || id == "fig5b" || id == "fig6a" || id == "fig6b") && c.eta.empty())
    fail(ErrorKind::config_invalid, "eta grid must not be empty");
  SweepResult out{id, columns_for(id), {}};

  using Rows = std::vector<Row>;
  std::function<Rows(std::size_t)> task;
  std::size_t tasks = 0;
  if (id == "fig4a" || id == "fig4b") {
    const auto obj = id == "fig4a" ? Objective::max_entropy : Objective::min_epr;
    tasks = c.s.size();
    task = [&, obj](std::size_t i) { return Rows{detail::fig4_row(c, c.s[i], obj)}; };
  } else if (id == "fig5a" || id == "fig5b") {
    tasks = c.s.size();
    task = [&](std::size_t i) { return detail::fig5_rows(c, c.s[i]); };
  } else if (id == "fig6a" || id == "fig6b") {
    // one task per (s, eta) pair keeps the p loop cheap and the order fixed
    tasks = c.s.size() * c.eta.size();
    task = [&, phase = id == "fig6a"](std::size_t i) {
      ExperimentConfig sub = c;
      sub.eta = {c.eta[i % c.eta.size()]};
      return detail::fig6_rows(sub, c.s[i / c.eta.size()], phase);
    };
  } else if (id == "noon") {
    tasks = c.n.size();
    task = [&](std::size_t i) { return Rows{detail::noon_row(c, c.n[i])}; };
  } else {
    if (!c.circuit) fail(ErrorKind::config_invalid, "custom experiment needs a circuit");
    tasks = c.s.size();
    task = [&](std::size_t i) { return detail::custom_rows(c, c.s[i]); };
  }
  for (auto& rows : detail::parallel_map<Rows>(tasks, c.workers, task))
    for (auto& r : rows) out.rows.push_back(std::move(r));
  return out;
}

inline SweepResult run_figure(const ExperimentConfig& c) { return run_sweep(c); }

inline SweepResult run_figure(const std::string& id) { return run_sweep(default_config(id)); }

}  // namespace homsim
