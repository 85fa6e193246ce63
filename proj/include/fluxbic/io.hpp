#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "experiments.hpp"

namespace fluxbic {

using json = nlohmann::ordered_json;

inline constexpr const char* tool_version = "fluxbic 1.0.0";

enum class Task { Spectrum, QutritFit, Rates, Table1, Sweep, Prepare };
enum class OutputFormat { Csv, Json };

inline const char* task_name(Task t) {
  switch (t) {
    case Task::Spectrum: return "spectrum";
    case Task::QutritFit: return "qutrit-fit";
    case Task::Rates: return "rates";
    case Task::Table1: return "table1";
    case Task::Sweep: return "sweep";
    case Task::Prepare: return "prepare";
  }
  return "unknown";
}

struct RunConfig {
  Task task = Task::Spectrum;
  CircuitParams circuit;
  NoiseParams noise;
  Numerics numerics;
  RateConventions conventions;
  std::optional<SweepSpec> sweep;
  std::vector<Curve> curves;
  bool locate_crossing = false;
  double delta_phi = 1e-3;
  double leakage = 1e-2;
  std::string out_path;
  OutputFormat format = OutputFormat::Csv;
  std::vector<std::string> defaults_applied;
};

namespace detail {

// Walks one object, rejecting keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path, RunConfig& cfg) : node_(node), path_(std::move(path)), cfg_(cfg) {
    if (!node_.is_object()) fail(ErrorKind::SchemaError, path_ + " must be an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) {
    seen_.insert(k);
    return node_.contains(k);
  }

  double number(const std::string& k, double fallback) {
    if (!has(k)) {
      cfg_.defaults_applied.push_back(key(k));
      return fallback;
    }
    return required_number(k);
  }
  double required_number(const std::string& k) {
    seen_.insert(k);
    if (!node_.contains(k)) fail(ErrorKind::SchemaError, key(k) + " is required");
    const json& v = node_.at(k);
    if (!v.is_number()) fail(ErrorKind::SchemaError, key(k) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(ErrorKind::UnitError, key(k) + " must be finite");
    return d;
  }
  bool boolean(const std::string& k, bool fallback) {
    if (!has(k)) {
      cfg_.defaults_applied.push_back(key(k));
      return fallback;
    }
    if (!node_.at(k).is_boolean()) fail(ErrorKind::SchemaError, key(k) + " must be true or false");
    return node_.at(k).get<bool>();
  }
  std::string text(const std::string& k, const std::string& fallback) {
    if (!has(k)) {
      cfg_.defaults_applied.push_back(key(k));
      return fallback;
    }
    if (!node_.at(k).is_string()) fail(ErrorKind::SchemaError, key(k) + " must be a string");
    return node_.at(k).get<std::string>();
  }
  const json& raw(const std::string& k) {
    seen_.insert(k);
    return node_.at(k);
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail(ErrorKind::SchemaError, "unknown key " + key(it.key()));
  }

 private:
  const json& node_;
  std::string path_;
  RunConfig& cfg_;
  std::set<std::string> seen_;
};

template <class Enum>
Enum pick(const std::string& path, const std::string& value, std::initializer_list<std::pair<const char*, Enum>> options) {
  std::string allowed;
  for (const auto& [name, e] : options) {
    if (value == name) return e;
    allowed += std::string(allowed.empty() ? "" : ", ") + name;
  }
  fail(ErrorKind::SchemaError, path + ": '" + value + "' is not one of " + allowed);
}

inline std::vector<double> sweep_values(Section& s) {
  const bool listed = s.has("values"), ranged = s.has("range");
  if (listed == ranged) fail(ErrorKind::SchemaError, s.key("values") + " or " + s.key("range") + " (exactly one) is required");
  std::vector<double> out;
  if (listed) {
    const json& v = s.raw("values");
    if (!v.is_array()) fail(ErrorKind::SchemaError, s.key("values") + " must be an array");
    for (const auto& x : v) {
      if (!x.is_number()) fail(ErrorKind::SchemaError, s.key("values") + " must hold numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  RunConfig scratch;
  Section r(s.raw("range"), s.key("range"), scratch);
  const double start = r.required_number("start"), stop = r.required_number("stop");
  const double num = r.required_number("num");
  const std::string scale = r.text("scale", "linear");
  r.finish();
  if (num < 1 || num != std::floor(num)) fail(ErrorKind::SchemaError, s.key("range.num") + " must be a positive integer");
  const int n = static_cast<int>(num);
  const bool log = pick<bool>(s.key("range.scale"), scale, {{"linear", false}, {"log", true}});
  if (log && !(start > 0 && stop > 0)) fail(ErrorKind::UnitError, s.key("range") + ": log scale needs positive bounds");
  for (int i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : double(i) / (n - 1);
    out.push_back(log ? std::exp(std::log(start) + f * (std::log(stop) - std::log(start))) : start + f * (stop - start));
  }
  return out;
}

}  // namespace detail

// Dotted path assignment; the value is read as JSON when it parses, else as a string.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) fail(ErrorKind::SchemaError, "override '" + assignment + "' is not key=value");
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorKind::SchemaError, "override path '" + path + "' has an empty segment");
    if (!node->is_object()) fail(ErrorKind::SchemaError, "override path '" + path + "' crosses a non-object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

inline RunConfig parse_config(const json& doc) {
  RunConfig cfg;
  detail::Section top(doc, "", cfg);
  cfg.task = detail::pick<Task>("task", top.text("task", "spectrum"),
                                {{"spectrum", Task::Spectrum}, {"qutrit-fit", Task::QutritFit}, {"rates", Task::Rates},
                                 {"table1", Task::Table1}, {"sweep", Task::Sweep}, {"prepare", Task::Prepare}});

  if (!top.has("circuit")) fail(ErrorKind::SchemaError, "circuit is required");
  {
    detail::Section c(top.raw("circuit"), "circuit", cfg);
    CircuitParams& p = cfg.circuit;
    p.E_J = c.required_number("E_J");
    const bool ec = c.has("E_C"), rc = c.has("EJ_over_EC");
    const bool el = c.has("E_L"), rl = c.has("EJ_over_EL");
    if (ec == rc) fail(ErrorKind::SchemaError, "exactly one of circuit.E_C and circuit.EJ_over_EC is required");
    if (el == rl) fail(ErrorKind::SchemaError, "exactly one of circuit.E_L and circuit.EJ_over_EL is required");
    auto positive = [](double v, const std::string& key) {
      if (!(v > 0.0)) fail(ErrorKind::UnitError, key + " must be positive");
      return v;
    };
    positive(p.E_J, "circuit.E_J");
    p.E_C = ec ? c.required_number("E_C") : p.E_J / positive(c.required_number("EJ_over_EC"), "circuit.EJ_over_EC");
    p.E_L = el ? c.required_number("E_L") : p.E_J / positive(c.required_number("EJ_over_EL"), "circuit.EJ_over_EL");
    p.phi_ext = c.number("phi_ext", 0.0);
    p.E_Cc = c.number("E_Cc", 0.0);
    p.Z_line = c.number("Z_line", 50.0);
    p.T = c.number("T", 0.0);
    c.finish();
    p.validate();
  }

  if (top.has("noise")) {
    detail::Section n(top.raw("noise"), "noise", cfg);
    NoiseParams& z = cfg.noise;
    z.A = n.number("A", z.A);
    z.Q_diel = n.number("Q_diel", z.Q_diel);
    z.Q_ind = n.number("Q_ind", z.Q_ind);
    z.gamma_minus = n.number("gamma_minus", z.gamma_minus);
    z.gamma_plus = n.number("gamma_plus", z.gamma_plus);
    n.finish();
  } else {
    cfg.defaults_applied.push_back("noise");
  }
  cfg.noise.E_Cc = cfg.circuit.E_Cc;
  cfg.noise.Z_line = cfg.circuit.Z_line;
  cfg.noise.T = cfg.circuit.T;
  cfg.noise.validate();

  if (top.has("numerics")) {
    detail::Section n(top.raw("numerics"), "numerics", cfg);
    const bool grid = detail::pick<bool>("numerics.basis", n.text("basis", "ladder"), {{"ladder", false}, {"grid", true}});
    Numerics num = grid ? Numerics::phase_grid() : Numerics{};
    const double w = n.number("phase_halfwidth", 8.0 * pi);
    if (n.has("dims")) {
      const json& dims = n.raw("dims");
      if (!dims.is_array() || dims.size() < 2) fail(ErrorKind::SchemaError, "numerics.dims must be an array of at least two sizes");
      num.ladder.clear();
      for (const auto& d : dims) {
        if (!d.is_number_integer()) fail(ErrorKind::SchemaError, "numerics.dims must hold integers");
        num.ladder.push_back(grid ? BasisSpec::phase_grid(d.get<int>(), w) : BasisSpec::oscillator_ladder(d.get<int>()));
      }
    } else {
      cfg.defaults_applied.push_back("numerics.dims");
      for (auto& b : num.ladder) b.phase_halfwidth = grid ? w : 0.0;
    }
    num.tol = n.number("tol", num.tol);
    const double levels = n.number("levels", num.levels);
    if (levels < 5 || levels != std::floor(levels)) fail(ErrorKind::SchemaError, "numerics.levels must be an integer >= 5");
    num.levels = static_cast<int>(levels);
    num.parity_threshold = n.number("parity_threshold", num.parity_threshold);
    n.finish();
    if (!(num.tol > 0.0)) fail(ErrorKind::UnitError, "numerics.tol must be positive");
    for (const auto& b : num.ladder) {
      if (b.dim < 16) fail(ErrorKind::UnitError, "numerics.dims entries must be >= 16");
      if (grid && !(b.phase_halfwidth >= 3.0 * pi)) fail(ErrorKind::UnitError, "numerics.phase_halfwidth must be >= 3*pi");
    }
    for (std::size_t i = 1; i < num.ladder.size(); ++i)
      if (num.ladder[i].dim <= num.ladder[i - 1].dim) fail(ErrorKind::SchemaError, "numerics.dims must increase");
    cfg.numerics = num;
  } else {
    cfg.defaults_applied.push_back("numerics");
  }

  if (top.has("conventions")) {
    detail::Section c(top.raw("conventions"), "conventions", cfg);
    RateConventions& k = cfg.conventions;
    k.capacitance = detail::pick<CapacitanceConvention>(
        "conventions.capacitance", c.text("capacitance", "renormalized"),
        {{"renormalized", CapacitanceConvention::Renormalized}, {"additive", CapacitanceConvention::Additive}});
    k.g0 = detail::pick<ConductanceQuantum>("conventions.G0", c.text("G0", "2e^2/h"),
                                            {{"2e^2/h", ConductanceQuantum::TwoESquaredOverH},
                                             {"(2e)^2/h", ConductanceQuantum::CooperPair}});
    k.stimulated_emission = c.boolean("stimulated_emission", false);
    k.one_over_f_upward = detail::pick<OneOverFUpward>(
        "conventions.one_over_f_upward", c.text("one_over_f_upward", "symmetric"),
        {{"symmetric", OneOverFUpward::Symmetric}, {"detailed_balance", OneOverFUpward::DetailedBalance}});
    k.bias_over_amplitude = c.number("bias_over_A", 1.0);
    if (!(k.bias_over_amplitude >= 0.0)) fail(ErrorKind::UnitError, "conventions.bias_over_A must be >= 0");
    c.finish();
  } else {
    cfg.defaults_applied.push_back("conventions");
  }

  if (top.has("sweep")) {
    detail::Section s(top.raw("sweep"), "sweep", cfg);
    SweepSpec spec;
    spec.axis = s.text("axis", "");
    if (!is_parameter_path(spec.axis)) fail(ErrorKind::SchemaError, "sweep.axis: unknown parameter path '" + spec.axis + "'");
    spec.values = detail::sweep_values(s);
    if (!s.has("outputs") || !s.raw("outputs").is_array()) fail(ErrorKind::SchemaError, "sweep.outputs must be an array");
    for (const auto& o : s.raw("outputs")) {
      if (!o.is_string()) fail(ErrorKind::SchemaError, "sweep.outputs must hold names");
      spec.outputs.push_back(o.get<std::string>());
    }
    if (s.has("curves")) {
      const json& curves = s.raw("curves");
      if (!curves.is_array() || curves.empty()) fail(ErrorKind::SchemaError, "sweep.curves must be a nonempty array");
      for (std::size_t i = 0; i < curves.size(); ++i) {
        const std::string at = "sweep.curves[" + std::to_string(i) + "]";
        detail::Section c(curves[i], at, cfg);
        Curve curve;
        curve.label = c.text("label", "");
        if (curve.label.empty() || curve.label.find_first_of("/\\ ") != std::string::npos)
          fail(ErrorKind::SchemaError, at + ".label must be a nonempty file-safe name");
        if (!c.has("set") || !c.raw("set").is_object()) fail(ErrorKind::SchemaError, at + ".set must be an object");
        for (auto it = c.raw("set").begin(); it != c.raw("set").end(); ++it) {
          if (!is_parameter_path(it.key())) fail(ErrorKind::SchemaError, at + ".set: unknown parameter path '" + it.key() + "'");
          if (!it.value().is_number()) fail(ErrorKind::SchemaError, at + ".set." + it.key() + " must be a number");
          curve.set.emplace_back(it.key(), it.value().get<double>());
        }
        c.finish();
        cfg.curves.push_back(std::move(curve));
      }
    }
    cfg.locate_crossing = s.boolean("locate_crossing", false);
    s.finish();
    cfg.sweep = std::move(spec);
  }

  if (top.has("prepare")) {
    detail::Section s(top.raw("prepare"), "prepare", cfg);
    cfg.delta_phi = s.number("delta_phi", cfg.delta_phi);
    cfg.leakage = s.number("leakage", cfg.leakage);
    s.finish();
    if (!(cfg.delta_phi > 0.0)) fail(ErrorKind::UnitError, "prepare.delta_phi must be positive");
    if (!(cfg.leakage > 0.0 && cfg.leakage < 1.0)) fail(ErrorKind::UnitError, "prepare.leakage must lie in (0, 1)");
  }

  if (top.has("output")) {
    detail::Section o(top.raw("output"), "output", cfg);
    cfg.out_path = o.text("path", "");
    cfg.format = detail::pick<OutputFormat>("output.format", o.text("format", "csv"),
                                            {{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}});
    o.finish();
  }
  top.finish();

  if (cfg.task == Task::Sweep && !cfg.sweep) fail(ErrorKind::SchemaError, "sweep task needs a sweep block");
  if (cfg.sweep) {
    SweepSpec& s = *cfg.sweep;
    s.base = cfg.circuit;
    s.noise = cfg.noise;
    s.conventions = cfg.conventions;
    s.numerics = cfg.numerics;
    s.validate();
  }
  return cfg;
}

inline json basis_json(const BasisSpec& b) {
  json j;
  j["kind"] = b.kind == BasisKind::PhaseGrid ? "PhaseGrid" : "OscillatorLadder";
  j["dim"] = b.dim;
  if (b.kind == BasisKind::PhaseGrid) j["phase_halfwidth"] = b.phase_halfwidth;
  return j;
}

// Every setting the computation used, defaults included.
inline json resolved_config(const RunConfig& c) {
  json j;
  j["task"] = task_name(c.task);
  const CircuitParams& p = c.circuit;
  j["circuit"] = {{"E_J", p.E_J}, {"E_C", p.E_C}, {"E_L", p.E_L}, {"phi_ext", p.phi_ext},
                  {"E_Cc", p.E_Cc}, {"Z_line", p.Z_line}, {"T", p.T}};
  j["noise"] = {{"A", c.noise.A}, {"Q_diel", c.noise.Q_diel}, {"Q_ind", c.noise.Q_ind},
                {"gamma_minus", c.noise.gamma_minus}, {"gamma_plus", c.noise.gamma_plus}};
  json ladder = json::array();
  for (const auto& b : c.numerics.ladder) ladder.push_back(basis_json(b));
  j["numerics"] = {{"ladder", ladder}, {"tol", c.numerics.tol}, {"levels", c.numerics.levels},
                   {"parity_threshold", c.numerics.parity_threshold}};
  j["conventions"] = {{"capacitance", c.conventions.capacitance == CapacitanceConvention::Renormalized ? "renormalized" : "additive"},
                      {"G0", c.conventions.g0 == ConductanceQuantum::TwoESquaredOverH ? "2e^2/h" : "(2e)^2/h"},
                      {"stimulated_emission", c.conventions.stimulated_emission},
                      {"one_over_f_upward", upward_name(c.conventions.one_over_f_upward)},
                      {"bias_over_A", c.conventions.bias_over_amplitude}};
  if (c.sweep) {
    json s;
    s["axis"] = c.sweep->axis;
    s["values"] = c.sweep->values;
    s["outputs"] = c.sweep->outputs;
    json curves = json::array();
    for (const auto& cv : c.curves) {
      json set = json::object();
      for (const auto& [k, v] : cv.set) set[k] = v;
      curves.push_back({{"label", cv.label}, {"set", set}});
    }
    s["curves"] = curves;
    s["locate_crossing"] = c.locate_crossing;
    j["sweep"] = s;
  }
  j["prepare"] = {{"delta_phi", c.delta_phi}, {"leakage", c.leakage}};
  j["output"] = {{"path", c.out_path}, {"format", c.format == OutputFormat::Csv ? "csv" : "json"}};
  return j;
}

inline json run_metadata(const RunConfig& c) {
  json m;
  m["tool_version"] = tool_version;
  m["resolved_config"] = resolved_config(c);
  m["defaults_applied"] = c.defaults_applied;
  m["conventions"] = {{"E_C_tilde", std::string("e^2/(2 C_sigma); ") + convention_name(c.conventions.capacitance)},
                      {"G0", conductance_name(c.conventions.g0)},
                      {"stimulated_emission_in_tabulated_rates", c.conventions.stimulated_emission},
                      {"one_over_f_upward", upward_name(c.conventions.one_over_f_upward)},
                      {"flux_bias", "phi_ext = bias_over_A * A"},
                      {"gauge", "external flux inside the cosine"},
                      {"energy_unit", "GHz (E/h)"}};
  return m;
}

// ---- dataset files ----

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string dataset_csv(const Dataset& d) {
  std::ostringstream os;
  for (const auto& c : d.columns) os << csv_field(c) << ',';
  os << csv_field(d.text_column) << "\r\n";
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    for (double v : d.rows[r]) os << format_number(v) << ',';
    os << csv_field(d.status[r]) << "\r\n";
  }
  return os.str();
}

inline std::string dataset_json(const Dataset& d, const json& metadata) {
  std::ostringstream os;
  os << "{\n\"metadata\": " << metadata.dump(2) << ",\n\"columns\": " << json(d.columns).dump() << ",\n\"records\": [";
  for (std::size_t r = 0; r < d.rows.size(); ++r) {
    os << (r ? ",\n" : "\n") << "  {";
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
      const double v = d.rows[r][c];
      os << json(d.columns[c]).dump() << ": " << (std::isfinite(v) ? format_number(v) : "null") << ", ";
    }
    os << json(d.text_column).dump() << ": " << json(d.status[r]).dump() << "}";
  }
  os << "\n]\n}\n";
  return os.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) fail(ErrorKind::IoError, "failed writing '" + path + "'");
}

// CSV metadata goes to <path>.meta.json; an empty path means standard output.
inline void emit_dataset(const Dataset& d, OutputFormat format, const std::string& path, const json& metadata) {
  if (d.rows.empty()) fail(ErrorKind::InvalidArgument, "dataset is empty");
  if (format == OutputFormat::Json) {
    const std::string text = dataset_json(d, metadata);
    if (path.empty()) std::cout << text;
    else write_text(path, text);
    return;
  }
  const std::string text = dataset_csv(d);
  if (path.empty()) {
    std::cout << text;
    std::cerr << metadata.dump(2) << "\n";
  } else {
    write_text(path, text);
    write_text(path + ".meta.json", metadata.dump(2) + "\n");
  }
}

namespace detail {

inline std::vector<std::string> split_csv_record(std::istream& in) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false, any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          cur += '"';
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (ch == '\r') {
    } else if (ch == '\n') {
      fields.push_back(std::move(cur));
      return fields;
    } else {
      cur += ch;
    }
  }
  if (any) fields.push_back(std::move(cur));
  return fields;
}

}  // namespace detail

inline Dataset read_dataset_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  Dataset d;
  std::vector<std::string> header = detail::split_csv_record(f);
  if (header.size() < 2) fail(ErrorKind::IoError, "'" + path + "' has no header");
  d.text_column = header.back();
  header.pop_back();
  d.columns = header;
  while (true) {
    std::vector<std::string> rec = detail::split_csv_record(f);
    if (rec.empty()) break;
    if (rec.size() != d.columns.size() + 1) fail(ErrorKind::IoError, "ragged row in '" + path + "'");
    std::vector<double> row;
    for (std::size_t i = 0; i < d.columns.size(); ++i) row.push_back(std::strtod(rec[i].c_str(), nullptr));
    d.rows.push_back(std::move(row));
    d.status.push_back(rec.back());
  }
  return d;
}

// Position of the extension dot in the last path segment, or npos.
inline std::size_t extension_dot(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash) || dot == 0) return std::string::npos;
  return dot;
}

inline std::string with_suffix(const std::string& path, const std::string& suffix) {
  const auto dot = extension_dot(path);
  if (dot == std::string::npos) return path + suffix;
  return path.substr(0, dot) + suffix + path.substr(dot);
}

// One file per curve plus <stem>_manifest.json.
inline std::vector<std::string> emit_curves(const std::vector<CurveResult>& curves, OutputFormat format,
                                            const std::string& path, const json& metadata) {
  if (path.empty()) fail(ErrorKind::SchemaError, "multi-curve sweeps need --out");
  json manifest;
  manifest["metadata"] = metadata;
  manifest["curves"] = json::array();
  std::vector<std::string> written;
  for (const auto& c : curves) {
    const std::string file = with_suffix(path, "_" + c.label);
    json m = metadata;
    m["curve"] = c.label;
    emit_dataset(c.data, format, file, m);
    json entry{{"label", c.label}, {"file", file.substr(file.find_last_of('/') + 1)}};
    if (c.crossing) {
      entry["crossing"] = {{"value", c.crossing->sweep_parameter_value},
                           {"gap_GHz", c.crossing->gap},
                           {"levels", {c.crossing->level_pair.first, c.crossing->level_pair.second}}};
    } else if (!c.crossing_status.empty()) {
      entry["crossing"] = {{"status", c.crossing_status}};
    }
    manifest["curves"].push_back(entry);
    written.push_back(file);
  }
  const auto dot = extension_dot(path);
  const std::string mfile = (dot == std::string::npos ? path : path.substr(0, dot)) + "_manifest.json";
  write_text(mfile, manifest.dump(2) + "\n");
  written.push_back(mfile);
  return written;
}

}  // namespace fluxbic
