#include "slowfast/runner.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "slowfast/dynamics.hpp"
#include "slowfast/painleve.hpp"
#include "slowfast/reduction.hpp"
#include "slowfast/slow_manifold.hpp"
#include "slowfast/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace slowfast {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fmt17(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool ident_ok(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_')
    return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' &&
        c != '.')
      return false;
  return true;
}

double parse_number(const std::string& text, const ConfigEntry& e) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double x = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(x))
    throw ConfigError(e.line, e.value_col,
                      "expected a finite number for '" + e.key + "', got '" +
                          text + "'");
  return x;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  cfg.text_ = text;
  cfg.hash_ = fnv1a(text);
  std::string current;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string::npos ? text.size() : nl;
    std::string_view line(text.data() + pos, end - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::size_t first = line.find_first_not_of(" \t");
    if (first != std::string_view::npos && line[first] != '#') {
      if (line[first] == '[') {
        std::size_t close = line.find(']', first);
        if (close == std::string_view::npos)
          throw ConfigError(line_no, static_cast<int>(first) + 1,
                            "unterminated section header");
        std::string_view rest = trim(line.substr(close + 1));
        if (!rest.empty() && rest.front() != '#')
          throw ConfigError(line_no, static_cast<int>(close) + 2,
                            "unexpected text after section header");
        std::string name(trim(line.substr(first + 1, close - first - 1)));
        if (!ident_ok(name))
          throw ConfigError(line_no, static_cast<int>(first) + 2,
                            "invalid section name '" + name + "'");
        current = name;
        cfg.sections_.emplace_back(name, line_no);
      } else {
        std::size_t eq = line.find('=');
        if (eq == std::string_view::npos)
          throw ConfigError(line_no, static_cast<int>(first) + 1,
                            "expected 'key = value' or '[section]'");
        std::string key(trim(line.substr(first, eq - first)));
        if (!ident_ok(key))
          throw ConfigError(line_no, static_cast<int>(first) + 1,
                            "invalid key '" + key + "'");
        if (current.empty())
          throw ConfigError(line_no, static_cast<int>(first) + 1,
                            "key '" + key + "' before any [section] header");
        std::string_view raw = line.substr(eq + 1);
        std::size_t voff = raw.find_first_not_of(" \t");
        std::string value(trim(raw));
        if (value.empty())
          throw ConfigError(line_no, static_cast<int>(eq) + 2,
                            "empty value for '" + key + "'");
        if (cfg.find(current, key))
          throw ConfigError(line_no, static_cast<int>(first) + 1,
                            "duplicate key '" + key + "' in [" + current + "]");
        ConfigEntry e;
        e.section = current;
        e.key = key;
        e.value = value;
        e.line = line_no;
        e.value_col = static_cast<int>(eq + 1 + voff) + 1;
        cfg.entries_.push_back(std::move(e));
      }
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorCode::io_error, "cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = parse(buf.str());
  cfg.path_ = path;
  return cfg;
}

bool Config::has_section(const std::string& section) const {
  for (const auto& [name, line] : sections_)
    if (name == section) return true;
  return false;
}

const ConfigEntry* Config::find(const std::string& section,
                                const std::string& key) const {
  for (const auto& e : entries_)
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

std::string Config::require(const std::string& section,
                            const std::string& key) const {
  const ConfigEntry* e = find(section, key);
  if (!e)
    throw ConfigError(0, 0,
                      "missing required key '" + key + "' in [" + section +
                          "]");
  return e->value;
}

double Config::require_double(const std::string& section,
                              const std::string& key) const {
  const ConfigEntry* e = find(section, key);
  if (!e)
    throw ConfigError(0, 0,
                      "missing required key '" + key + "' in [" + section +
                          "]");
  return parse_number(e->value, *e);
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  const ConfigEntry* e = find(section, key);
  return e ? parse_number(e->value, *e) : fallback;
}

long Config::get_long(const std::string& section, const std::string& key,
                      long fallback) const {
  const ConfigEntry* e = find(section, key);
  if (!e) return fallback;
  const char* begin = e->value.c_str();
  char* end = nullptr;
  errno = 0;
  long x = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(e->line, e->value_col,
                      "expected an integer for '" + key + "', got '" +
                          e->value + "'");
  return x;
}

std::string Config::get_string(const std::string& section,
                               const std::string& key,
                               const std::string& fallback) const {
  const ConfigEntry* e = find(section, key);
  return e ? e->value : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key,
                      bool fallback) const {
  const ConfigEntry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
  if (e->value == "false" || e->value == "no" || e->value == "0") return false;
  throw ConfigError(e->line, e->value_col,
                    "expected a boolean for '" + key + "', got '" + e->value +
                        "'");
}

std::vector<double> Config::require_list(const std::string& section,
                                         const std::string& key) const {
  const ConfigEntry* e = find(section, key);
  if (!e)
    throw ConfigError(0, 0,
                      "missing required key '" + key + "' in [" + section +
                          "]");
  std::vector<double> out;
  std::string token;
  ConfigEntry probe = *e;
  for (std::size_t i = 0; i <= e->value.size(); ++i) {
    char c = i < e->value.size() ? e->value[i] : ',';
    if (c == ' ' || c == '\t' || c == ',') {
      if (!token.empty()) {
        probe.value = token;
        out.push_back(parse_number(token, probe));
        token.clear();
      }
    } else {
      token.push_back(c);
    }
  }
  if (out.empty())
    throw ConfigError(e->line, e->value_col,
                      "expected at least one number for '" + key + "'");
  return out;
}

std::array<double, 2> Config::require_pair(const std::string& section,
                                           const std::string& key) const {
  std::vector<double> v = require_list(section, key);
  if (v.size() != 2) {
    const ConfigEntry* e = find(section, key);
    throw ConfigError(e->line, e->value_col,
                      "expected exactly two numbers for '" + key + "'");
  }
  return {v[0], v[1]};
}

void Config::check_keys(const std::string& section,
                        const std::vector<std::string>& allowed) const {
  for (const auto& e : entries_) {
    if (e.section != section) continue;
    if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end())
      throw ConfigError(e.line, 1,
                        "unknown key '" + e.key + "' in [" + section + "]");
  }
}

void Config::check_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [name, line] : sections_)
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw ConfigError(line, 1,
                        "section [" + name + "] is not used by this command");
}

Model model_from_config(const Config& cfg) {
  if (!cfg.has_section("model")) throw ConfigError(0, 0, "missing [model] section");
  const ConfigEntry* src = cfg.find("model", "source");
  const ConfigEntry* file = cfg.find("model", "file");
  const ConfigEntry* builtin = cfg.find("model", "builtin");
  int given = (src != nullptr) + (file != nullptr) + (builtin != nullptr);
  if (given != 1)
    throw ConfigError(0, 0,
                      "[model] needs exactly one of 'source', 'file', or "
                      "'builtin'");

  Model m = Model::parse("0");
  if (src) {
    try {
      m = Model::parse(src->value);
    } catch (const ParseError& e) {
      throw ConfigError(src->line,
                        src->value_col + static_cast<int>(e.offset()),
                        std::string("model source: ") + e.what());
    }
  } else if (builtin) {
    try {
      m = Model::builtin(builtin->value);
    } catch (const Error& e) {
      throw ConfigError(builtin->line, builtin->value_col, e.what());
    }
  } else {
    fs::path p(file->value);
    if (p.is_relative() && !cfg.path().empty())
      p = fs::path(cfg.path()).parent_path() / p;
    m = Model::load(p.string());
  }

  for (const auto& e : cfg.entries()) {
    if (e.section != "model" || e.key == "source" || e.key == "file" ||
        e.key == "builtin")
      continue;
    double value = parse_number(e.value, e);
    try {
      m = m.bind(e.key, value);
    } catch (const Error&) {
      throw ConfigError(e.line, 1,
                        "model has no parameter named '" + e.key + "'");
    }
  }

  std::vector<std::string> unbound = m.unbound_parameters();
  if (!unbound.empty()) {
    std::string list;
    for (const auto& n : unbound) list += (list.empty() ? "" : ", ") + n;
    throw ConfigError(0, 0, "unbound model parameter(s): " + list);
  }
  return m;
}

namespace {

// Stages artifact contents and finalizes them atomically; a file left with
// the `.partial` suffix marks an interrupted or failed run.
struct Sink {
  fs::path dir;
  std::uint64_t config_hash = 0;

  void file(const std::string& name, const std::string& content,
            bool partial) const {
    fs::path target = dir / name;
    fs::path staged = dir / (name + ".partial");
    {
      std::ofstream out(staged, std::ios::binary);
      out << content;
      if (!out)
        fail(ErrorCode::io_error, "cannot write '" + staged.string() + "'");
    }
    if (!partial) fs::rename(staged, target);
  }

  void json_file(const std::string& name, const json& j,
                 bool partial = false) const {
    file(name, j.dump(2) + "\n", partial);
  }

  void csv_file(const std::string& name, const std::string& header,
                const std::vector<std::string>& rows,
                bool partial = false) const {
    std::string body = "# config-hash: " + hex16(config_hash) + "\n";
    body += header;
    body += '\n';
    for (const auto& r : rows) {
      body += r;
      body += '\n';
    }
    file(name, body, partial);
  }
};

json point_json(const PhasePoint& p) {
  return json{{"x", p.x}, {"y", p.y}, {"u", p.u}, {"v", p.v}};
}

PhasePoint point_from(const Config& cfg, const std::string& section) {
  PhasePoint p;
  p.x = cfg.require_double(section, "x");
  p.y = cfg.require_double(section, "y");
  p.u = cfg.require_double(section, "u");
  p.v = cfg.require_double(section, "v");
  return p;
}

json base_report(const char* command, const Config& cfg, const Model& m,
                 std::uint64_t seed) {
  json j;
  j["command"] = command;
  j["config_hash"] = hex16(cfg.hash());
  j["model_hash"] = hex16(m.hash());
  j["model"] = m.source();
  j["seed"] = seed;
  return j;
}

void positive(const Config& cfg, const std::string& sec, const std::string& key,
              double value) {
  if (value > 0) return;
  const ConfigEntry* e = cfg.find(sec, key);
  throw ConfigError(e ? e->line : 0, e ? e->value_col : 0,
                    "'" + key + "' must be positive");
}

void run_analyze(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "analyze"});
  cfg.check_keys("analyze", {"x", "y", "u", "v"});
  Model m = model_from_config(cfg);
  PhasePoint guess = point_from(cfg, "analyze");

  std::array<double, 2> fast =
      solve_critical_point(m, guess.u, guess.v, {guess.x, guess.y});
  PhasePoint p{fast[0], fast[1], guess.u, guess.v};
  SingularPointRecord rec = classify_singular_point(m, p);

  json j = base_report("analyze", cfg, m, seed);
  j["seed_point"] = point_json(guess);
  j["point"] = point_json(rec.location);
  j["classification"] = classification_name(rec.classification);
  j["degenerate_reason"] = degenerate_reason_name(rec.reason);
  j["delta"] = rec.delta_value;
  j["zero_tolerance"] = rec.zero_tolerance;
  j["chart_valid"] = rec.chart_valid;
  json margins = json::object();
  for (const auto& [k, v] : rec.margins) margins[k] = v;
  j["margins"] = margins;
  sink.json_file("report.json", j);
}

void run_integrate(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "integrate"});
  cfg.check_keys("integrate", {"epsilon", "x", "y", "u", "v", "t0", "t1", "h",
                               "stride"});
  Model m = model_from_config(cfg);
  double eps = cfg.require_double("integrate", "epsilon");
  positive(cfg, "integrate", "epsilon", eps);
  PhasePoint p0 = point_from(cfg, "integrate");
  double t0 = cfg.get_double("integrate", "t0", 0.0);
  double t1 = cfg.require_double("integrate", "t1");
  double h = cfg.get_double("integrate", "h", eps / 5.0);
  long stride = cfg.get_long("integrate", "stride", 1);
  if (h == 0.0 || (t1 - t0) * h <= 0.0)
    throw ConfigError(0, 0, "step 'h' does not advance t0 toward t1");
  if (stride < 1) throw ConfigError(0, 0, "'stride' must be >= 1");

  Trajectory traj =
      integrate(m, p0, eps, t0, t1, h, static_cast<int>(stride));

  std::vector<std::string> rows;
  rows.reserve(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const PhasePoint& s = traj.states[i];
    rows.push_back(fmt17(traj.times[i]) + "," + fmt17(s.x) + "," + fmt17(s.y) +
                   "," + fmt17(s.u) + "," + fmt17(s.v) + "," +
                   fmt17(m.eval(s.array())));
  }

  json j = base_report("integrate", cfg, m, seed);
  j["epsilon"] = eps;
  j["t0"] = t0;
  j["t1"] = t1;
  j["h"] = h;
  j["stride"] = stride;
  j["samples"] = traj.size();
  j["initial"] = point_json(traj.states.front());
  j["final"] = point_json(traj.states.back());
  j["energy_initial"] = traj.energy.front();
  j["energy_final"] = traj.energy.back();
  j["max_energy_drift"] = traj.max_energy_drift;
  j["aborted"] = traj.aborted;
  if (traj.aborted) j["abort_reason"] = traj.abort_reason;

  sink.csv_file("trajectory.csv", "t,x,y,u,v,H", rows, traj.aborted);
  sink.json_file("report.json", j, traj.aborted);
  if (traj.aborted)
    fail(ErrorCode::newton_divergence,
         "integration aborted: " + traj.abort_reason +
             " (partial artifacts kept with .partial suffix)");
}

void run_trace(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "trace"});
  cfg.check_keys("trace", {"x", "y", "u", "v", "steps", "ds"});
  Model m = model_from_config(cfg);
  PhasePoint guess = point_from(cfg, "trace");
  long steps = cfg.get_long("trace", "steps", 200);
  double ds = cfg.get_double("trace", "ds", 0.01);
  if (steps < 1) throw ConfigError(0, 0, "'steps' must be >= 1");
  if (ds == 0.0) throw ConfigError(0, 0, "'ds' must be nonzero");

  std::vector<PhasePoint> curve =
      trace_singular_curve(m, guess, static_cast<int>(steps), ds);

  std::vector<std::string> rows;
  rows.reserve(curve.size());
  std::map<std::string, int> counts;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const PhasePoint& p = curve[i];
    SingularPointRecord rec = classify_singular_point(m, p);
    const char* cls = classification_name(rec.classification);
    ++counts[cls];
    rows.push_back(std::to_string(i) + "," + fmt17(p.x) + "," + fmt17(p.y) +
                   "," + fmt17(p.u) + "," + fmt17(p.v) + "," +
                   fmt17(rec.delta_value) + "," + cls);
  }

  json j = base_report("trace-singular", cfg, m, seed);
  j["steps"] = steps;
  j["ds"] = ds;
  j["points"] = curve.size();
  j["start"] = point_json(curve.front());
  j["end"] = point_json(curve.back());
  json jc = json::object();
  for (const auto& [k, n] : counts) jc[k] = n;
  j["classification_counts"] = jc;

  sink.csv_file("singular_curve.csv", "index,x,y,u,v,delta,classification",
                rows);
  sink.json_file("report.json", j);
}

json trace_json(const SingularTrace& t) {
  json j;
  j["point"] = point_json(t.point);
  j["c"] = t.c;
  j["transversality"] = t.transversality;
  return j;
}

std::optional<PhasePoint> optional_guess(const Config& cfg,
                                         const std::string& sec) {
  bool any = false, all = true;
  for (const char* k : {"x", "y", "u", "v"}) {
    bool present = cfg.find(sec, k) != nullptr;
    any = any || present;
    all = all && present;
  }
  if (!any) return std::nullopt;
  if (!all)
    throw ConfigError(0, 0,
                      "a trace guess needs all four of x, y, u, v in [" + sec +
                          "]");
  return point_from(cfg, sec);
}

void run_reduce(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "reduce"});
  cfg.check_keys("reduce", {"c", "kind", "x", "y", "u", "v", "shift_check",
                            "shift_half_width", "shift_samples"});
  Model m = model_from_config(cfg);
  double c = cfg.require_double("reduce", "c");
  std::string kind = cfg.require("reduce", "kind");
  std::optional<PhasePoint> guess = optional_guess(cfg, "reduce");

  json j = base_report("reduce", cfg, m, seed);
  j["kind"] = kind;
  j["c"] = c;
  SingularTrace trace;
  if (kind == "fold") {
    FoldLimitSystem sys =
        fold_coefficients(m, c, guess.value_or(PhasePoint{}));
    trace = sys.trace;
    j["trace"] = trace_json(sys.trace);
    j["alpha_c"] = sys.alpha_c;
    j["gamma_c"] = sys.gamma_c;
    j["s1"] = sys.s1;
    j["alpha_residual"] = sys.alpha_residual;
    j["beta_residual"] = sys.beta_residual;
  } else if (kind == "cusp") {
    CuspLimitSystem sys =
        cusp_coefficients(m, c, guess.value_or(PhasePoint{}));
    trace = sys.trace;
    j["trace"] = trace_json(sys.trace);
    j["rho"] = sys.rho;
    j["sigma"] = sys.sigma;
    j["beta"] = sys.beta;
    j["alpha"] = sys.alpha;
    j["beta_literal"] = sys.beta_literal;
    j["genericity_det"] = sys.genericity_det;
    j["generic"] = sys.generic;
  } else {
    const ConfigEntry* e = cfg.find("reduce", "kind");
    throw ConfigError(e->line, e->value_col,
                      "'kind' must be 'fold' or 'cusp', got '" + kind + "'");
  }

  if (cfg.get_bool("reduce", "shift_check", false)) {
    double hw = cfg.get_double("reduce", "shift_half_width", 0.1);
    long ns = cfg.get_long("reduce", "shift_samples", 50);
    positive(cfg, "reduce", "shift_half_width", hw);
    if (ns < 1) throw ConfigError(0, 0, "'shift_samples' must be >= 1");
    NormalShiftReport rep =
        normal_shift_check(m, trace.point, hw, static_cast<int>(ns), seed);
    j["shift_check"] = json{{"samples", rep.samples},
                            {"max_residual", rep.max_residual},
                            {"seed", seed}};
  }
  sink.json_file("coefficients.json", j);
}

void run_painleve(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "painleve"});
  cfg.check_keys("painleve", {"c", "kind", "a_offset", "xdot"});
  Model m = model_from_config(cfg);
  double c = cfg.require_double("painleve", "c");
  std::string kind = cfg.require("painleve", "kind");

  json j = base_report("painleve", cfg, m, seed);
  j["kind"] = kind;
  j["c"] = c;
  if (kind == "fold") {
    for (const char* k : {"a_offset", "xdot"})
      if (const ConfigEntry* e = cfg.find("painleve", k))
        throw ConfigError(e->line, 1,
                          std::string("'") + k + "' only applies to kind = "
                                                 "cusp");
    FoldLimitSystem sys = fold_coefficients(m, c);
    PiScalingRecord rec = to_standard_form(sys);
    j["trace"] = trace_json(sys.trace);
    j["coefficients"] = json{{"alpha_c", sys.alpha_c},
                             {"gamma_c", sys.gamma_c},
                             {"s1", sys.s1}};
    j["standard_form"] = json{{"alpha0", rec.alpha0},
                              {"gamma0", rec.gamma0},
                              {"lambda_x", rec.lambda_x},
                              {"lambda_z", rec.lambda_z},
                              {"verify_deviation", rec.verify_deviation}};
  } else if (kind == "cusp") {
    CuspLimitSystem sys = cusp_coefficients(m, c);
    sys.a_offset = cfg.get_double("painleve", "a_offset", 0.0);
    std::string xdot = cfg.get_string("painleve", "xdot", "rho");
    if (xdot != "rho" && xdot != "sigma") {
      const ConfigEntry* e = cfg.find("painleve", "xdot");
      throw ConfigError(e->line, e->value_col,
                        "'xdot' must be 'rho' or 'sigma'");
    }
    XdotConstant which =
        xdot == "rho" ? XdotConstant::rho : XdotConstant::sigma;
    PiiScalingRecord rec = to_standard_form(sys, which);
    j["trace"] = trace_json(sys.trace);
    j["xdot_constant"] = xdot;
    j["coefficients"] = json{{"rho", sys.rho},
                             {"sigma", sys.sigma},
                             {"beta", sys.beta},
                             {"alpha", sys.alpha},
                             {"beta_literal", sys.beta_literal},
                             {"genericity_det", sys.genericity_det},
                             {"generic", sys.generic},
                             {"a_offset", sys.a_offset}};
    j["standard_form"] = json{{"lambda_x", rec.lambda_x},
                              {"lambda_z", rec.lambda_z},
                              {"a_param", rec.a_param},
                              {"real_scalings", rec.real_scalings},
                              {"verify_deviation", rec.verify_deviation}};
  } else {
    const ConfigEntry* e = cfg.find("painleve", "kind");
    throw ConfigError(e->line, e->value_col,
                      "'kind' must be 'fold' or 'cusp', got '" + kind + "'");
  }
  sink.json_file("coefficients.json", j);
}

json rows_json(const std::vector<StudyRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    json jr;
    jr["epsilon"] = r.epsilon;
    jr["r"] = r.r;
    jr["sup_dev"] = r.sup_dev;
    jr["q_fit"] = r.q_fit;
    jr["a_offset"] = r.a_offset;
    arr.push_back(jr);
  }
  return arr;
}

void run_study(const Config& cfg, const Sink& sink, std::uint64_t seed,
               SingKind kind) {
  cfg.check_sections({"model", "study"});
  std::vector<std::string> allowed{"c",         "epsilons",  "window",
                                   "init",      "h_divisor", "limit_tol",
                                   "record_cap"};
  if (kind == SingKind::cusp) {
    allowed.push_back("beta");
    allowed.push_back("xdot");
  }
  cfg.check_keys("study", allowed);
  Model m = model_from_config(cfg);
  double c = cfg.require_double("study", "c");
  std::vector<double> epsilons = cfg.require_list("study", "epsilons");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    const ConfigEntry* e = cfg.find("study", "epsilons");
    if (!(epsilons[i] > 0))
      throw ConfigError(e->line, e->value_col,
                        "'epsilons' must all be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1]))
      throw ConfigError(e->line, e->value_col,
                        "'epsilons' must be strictly decreasing");
  }
  std::array<double, 2> window = cfg.require_pair("study", "window");
  std::array<double, 2> init = cfg.require_pair("study", "init");
  if (!(window[1] > window[0]))
    throw ConfigError(0, 0, "'window' must satisfy lo < hi");

  StudyOptions opt;
  opt.kind = kind;
  opt.h_divisor = cfg.get_double("study", "h_divisor", opt.h_divisor);
  opt.limit_tol = cfg.get_double("study", "limit_tol", opt.limit_tol);
  opt.record_cap =
      static_cast<int>(cfg.get_long("study", "record_cap", opt.record_cap));
  positive(cfg, "study", "h_divisor", opt.h_divisor);
  positive(cfg, "study", "limit_tol", opt.limit_tol);
  if (opt.record_cap < 16) throw ConfigError(0, 0, "'record_cap' must be >= 16");
  std::string beta = cfg.get_string("study", "beta", "a2_v");
  std::string xdot = cfg.get_string("study", "xdot", "rho");
  if (beta != "a2_v" && beta != "literal")
    throw ConfigError(0, 0, "'beta' must be 'a2_v' or 'literal'");
  if (xdot != "rho" && xdot != "sigma")
    throw ConfigError(0, 0, "'xdot' must be 'rho' or 'sigma'");
  opt.beta_variant =
      beta == "a2_v" ? BetaVariant::a2_v : BetaVariant::literal;
  opt.xdot_constant =
      xdot == "rho" ? XdotConstant::rho : XdotConstant::sigma;

  ConvergenceStudy study =
      convergence_study(m, c, epsilons, window, init, opt);

  std::vector<std::string> rows;
  rows.reserve(study.rows.size());
  for (const auto& r : study.rows)
    rows.push_back(fmt17(r.epsilon) + "," + fmt17(r.r) + "," +
                   fmt17(r.sup_dev) + "," + fmt17(r.q_fit));

  json j = base_report(kind == SingKind::fold ? "verify-fold" : "verify-cusp",
                       cfg, m, seed);
  j["kind"] = kind == SingKind::fold ? "fold" : "cusp";
  j["c"] = c;
  j["window"] = json::array({window[0], window[1]});
  j["init"] = json::array({init[0], init[1]});
  j["h_divisor"] = opt.h_divisor;
  j["limit_tol"] = opt.limit_tol;
  j["record_cap"] = opt.record_cap;
  if (kind == SingKind::fold) {
    const FoldLimitSystem& sys = *study.fold;
    j["trace"] = trace_json(sys.trace);
    j["constants"] = json{{"alpha_c", sys.alpha_c},
                          {"gamma_c", sys.gamma_c},
                          {"s1", sys.s1}};
  } else {
    const CuspLimitSystem& sys = *study.cusp;
    j["trace"] = trace_json(sys.trace);
    j["constants"] = json{{"rho", sys.rho},
                          {"sigma", sys.sigma},
                          {"beta", sys.beta},
                          {"alpha", sys.alpha},
                          {"beta_literal", sys.beta_literal},
                          {"genericity_det", sys.genericity_det},
                          {"generic", sys.generic}};
    j["beta_variant"] = beta;
    j["xdot_constant"] = xdot;
  }
  j["rows"] = rows_json(study.rows);
  j["decreasing"] = study.decreasing;
  if (kind == SingKind::cusp) {
    j["other_variant"] =
        json{{"beta_variant", beta == "a2_v" ? "literal" : "a2_v"},
             {"rows", rows_json(study.other_variant_rows)},
             {"decreasing", study.other_variant_decreasing}};
  }

  sink.csv_file("study.csv", "epsilon,r,sup_dev,q_fit", rows);
  sink.json_file("report.json", j);
}

void run_form_check(const Config& cfg, const Sink& sink, std::uint64_t seed) {
  cfg.check_sections({"model", "form"});
  cfg.check_keys("form", {"x", "y", "u", "v", "epsilon"});
  Model m = model_from_config(cfg);
  PhasePoint p = point_from(cfg, "form");
  double eps = cfg.require_double("form", "epsilon");
  if (eps < 0) throw ConfigError(0, 0, "'epsilon' must be non-negative");

  FormDeterminantReport rep = form_determinants(m, p, eps);
  json j = base_report("form-check", cfg, m, seed);
  j["point"] = point_json(p);
  j["epsilon"] = rep.epsilon;
  j["w"] = rep.w;
  j["f0"] = rep.f0;
  j["f1"] = rep.f1;
  j["f2"] = rep.f2;
  j["det_d"] = rep.det_d;
  j["det_c"] = rep.det_c;
  sink.json_file("report.json", j);
}

std::string describe(const ConfigError& e) {
  if (e.line() <= 0) return std::string("config error: ") + e.what();
  return "config error at line " + std::to_string(e.line()) + ", column " +
         std::to_string(e.column()) + ": " + e.what();
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ok:
      return 0;
    case ErrorCode::parse_error:
    case ErrorCode::unbound_parameter:
    case ErrorCode::config_error:
    case ErrorCode::io_error:
      return 3;
    case ErrorCode::chart_invalid:
    case ErrorCode::not_on_slow_manifold:
    case ErrorCode::branch_invalid:
    case ErrorCode::not_a_fold:
    case ErrorCode::not_a_cusp:
    case ErrorCode::classification_mismatch:
    case ErrorCode::degenerate_coefficients:
    case ErrorCode::pole_in_window:
    case ErrorCode::mismatched_epsilon:
    case ErrorCode::transversality_failure:
      return 2;
    default:
      return 1;
  }
}

RunResult run_command(const std::string& command,
                      const std::string& config_path,
                      const std::string& out_dir, std::uint64_t seed) {
  try {
    Config cfg = Config::load(config_path);
    Sink sink;
    sink.dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    sink.config_hash = cfg.hash();
    try {
      fs::create_directories(sink.dir);
    } catch (const fs::filesystem_error& e) {
      fail(ErrorCode::io_error,
           "cannot create output directory '" + sink.dir.string() + "': " +
               e.what());
    }

    if (command == "analyze")
      run_analyze(cfg, sink, seed);
    else if (command == "integrate")
      run_integrate(cfg, sink, seed);
    else if (command == "trace-singular")
      run_trace(cfg, sink, seed);
    else if (command == "reduce")
      run_reduce(cfg, sink, seed);
    else if (command == "painleve")
      run_painleve(cfg, sink, seed);
    else if (command == "verify-fold")
      run_study(cfg, sink, seed, SingKind::fold);
    else if (command == "verify-cusp")
      run_study(cfg, sink, seed, SingKind::cusp);
    else if (command == "form-check")
      run_form_check(cfg, sink, seed);
    else
      throw ConfigError(0, 0, "unknown command '" + command + "'");
    return {0, ErrorCode::ok, ""};
  } catch (const ConfigError& e) {
    return {3, ErrorCode::config_error, describe(e)};
  } catch (const ParseError& e) {
    return {3, ErrorCode::parse_error,
            std::string("model parse error: ") + e.what()};
  } catch (const Error& e) {
    return {exit_code_for(e.code()), e.code(),
            std::string(error_code_name(e.code())) + ": " + e.what()};
  } catch (const std::exception& e) {
    return {1, ErrorCode::internal,
            std::string("unexpected error: ") + e.what()};
  }
}

}  // namespace slowfast
