#include "minkray/config.hpp"

#include <algorithm>
#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace minkray {

namespace {

const std::vector<std::pair<Command, std::string>>& command_table() {
  static const std::vector<std::pair<Command, std::string>> t = {
      {Command::Forward, "forward"},     {Command::SliceCheck, "slice-check"}, {Command::FreqSolve, "freq-solve"},
      {Command::DetMap, "det-map"},      {Command::Decompose, "decompose"},    {Command::Certify, "certify"},
      {Command::EndToEnd, "e2e"},        {Command::GaugeCheck, "gauge-check"},
  };
  return t;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v + ",") {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end || !std::isfinite(x)) throw ConfigError(key, "expected a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long x = 0;
  const char* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v, long long lo, long long hi) {
  const long long x = to_integer(key, v);
  if (x < lo || x > hi)
    throw ConfigError(key, "value " + v + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

double positive(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (!(x > 0.0)) throw ConfigError(key, "must be positive, got " + v);
  return x;
}

double nonnegative(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x < 0.0) throw ConfigError(key, "must be non-negative, got " + v);
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& s : split_list(v)) out.push_back(to_double(key, s));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

Interpolation to_interpolation(const std::string& key, const std::string& v) {
  if (v == "multilinear" || v == "linear") return Interpolation::Multilinear;
  if (v == "cubic" || v == "bspline") return Interpolation::CubicBSpline;
  throw ConfigError(key, "expected multilinear or cubic, got '" + v + "'");
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

struct KeySpec {
  Setter set;
  std::set<Command> commands;  // empty: every command
};

constexpr Command kFwd = Command::Forward, kSlice = Command::SliceCheck, kFreq = Command::FreqSolve,
                  kDet = Command::DetMap, kDec = Command::Decompose, kCert = Command::Certify,
                  kE2E = Command::EndToEnd, kGauge = Command::GaugeCheck;

const std::map<std::string, KeySpec>& schema() {
  using C = ExperimentConfig;
  using S = std::string;
  static const std::map<std::string, KeySpec> m = {
      {"seed", {[](C& c, const S& k, const S& v) { c.seed = std::uint64_t(to_integer(k, v, 0, (1LL << 62))); }, {}}},
      {"workers",
       {[](C& c, const S& k, const S& v) { c.workers = v == "auto" ? 0 : int(to_integer(k, v, 1, 1024)); }, {}}},
      {"out", {[](C& c, const S& k, const S& v) {
                 if (v.empty()) throw ConfigError(k, "empty path");
                 c.out = v;
               },
               {}}},

      {"grid.n", {[](C& c, const S& k, const S& v) {
                    const long long n = to_integer(k, v);
                    if (n < 3) throw ConfigError(k, "spatial dimension must be at least 3, got " + v);
                    if (n > 8) throw ConfigError(k, "spatial dimension above 8 is not supported, got " + v);
                    c.n = int(n);
                  },
                  {kFwd, kSlice, kDec, kE2E, kGauge}}},
      {"grid.N", {[](C& c, const S& k, const S& v) { c.N = to_integer(k, v, 4, 4096); }, {kFwd, kSlice, kE2E, kGauge}}},
      {"grid.half_width",
       {[](C& c, const S& k, const S& v) { c.half_width = positive(k, v); }, {kFwd, kSlice, kDec, kE2E, kGauge}}},
      {"grid.refine", {[](C& c, const S& k, const S& v) { c.N_refine = to_integer(k, v, 0, 4096); }, {kSlice}}},

      {"direction.theta0", {[](C& c, const S& k, const S& v) {
                              const std::vector<double> t = to_doubles(k, v);
                              c.theta0 = Eigen::Map<const Vec>(t.data(), Index(t.size()));
                            },
                            {kFwd, kSlice, kFreq, kE2E, kGauge}}},

      {"phantom.kind", {[](C& c, const S& k, const S& v) {
                          if (v != "gaussian" && v != "solenoidal" && v != "gauge")
                            throw ConfigError(k, "expected gaussian, solenoidal or gauge, got '" + v + "'");
                          c.phantom = v;
                        },
                        {kFwd}}},
      {"phantom.input", {[](C& c, const S& k, const S& v) {
                           if (v.empty()) throw ConfigError(k, "empty path");
                           c.input = v;
                         },
                         {kFwd, kDec}}},
      {"phantom.width", {[](C& c, const S& k, const S& v) { c.width = positive(k, v); }, {kFwd, kSlice}}},
      {"phantom.terms",
       {[](C& c, const S& k, const S& v) { c.terms = int(to_integer(k, v, 1, 64)); }, {kFwd, kE2E, kGauge}}},
      {"phantom.smoothness",
       {[](C& c, const S& k, const S& v) { c.smoothness = int(to_integer(k, v, 4, 32)); }, {kFwd, kE2E, kGauge}}},
      {"phantom.radius_fraction",
       {[](C& c, const S& k, const S& v) { c.radius_fraction = positive(k, v); }, {kFwd, kE2E, kGauge}}},
      {"phantom.center_spread",
       {[](C& c, const S& k, const S& v) { c.center_spread = nonnegative(k, v); }, {kFwd, kE2E, kGauge}}},
      {"phantom.gauge_scale", {[](C& c, const S& k, const S& v) { c.gauge_scale = nonnegative(k, v); }, {kGauge}}},

      {"cone.half_width", {[](C& c, const S& k, const S& v) { c.cone.half_width = positive(k, v); }, {kE2E, kGauge}}},
      {"cone.resolution",
       {[](C& c, const S& k, const S& v) { c.cone.resolution = int(to_integer(k, v, 1, 101)); }, {kE2E, kGauge}}},
      {"cone.scales", {[](C& c, const S& k, const S& v) {
                         c.cone.scales = to_doubles(k, v);
                         for (double s : c.cone.scales)
                           if (!(s > 0.0)) throw ConfigError(k, "scales must be positive");
                       },
                       {kE2E, kGauge}}},
      {"cone.random_samples",
       {[](C& c, const S& k, const S& v) { c.cone.random_samples = int(to_integer(k, v, 0, 1000000)); },
        {kE2E, kGauge}}},

      {"fit.samples", {[](C& c, const S& k, const S& v) { c.fit.samples = int(to_integer(k, v, 5, 101)); },
                       {kFreq, kE2E, kGauge}}},
      {"fit.max_angle", {[](C& c, const S& k, const S& v) { c.fit.max_angle = positive(k, v); }, {kFreq, kE2E, kGauge}}},

      {"rays.count", {[](C& c, const S& k, const S& v) { c.rays = int(to_integer(k, v, 1, 1000000)); }, {kGauge}}},
      {"rays.spread", {[](C& c, const S& k, const S& v) { c.spread = nonnegative(k, v); }, {kGauge}}},
      {"rays.interpolation",
       {[](C& c, const S& k, const S& v) { c.interpolation = to_interpolation(k, v); }, {kFwd}}},

      {"slice.frequencies",
       {[](C& c, const S& k, const S& v) { c.frequencies = int(to_integer(k, v, 1, 100000)); }, {kSlice}}},
      {"slice.min_frequency", {[](C& c, const S& k, const S& v) { c.min_frequency = positive(k, v); }, {kSlice}}},
      {"slice.max_frequency", {[](C& c, const S& k, const S& v) { c.max_frequency = positive(k, v); }, {kSlice}}},

      {"recovery.spectra",
       {[](C& c, const S& k, const S& v) { c.spectra = int(to_integer(k, v, 1, 10000000)); }, {kFreq}}},
      {"recovery.rank_dims", {[](C& c, const S& k, const S& v) {
                                c.rank_dims.clear();
                                for (const S& s : split_list(v)) c.rank_dims.push_back(int(to_integer(k, s, 3, 8)));
                              },
                              {kFreq}}},
      {"recovery.rank_points",
       {[](C& c, const S& k, const S& v) { c.rank_points = int(to_integer(k, v, 0, 1000000)); }, {kFreq}}},
      {"recovery.interpolation",
       {[](C& c, const S& k, const S& v) { c.recovery_interpolation = to_interpolation(k, v); }, {kE2E, kGauge}}},
      {"recovery.noise_sigma",
       {[](C& c, const S& k, const S& v) { c.noise_sigma = nonnegative(k, v); }, {kE2E, kGauge}}},
      {"recovery.min_frequencies",
       {[](C& c, const S& k, const S& v) { c.min_frequencies = int(to_integer(k, v, 0, 10000000)); }, {kE2E}}},

      {"detmap.half_width", {[](C& c, const S& k, const S& v) { c.detmap_half_width = positive(k, v); }, {kDet}}},
      {"detmap.resolution",
       {[](C& c, const S& k, const S& v) { c.detmap_resolution = int(to_integer(k, v, 1, 401)); }, {kDet}}},

      {"decompose.levels", {[](C& c, const S& k, const S& v) {
                              c.levels.clear();
                              for (const S& s : split_list(v)) c.levels.push_back(to_integer(k, s, 4, 1024));
                            },
                            {kDec}}},
      {"decompose.method", {[](C& c, const S& k, const S& v) {
                              if (v != "auto" && v != "krylov" && v != "direct")
                                throw ConfigError(k, "expected auto, krylov or direct, got '" + v + "'");
                              c.method = v;
                            },
                            {kDec}}},
      {"decompose.kernel_checks", {[](C& c, const S& k, const S& v) { c.kernel_checks = to_bool(k, v); }, {kDec}}},
      {"decompose.kernel_fields",
       {[](C& c, const S& k, const S& v) { c.kernel_fields = int(to_integer(k, v, 1, 100000)); }, {kDec}}},

      {"certify.n_min", {[](C& c, const S& k, const S& v) { c.n_min = int(to_integer(k, v, 3, 16)); }, {kCert}}},
      {"certify.n_max", {[](C& c, const S& k, const S& v) { c.n_max = int(to_integer(k, v, 3, 16)); }, {kCert}}},
      {"certify.samples",
       {[](C& c, const S& k, const S& v) { c.samples = to_integer(k, v, 1, 1000000000); }, {kCert}}},
      {"certify.refine_starts",
       {[](C& c, const S& k, const S& v) { c.refine_starts = int(to_integer(k, v, 0, 10000)); }, {kCert}}},

      {"gauge.recovery", {[](C& c, const S& k, const S& v) { c.gauge_recovery = to_bool(k, v); }, {kGauge}}},

      {"tolerance.gauge_kernel", {[](C& c, const S& k, const S& v) { c.tol_gauge_kernel = positive(k, v); }, {kGauge}}},
      {"tolerance.slice", {[](C& c, const S& k, const S& v) { c.tol_slice = positive(k, v); }, {kSlice}}},
      {"tolerance.slice_factor_lo",
       {[](C& c, const S& k, const S& v) { c.slice_factor_lo = positive(k, v); }, {kSlice}}},
      {"tolerance.slice_factor_hi",
       {[](C& c, const S& k, const S& v) { c.slice_factor_hi = positive(k, v); }, {kSlice}}},
      {"tolerance.determinant", {[](C& c, const S& k, const S& v) { c.tol_det = positive(k, v); }, {kFreq, kDet}}},
      {"tolerance.recovery", {[](C& c, const S& k, const S& v) { c.tol_recovery = positive(k, v); }, {kFreq}}},
      {"tolerance.e2e_median",
       {[](C& c, const S& k, const S& v) { c.tol_e2e_median = positive(k, v); }, {kE2E, kGauge}}},
      {"tolerance.e2e_max", {[](C& c, const S& k, const S& v) { c.tol_e2e_max = positive(k, v); }, {kE2E, kGauge}}},
      {"tolerance.order_lo", {[](C& c, const S& k, const S& v) { c.order_lo = positive(k, v); }, {kDec}}},
      {"tolerance.order_hi", {[](C& c, const S& k, const S& v) { c.order_hi = positive(k, v); }, {kDec}}},
      {"tolerance.diagnostics", {[](C& c, const S& k, const S& v) { c.tol_diagnostics = positive(k, v); }, {kDec}}},
      {"tolerance.ellipticity", {[](C& c, const S& k, const S& v) { c.tol_ellipticity = positive(k, v); }, {kCert}}},
      {"tolerance.kernel", {[](C& c, const S& k, const S& v) { c.tol_kernel = positive(k, v); }, {kDec}}},
      {"tolerance.energy", {[](C& c, const S& k, const S& v) { c.tol_energy = positive(k, v); }, {kDec}}},
      {"tolerance.adjoint", {[](C& c, const S& k, const S& v) { c.tol_adjoint = positive(k, v); }, {kDec}}},
      {"tolerance.gauge_factor", {[](C& c, const S& k, const S& v) { c.gauge_factor = positive(k, v); }, {kGauge}}},
  };
  return m;
}

struct Entry {
  std::string value;
  int line = 0;
};

}  // namespace

std::string command_name(Command c) {
  for (const auto& [cmd, name] : command_table())
    if (cmd == c) return name;
  return "?";
}

std::optional<Command> parse_command(const std::string& name) {
  for (const auto& [cmd, s] : command_table())
    if (s == name) return cmd;
  return std::nullopt;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : command_table()) v.push_back(e.second);
    return v;
  }();
  return names;
}

ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides) {
  ExperimentConfig cfg;
  cfg.text = text;

  // pass 1: syntax, collect entries and the raw cone section
  std::map<std::string, Entry> entries;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool in_cone = false;
  std::vector<std::string> cone_lines;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string body = trim(line.substr(0, line.find('#')));
    const std::string where = "line " + std::to_string(lineno);
    if (!body.empty() && body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (section.empty()) throw ConfigError(where, "empty section name");
      in_cone = section == "cone";
      if (in_cone) cone_lines.push_back(line);
      continue;
    }
    if (in_cone) cone_lines.push_back(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) throw ConfigError(where, "missing key");
    const std::string path = section.empty() ? key : section + "." + key;
    if (entries.count(path)) throw ConfigError(path, "duplicate key (" + where + ")");
    entries[path] = {trim(body.substr(eq + 1)), lineno};
  }
  while (!cone_lines.empty() && trim(cone_lines.back()).empty()) cone_lines.pop_back();
  cfg.cone_text = cone_lines;

  // command
  std::optional<std::string> cmd = overrides.command;
  if (!cmd) {
    if (auto it = entries.find("command"); it != entries.end()) cmd = it->second.value;
  }
  if (!cmd || cmd->empty()) throw ConfigError("command", "a command is required");
  const auto parsed = parse_command(*cmd);
  if (!parsed) throw ConfigError("command", "unknown command '" + *cmd + "'");
  cfg.command = *parsed;
  entries.erase("command");

  // the n = 3 end-to-end cone is the default; the gauge-check ray spread
  // keeps its own default
  cfg.cone.half_width = 0.1;
  cfg.cone.resolution = 3;
  cfg.cone.scales = {3.0, 5.0, 8.0, 12.0};

  // pass 2: values
  const auto& table = schema();
  for (const auto& [path, e] : entries) {
    const auto it = table.find(path);
    if (it == table.end()) {
      const auto dot = path.find('.');
      const std::string sec = dot == std::string::npos ? "" : path.substr(0, dot);
      const bool known_section =
          std::any_of(table.begin(), table.end(), [&](const auto& kv) { return kv.first.rfind(sec + ".", 0) == 0; });
      throw ConfigError(path, !sec.empty() && !known_section ? "unknown section '" + sec + "'" : "unknown key");
    }
    if (!it->second.commands.empty() && !it->second.commands.count(cfg.command))
      throw ConfigError(path, "not used by command '" + command_name(cfg.command) + "'");
    it->second.set(cfg, path, e.value);
  }

  if (overrides.seed) cfg.seed = *overrides.seed;
  if (overrides.workers) {
    if (*overrides.workers < 0) throw ConfigError("workers", "must be non-negative");
    cfg.workers = *overrides.workers;
  }
  if (overrides.out) cfg.out = *overrides.out;
  cfg.cone.seed = cfg.seed;

  // cross-key validation
  if (cfg.theta0.size() == 0) {
    cfg.theta0 = Vec::Unit(cfg.n, 0);
  } else {
    if (cfg.theta0.size() != cfg.n)
      throw ConfigError("direction.theta0", "needs " + std::to_string(cfg.n) + " entries, got " +
                                                std::to_string(cfg.theta0.size()));
    if (std::abs(cfg.theta0.norm() - 1.0) > Direction::kUnitTol) throw ConfigError("direction.theta0", "not a unit vector");
  }
  if ((cfg.command == Command::EndToEnd || cfg.command == Command::FreqSolve) && cfg.theta0 != Vec::Unit(cfg.n, 0))
    throw ConfigError("direction.theta0", "the frequency solver is set up for theta0 = e1");
  if (cfg.command == Command::SliceCheck && cfg.N_refine != 0 && cfg.N_refine <= cfg.N)
    throw ConfigError("grid.refine", "must exceed grid.N (or be 0 to skip refinement)");
  if (cfg.min_frequency >= cfg.max_frequency)
    throw ConfigError("slice.max_frequency", "must exceed slice.min_frequency");
  if (cfg.n_min > cfg.n_max) throw ConfigError("certify.n_max", "must be at least certify.n_min");
  if (cfg.order_lo >= cfg.order_hi) throw ConfigError("tolerance.order_hi", "must exceed tolerance.order_lo");
  if (cfg.slice_factor_lo >= cfg.slice_factor_hi)
    throw ConfigError("tolerance.slice_factor_hi", "must exceed tolerance.slice_factor_lo");
  if (cfg.levels.empty()) throw ConfigError("decompose.levels", "empty list");
  if (cfg.cone.half_width >= 0.5) throw ConfigError("cone.half_width", "must be below 0.5");
  return cfg;
}

}  // namespace minkray
