#include "minkray/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "minkray/ntf.hpp"
#include "minkray/parallel.hpp"

namespace minkray {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_short(v[i]);
  return s;
}

const char* interpolation_name(Interpolation i) {
  return i == Interpolation::CubicBSpline ? "cubic" : "multilinear";
}

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, LogLevel log) : cfg_(cfg), log_(log), workers_(resolve_workers(cfg.workers)) {
    report_.config = cfg;
  }

  RunReport run() {
    namespace fs = std::filesystem;
    fs::create_directories(cfg_.out);
    say(LogLevel::Info, "command " + command_name(cfg_.command) + ", output " + cfg_.out);
    switch (cfg_.command) {
      case Command::Forward: forward(); break;
      case Command::SliceCheck: slice_check(); break;
      case Command::FreqSolve: freq_solve(); break;
      case Command::DetMap: det_map(); break;
      case Command::Decompose: decompose_cmd(); break;
      case Command::Certify: certify(); break;
      case Command::EndToEnd: end_to_end(); break;
      case Command::GaugeCheck: gauge_check(); break;
    }
    write_text(cfg_.out + "/report.txt", report_.text());
    write_text(cfg_.out + "/report.kv", report_.kv());
    say(LogLevel::Info, std::string("result ") + (report_.passed() ? "PASS" : "FAIL"));
    return std::move(report_);
  }

 private:
  void say(LogLevel level, const std::string& msg) const {
    if (level <= log_ && log_ != LogLevel::Quiet) std::cerr << "minkray: " << msg << "\n";
  }

  static void write_text(const std::string& path, const std::string& body) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << body;
    if (!os) throw Error("cannot write " + path);
  }

  // Runs one stage; failures are recorded under the stage id and reported
  // back as false so later dependent stages can be skipped.
  template <class Fn>
  bool stage(const std::string& id, Fn&& fn) {
    StageRecord s;
    s.id = id;
    say(LogLevel::Info, "stage " + id);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const std::exception& e) {
      s.ok = false;
      s.error = e.what();
      say(LogLevel::Error, "stage " + id + " failed: " + s.error);
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report_.stages.push_back(s);
    return s.ok;
  }

  void check(CheckResult r) {
    say(r.passed ? LogLevel::Info : LogLevel::Warn,
        "check " + std::to_string(r.id) + " " + r.title + ": " + (r.passed ? "pass" : "FAIL"));
    for (const auto& [k, v] : r.metrics) say(LogLevel::Debug, "  " + k + " = " + fmt_short(v));
    report_.checks.push_back(std::move(r));
  }

  void value(const std::string& k, const std::string& v) { report_.values.emplace_back(k, v); }
  void value(const std::string& k, double v) { value(k, fmt(v)); }

  template <class T>
  void artifact(const std::string& name, const T& object) {
    write_field(cfg_.out + "/" + name, object);
    report_.artifacts.push_back(name);
  }

  Grid grid() const { return Grid::cube(cfg_.n, cfg_.N, cfg_.half_width); }

  // placeholder for out-parameters that are assigned by the callee
  static Grid tiny(int n) { return Grid::cube(n, 8, 1.0); }

  SolenoidalSpec solenoidal() const {
    SolenoidalSpec s;
    s.terms = cfg_.terms;
    s.smoothness = cfg_.smoothness;
    s.radius_fraction = cfg_.radius_fraction;
    s.center_spread = cfg_.center_spread;
    s.seed = cfg_.seed;
    return s;
  }

  EndToEndParams e2e_params() const {
    EndToEndParams p;
    p.n = cfg_.n;
    p.N = cfg_.N;
    p.half_width = cfg_.half_width;
    p.phantom = solenoidal();
    p.cone = cfg_.cone;
    p.fit = cfg_.fit;
    p.interpolation = cfg_.recovery_interpolation;
    p.noise_sigma = cfg_.noise_sigma;
    p.min_frequencies = cfg_.min_frequencies;
    p.median_tol = cfg_.tol_e2e_median;
    p.max_tol = cfg_.tol_e2e_max;
    p.seed = cfg_.seed;
    p.workers = workers_;
    return p;
  }

  void forward() {
    std::optional<SymTensorField> F;
    const std::string kind = cfg_.phantom.empty() ? "gaussian" : cfg_.phantom;
    if (!stage("phantom", [&] {
          if (!cfg_.input.empty()) {
            F.emplace(read_tensor(cfg_.input));
            value("phantom.source", cfg_.input);
          } else if (kind == "gaussian") {
            const Grid g = grid();
            std::mt19937_64 rng(cfg_.seed);
            std::uniform_real_distribution<double> U(0.5, 1.5);
            Vec w(g.dims() * (g.dims() + 1) / 2);
            for (Index c = 0; c < w.size(); ++c) w[c] = U(rng);
            F.emplace(phantom_gaussian(g, Vec::Zero(g.dims()), cfg_.width, w));
            value("phantom.source", kind);
          } else if (kind == "solenoidal") {
            F.emplace(phantom_solenoidal(grid(), solenoidal()).F);
            value("phantom.source", kind);
          } else {
            F.emplace(phantom_gauge(grid(), random_gauge_spec(grid(), cfg_.seed)).F);
            value("phantom.source", kind);
          }
          value("phantom.max_abs", F->max_abs());
          artifact("phantom.ntf", *F);
        }))
      return;
    stage("transform", [&] {
      if (F->n() != cfg_.theta0.size()) throw InvalidArgument("phantom dimension does not match direction.theta0");
      const Slab s = transform_slab(*F, Direction(cfg_.theta0), {}, workers_, cfg_.interpolation);
      value("slab.interpolation", interpolation_name(cfg_.interpolation));
      value("slab.spacing", s.spacing);
      std::string counts;
      for (Index c : s.counts) counts += (counts.empty() ? "" : "x") + std::to_string(c);
      value("slab.counts", counts);
      value("slab.covers_support", s.covers_support ? 1.0 : 0.0);
      value("slab.max_abs", s.values.abs().maxCoeff());
      artifact("slab.ntf", s);
      if (!s.covers_support) throw Error("slab lattice does not cover the projected support");
    });
  }

  void slice_check() {
    stage("slice", [&] {
      SliceParams p;
      p.n = cfg_.n;
      p.N = cfg_.N;
      p.N_refine = cfg_.N_refine;
      p.half_width = cfg_.half_width;
      p.width = cfg_.width;
      p.frequencies = cfg_.frequencies;
      p.min_frequency = cfg_.min_frequency;
      p.max_frequency = cfg_.max_frequency;
      p.theta0 = cfg_.theta0;
      p.tolerance = cfg_.tol_slice;
      p.factor_lo = cfg_.slice_factor_lo;
      p.factor_hi = cfg_.slice_factor_hi;
      p.seed = cfg_.seed;
      p.workers = workers_;
      check(check_slice_identity(p));
    });
  }

  void freq_solve() {
    stage("system", [&] {
      SystemParams p;
      p.rel_tol = cfg_.tol_det;
      check(check_system_at_zeta0(p));
    });
    stage("recovery", [&] {
      RecoveryParams p;
      p.spectra = cfg_.spectra;
      p.fit = cfg_.fit;
      p.tolerance = cfg_.tol_recovery;
      p.rank_dims = cfg_.rank_dims;
      p.rank_points = cfg_.rank_points;
      p.seed = cfg_.seed;
      p.workers = workers_;
      check(check_synthetic_recovery(p));
    });
  }

  void det_map() {
    stage("detmap", [&] {
      DetMapParams p;
      p.half_width = cfg_.detmap_half_width;
      p.resolution = cfg_.detmap_resolution;
      p.rel_tol = cfg_.tol_det;
      p.workers = workers_;
      DeterminantMap m;
      check(check_determinant_map(p, &m));
      artifact("detmap.ntf", m);
    });
  }

  SolverOptions solver() const {
    SolverOptions o;
    o.method = cfg_.method == "krylov"   ? SolverOptions::Method::Krylov
               : cfg_.method == "direct" ? SolverOptions::Method::Direct
                                         : SolverOptions::Method::Auto;
    return o;
  }

  void write_decomposition(const DecompositionResult& r) {
    artifact("F_tilde.ntf", r.F_tilde);
    artifact("lambda.ntf", r.lambda);
    artifact("v.ntf", r.v);
  }

  void decompose_cmd() {
    if (!cfg_.input.empty()) {
      std::optional<SymTensorField> F;
      if (!stage("load", [&] { F.emplace(read_tensor(cfg_.input)); })) return;
      stage("decompose", [&] {
        const DecompositionResult r = decompose(*F, solver());
        const auto& d = r.diagnostics;
        CheckResult c;
        c.id = 7;
        c.title = "decomposition diagnostics";
        c.metric("div_residual_rel", d.div_residual / d.field_scale);
        c.metric("trace_residual_rel", d.trace_residual / d.field_scale);
        c.metric("reconstruction_residual", d.reconstruction_residual);
        c.metric("solver_residual", d.solver_residual);
        c.metric("iterations", d.iterations);
        c.notes.push_back("solver " + d.method);
        c.passed = c.value("div_residual_rel") <= cfg_.tol_diagnostics &&
                   c.value("trace_residual_rel") <= cfg_.tol_diagnostics;
        write_decomposition(r);
        check(std::move(c));
      });
      return;
    }
    stage("convergence", [&] {
      DecompositionParams p;
      p.n = cfg_.n;
      p.levels = cfg_.levels;
      p.half_width = cfg_.half_width;
      p.order_lo = cfg_.order_lo;
      p.order_hi = cfg_.order_hi;
      p.diagnostics_tol = cfg_.tol_diagnostics;
      p.solver = solver();
      p.seed = cfg_.seed;
      const Grid t = tiny(cfg_.n);
      DecompositionResult finest{SymTensorField(t), ScalarField(t), VectorField(t), {}};
      check(check_decomposition(p, &finest));
      write_decomposition(finest);
    });
    if (cfg_.kernel_checks)
      stage("kernel", [&] {
        KernelParams p;
        p.fields = cfg_.kernel_fields;
        p.kernel_tol = cfg_.tol_kernel;
        p.energy_tol = cfg_.tol_energy;
        p.adjoint_tol = cfg_.tol_adjoint;
        p.seed = cfg_.seed;
        check(check_kernel_energy(p));
      });
  }

  void certify() {
    stage("certify", [&] {
      CertifyParams p;
      p.n_min = cfg_.n_min;
      p.n_max = cfg_.n_max;
      p.samples = cfg_.samples;
      p.refine_starts = cfg_.refine_starts;
      p.tolerance = cfg_.tol_ellipticity;
      p.seed = cfg_.seed;
      check(check_ellipticity(p));
    });
  }

  void recovery_table(const RecoveryTable& t) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%5s %11s %11s %11s %11s %4s %11s %11s", "k", "zeta_0", "zeta_1", "zeta_2", "zeta_3",
                  "ok", "rel_error", "sigma_min");
    report_.table.push_back(buf);
    for (std::size_t k = 0; k < t.results.size(); ++k) {
      const ConeResult& c = t.results[k];
      std::string row;
      std::snprintf(buf, sizeof buf, "%5zu", k);
      row += buf;
      for (Index i = 0; i < c.zeta.size(); ++i) {
        std::snprintf(buf, sizeof buf, " %11.6f", c.zeta[i]);
        row += buf;
      }
      std::snprintf(buf, sizeof buf, " %4s %11.3e %11.3e", c.ok ? "yes" : "no", t.errors[k], c.sigma_min);
      row += buf;
      if (!c.ok) row += "  " + c.error;
      report_.table.push_back(row);
    }
  }

  void end_to_end() {
    stage("recovery", [&] {
      RecoveryTable t;
      SymTensorField F(tiny(cfg_.n));
      check(check_end_to_end(e2e_params(), &t, &F));
      artifact("phantom.ntf", F);
      recovery_table(t);
    });
  }

  void gauge_check() {
    stage("gauge-kernel", [&] {
      GaugeKernelParams p;
      p.n = cfg_.n;
      p.N = cfg_.N;
      p.half_width = cfg_.half_width;
      p.rays = cfg_.rays;
      p.spread = cfg_.spread;
      p.theta0 = cfg_.theta0;
      p.tolerance = cfg_.tol_gauge_kernel;
      p.seed = cfg_.seed;
      p.workers = workers_;
      const Grid t = tiny(cfg_.n);
      GaugePhantom ph{SymTensorField(t), ScalarField(t), VectorField(t)};
      check(check_gauge_kernel(p, &ph));
      artifact("gauge_phantom.ntf", ph.F);
    });
    if (cfg_.gauge_recovery)
      stage("gauge-recovery", [&] {
        GaugeRecoveryParams p;
        p.base = e2e_params();
        p.gauge_scale = cfg_.gauge_scale;
        p.factor = cfg_.gauge_factor;
        check(check_gauge_insensitivity(p));
      });
  }

  ExperimentConfig cfg_;
  LogLevel log_;
  int workers_;
  RunReport report_;
};

}  // namespace

LogLevel parse_log_level(const char* text) {
  if (!text || !*text) return LogLevel::Warn;
  const std::string s = text;
  const std::vector<std::string> names = {"quiet", "error", "warn", "info", "debug"};
  for (std::size_t i = 0; i < names.size(); ++i)
    if (s == names[i] || s == std::to_string(i)) return LogLevel(i);
  throw InvalidArgument("MINKRAY_LOG: expected quiet, error, warn, info, debug or 0-4, got '" + s + "'");
}

bool RunReport::passed() const {
  for (const StageRecord& s : stages)
    if (!s.ok) return false;
  for (const CheckResult& c : checks)
    if (!c.passed) return false;
  return !stages.empty();
}

std::string RunReport::text() const {
  std::ostringstream os;
  os << "minkray " << command_name(config.command) << ": " << (passed() ? "PASS" : "FAIL") << "\n";
  os << "seed " << config.seed << ", workers " << resolve_workers(config.workers) << "\n";

  os << "\n[configuration]\n";
  if (config.text.empty())
    os << "(no configuration file; defaults)\n";
  else
    os << config.text << (config.text.back() == '\n' ? "" : "\n");

  if (config.command == Command::EndToEnd || config.command == Command::GaugeCheck) {
    os << "\n[cone as given]\n";
    if (config.cone_text.empty())
      os << "(default)\n";
    else
      for (const std::string& l : config.cone_text) os << l << "\n";
    os << "resolved: half_width " << fmt_short(config.cone.half_width) << ", resolution " << config.cone.resolution
       << ", random_samples " << config.cone.random_samples << ", scales " << join(config.cone.scales) << "\n";
  }

  os << "\n[stages]\n";
  for (const StageRecord& s : stages) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %-6s %9.3f s", s.id.c_str(), s.ok ? "ok" : "FAILED", s.seconds);
    os << buf;
    if (!s.ok) os << "  " << s.error;
    os << "\n";
  }

  os << "\n[checks]\n";
  if (checks.empty()) os << "(none)\n";
  for (const CheckResult& c : checks) {
    os << c.id << " " << (c.passed ? "PASS" : "FAIL") << "  " << c.title << "\n";
    for (const auto& [k, v] : c.metrics) os << "    " << k << " = " << fmt_short(v) << "\n";
    for (const std::string& n : c.notes) os << "    note: " << n << "\n";
  }

  if (!values.empty()) {
    os << "\n[values]\n";
    for (const auto& [k, v] : values) os << k << " = " << v << "\n";
  }
  if (!artifacts.empty()) {
    os << "\n[artifacts]\n";
    for (const std::string& a : artifacts) os << a << "\n";
  }
  if (!table.empty()) {
    os << "\n[recovery table]\n";
    for (const std::string& r : table) os << r << "\n";
  }
  return os.str();
}

std::string RunReport::kv() const {
  std::ostringstream os;
  os << "command=" << command_name(config.command) << "\n";
  os << "status=" << (passed() ? "pass" : "fail") << "\n";
  os << "seed=" << config.seed << "\n";
  for (const StageRecord& s : stages) {
    os << "stage." << s.id << ".ok=" << (s.ok ? 1 : 0) << "\n";
    if (!s.ok) os << "stage." << s.id << ".error=" << s.error << "\n";
  }
  for (const CheckResult& c : checks) {
    const std::string p = "check." + std::to_string(c.id) + ".";
    os << p << "passed=" << (c.passed ? 1 : 0) << "\n";
    for (const auto& [k, v] : c.metrics) os << p << k << "=" << fmt(v) << "\n";
  }
  for (const auto& [k, v] : values) os << "value." << k << "=" << v << "\n";
  for (const std::string& a : artifacts) os << "artifact=" << a << "\n";
  for (const StageRecord& s : stages) os << "time.stage." << s.id << "=" << fmt(s.seconds) << "\n";
  for (const CheckResult& c : checks) os << "time.check." << c.id << "=" << fmt(c.seconds) << "\n";
  return os.str();
}

RunReport run(const ExperimentConfig& config, LogLevel log) { return Runner(config, log).run(); }

}  // namespace minkray
