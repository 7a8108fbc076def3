#include "minkray/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SVD>

#include "minkray/operators.hpp"
#include "minkray/parallel.hpp"

namespace minkray {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Stopwatch {
 public:
  double seconds() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  using Clock = std::chrono::steady_clock;
  Clock::time_point start_ = Clock::now();
};

Vec resolve_theta(const Vec& theta0, int n) {
  if (theta0.size() == 0) return Vec::Unit(n, 0);
  if (theta0.size() != n) throw InvalidArgument("theta0 needs n entries");
  return theta0;
}

Vec random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v / v.norm();
}

// Unit vector at angle `angle` from theta toward a random perpendicular.
Vec tilt(const Vec& theta, double angle, std::mt19937_64& rng) {
  Vec u = random_unit(int(theta.size()), rng);
  u -= u.dot(theta) * theta;
  u.normalize();
  Vec out = std::cos(angle) * theta + std::sin(angle) * u;
  return out / out.norm();
}

// Diagonal of the bounding box of nonzero samples.
double support_diameter(const SymTensorField& F) {
  const Grid& g = F.grid();
  Vec lo = Vec::Constant(g.dims(), std::numeric_limits<double>::infinity()), hi = -lo;
  for (Index k = 0; k < g.size(); ++k) {
    bool nonzero = false;
    for (Index c = 0; c < F.count() && !nonzero; ++c) nonzero = F.component(c)[k] != 0.0;
    if (!nonzero) continue;
    const Vec z = g.point(k);
    lo = lo.cwiseMin(z);
    hi = hi.cwiseMax(z);
  }
  return (hi.array() >= lo.array()).all() ? (hi - lo).norm() : 0.0;
}

double rms(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s / double(v.size()));
}

double max_finite(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::isfinite(x) ? std::max(m, x) : std::numeric_limits<double>::infinity();
  return m;
}

// Least-squares slope of log(err) against log(h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  const Index L = Index(h.size());
  Mat X(L, 2);
  Vec y(L);
  for (Index i = 0; i < L; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(h[std::size_t(i)]);
    y[i] = std::log(err[std::size_t(i)]);
  }
  return X.colPivHouseholderQr().solve(y)[1];
}

double relative_l2(const std::vector<Array>& a, const std::vector<Array>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]).square().sum();
    den += b[i].square().sum();
  }
  return std::sqrt(num / den);
}

CheckResult make_result(int id, std::string title) {
  CheckResult r;
  r.id = id;
  r.title = std::move(title);
  return r;
}

double max_abs(const VectorField& v) {
  double m = 0.0;
  for (int i = 0; i < v.count(); ++i) m = std::max(m, v[i].abs().maxCoeff());
  return m;
}

}  // namespace

double CheckResult::value(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  throw InvalidArgument("check " + std::to_string(id) + ": no metric '" + key + "'");
}

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double x) { return !std::isfinite(x); }), values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

Mat integer_rows_at_zeta0() {
  const auto ix = [](int i, int j) { return component_index(3, i, j); };
  Mat R = Mat::Zero(5, 10);
  R(0, ix(0, 0)) = 1, R(0, ix(0, 1)) = 2, R(0, ix(1, 1)) = 1;
  R(1, ix(0, 3)) = 1, R(1, ix(1, 3)) = 1;
  R(2, ix(0, 1)) = 1, R(2, ix(1, 1)) = 1, R(2, ix(3, 3)) = -1;
  R(3, ix(0, 3)) = 1, R(3, ix(1, 3)) = 4;
  R(4, ix(0, 1)) = 1, R(4, ix(1, 1)) = 4, R(4, ix(3, 3)) = -4;
  return R;
}

CheckResult check_gauge_kernel(const GaugeKernelParams& p, GaugePhantom* phantom_out) {
  Stopwatch sw;
  CheckResult r = make_result(1, "gauge kernel of the light ray transform");
  const Grid g = Grid::cube(p.n, p.N, p.half_width);
  const Vec theta0 = resolve_theta(p.theta0, p.n);
  GaugePhantom ph = phantom_gauge(g, random_gauge_spec(g, p.seed));

  double grad = 0.0;
  for (int i = 0; i <= p.n; ++i)
    for (int a = 0; a <= p.n; ++a) grad = std::max(grad, derivative(g, ph.v[i], a).abs().maxCoeff());
  const double lam = ph.lambda.values().abs().maxCoeff();
  const double diam = support_diameter(ph.F);

  std::mt19937_64 rng(p.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec> dirs, points;
  for (int t = 0; t < p.rays; ++t) {
    dirs.push_back(tilt(theta0, p.spread * U(rng), rng));
    Vec z(p.n + 1);
    for (int a = 0; a <= p.n; ++a) z[a] = g.center()[a] + (U(rng) - 0.5) * p.half_width;
    points.push_back(z);
  }
  std::vector<double> values(std::size_t(p.rays));
  parallel_for(p.rays, p.workers, [&](Index t) {
    const Direction d(dirs[std::size_t(t)]);
    values[std::size_t(t)] = light_ray_integral(ph.F, points[std::size_t(t)], d);
  });
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v));
  const double bound = p.tolerance * (lam + grad) * diam;

  r.metric("rays", p.rays);
  r.metric("max_abs_LF", worst);
  r.metric("lambda_inf", lam);
  r.metric("grad_v_inf", grad);
  r.metric("support_diameter", diam);
  r.metric("bound", bound);
  r.metric("ratio_to_scale", worst / ((lam + grad) * diam));
  r.passed = worst <= bound;
  if (phantom_out) *phantom_out = std::move(ph);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_slice_identity(const SliceParams& p) {
  Stopwatch sw;
  CheckResult r = make_result(2, "Fourier slice identity");
  const Direction d(resolve_theta(p.theta0, p.n));
  const Index m = sym_components(p.n);
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  Vec weights(m);
  for (Index k = 0; k < m; ++k) weights[k] = 2.0 * U(rng) - 1.0;
  const Vec center = Vec::Constant(p.n + 1, 0.02 * p.half_width);
  std::vector<Vec> coords;
  for (int f = 0; f < p.frequencies; ++f)
    coords.push_back((p.min_frequency + (p.max_frequency - p.min_frequency) * U(rng)) * random_unit(p.n, rng));

  const auto residuals = [&](Index N) {
    const Grid g = Grid::cube(p.n, N, p.half_width);
    const SymTensorField F = phantom_gaussian(g, center, p.width, weights);
    const Slab slab = transform_slab(F, d, {}, p.workers);
    std::vector<double> res(coords.size());
    parallel_for(Index(coords.size()), p.workers,
                 [&](Index f) { res[std::size_t(f)] = slice_residual(F, slab, slab.basis * coords[std::size_t(f)]); });
    return res;
  };
  const std::vector<double> coarse = residuals(p.N);
  const double worst = max_finite(coarse);
  r.metric("frequencies", p.frequencies);
  r.metric("max_residual", worst);
  r.metric("median_residual", median(coarse));
  r.passed = worst <= p.tolerance;
  if (p.N_refine > 0) {
    const std::vector<double> fine = residuals(p.N_refine);
    const double factor = rms(coarse) / rms(fine);
    r.metric("max_residual_refined", max_finite(fine));
    r.metric("refinement_factor", factor);
    r.metric("expected_second_order_factor",
             std::pow(double(p.N_refine - 1) / double(p.N - 1), 2.0));
    r.passed = r.passed && factor >= p.factor_lo && factor <= p.factor_hi;
    r.notes.push_back("refinement factor window [" + std::to_string(p.factor_lo) + ", " + std::to_string(p.factor_hi) +
                      "] from N=" + std::to_string(p.N) + " to N=" + std::to_string(p.N_refine));
  }
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_system_at_zeta0(const SystemParams& p) {
  Stopwatch sw;
  CheckResult r = make_result(3, "system at zeta_0");
  const Vec zeta0 = Vec::Unit(4, 2);
  const Mat rows = directional_rows(zeta0, trig_coefficients({3, 0}, 0.0, Mat::Identity(3, 3)));
  const Vec scale = (Vec(5) << 1.0, 0.5, -0.5, -0.5, 0.5).finished();
  const Mat scaled = scale.asDiagonal() * rows;
  const double row_defect = (scaled - integer_rows_at_zeta0()).cwiseAbs().maxCoeff();

  Frame frame{0.0, Mat::Identity(3, 3)};
  const FrequencySystem sys = assemble_system(zeta0, frame, families_for(3));
  const Eigen::JacobiSVD<Mat> svd(sys.rows);
  const double smin = svd.singularValues().minCoeff(), smax = svd.singularValues().maxCoeff();
  const FrequencySolution zero = solve_frequency(sys);
  const double det = std::abs(system_determinant(zeta0));
  const double det_err = std::abs(det - p.reference) / p.reference;

  r.metric("row_defect", row_defect);
  r.metric("rows", double(sys.rows.rows()));
  r.metric("sigma_min", smin);
  r.metric("condition", smax / smin);
  r.metric("homogeneous_solution_norm", zero.spectrum.coeffs.norm());
  r.metric("abs_det", det);
  r.metric("det_reference", p.reference);
  r.metric("det_rel_error", det_err);
  r.passed = row_defect == 0.0 && sys.rows.rows() == 10 && smin > 1e-10 * smax &&
             zero.spectrum.coeffs.norm() == 0.0 && det_err <= p.rel_tol;
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_determinant_map(const DetMapParams& p, DeterminantMap* map_out) {
  Stopwatch sw;
  CheckResult r = make_result(4, "determinant continuity");
  DeterminantMap map = determinant_map(p.half_width, p.resolution, p.workers);
  const double err = std::abs(map.min_abs - p.reference) / p.reference;
  r.metric("points", double(map.values.size()));
  r.metric("min_abs_det", map.min_abs);
  r.metric("max_abs_det", *std::max_element(map.values.begin(), map.values.end()));
  r.metric("at_origin", map.at_origin);
  r.metric("argmin", double(map.argmin));
  r.metric("min_rel_to_reference", err);
  r.passed = map.min_abs > 0.0 && err <= p.rel_tol;
  if (map_out) *map_out = std::move(map);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_synthetic_recovery(const RecoveryParams& p) {
  Stopwatch sw;
  CheckResult r = make_result(5, "frequency recovery from exact data");
  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> U(p.min_scale, p.max_scale);
  std::normal_distribution<double> N;

  ConeSpec cone;
  cone.half_width = p.cone_half_width;
  cone.random_samples = p.spectra;
  cone.seed = p.seed;
  std::vector<Vec> zetas = cone_directions(3, cone);
  std::vector<CVec> truth;
  for (Vec& z : zetas) {
    z *= U(rng);
    CVec s(10);
    for (Index k = 0; k < 10; ++k) s[k] = Complex(N(rng), N(rng));
    truth.push_back(constraint_projector(3, z).cast<Complex>() * s);
  }
  std::vector<double> err(zetas.size(), kNaN);
  parallel_for(Index(zetas.size()), p.workers, [&](Index k) {
    const CVec& s = truth[std::size_t(k)];
    const SpectrumProvider data([&s](const Vec&) { return s; });
    try {
      const FrequencySolution sol = solve_frequency(assemble_system(zetas[std::size_t(k)], &data, p.fit));
      err[std::size_t(k)] = (sol.spectrum.coeffs - s).norm() / s.norm();
    } catch (const NumericalFailure&) {
    }
  });
  const double worst = max_finite(err);
  r.metric("spectra", p.spectra);
  r.metric("max_rel_error", worst);
  r.metric("median_rel_error", median(err));
  r.passed = worst <= p.tolerance;

  for (int n : p.rank_dims) {
    ConeSpec c;
    c.half_width = p.cone_half_width;
    c.random_samples = p.rank_points;
    c.seed = p.seed + std::uint64_t(n);
    const std::vector<Vec> dirs = cone_directions(n, c);
    const Index m = sym_components(n);
    std::vector<Index> rank(dirs.size(), 0);
    std::vector<double> smin(dirs.size(), 0.0);
    parallel_for(Index(dirs.size()), p.workers, [&](Index k) {
      try {
        const FrequencySolution sol = solve_frequency(assemble_system(dirs[std::size_t(k)]));
        rank[std::size_t(k)] = sol.rank;
        smin[std::size_t(k)] = sol.sigma_min;
      } catch (const NumericalFailure&) {
      }
    });
    const Index full = Index(std::count(rank.begin(), rank.end(), m));
    r.metric("n" + std::to_string(n) + "_points", double(dirs.size()));
    r.metric("n" + std::to_string(n) + "_full_rank", double(full));
    r.metric("n" + std::to_string(n) + "_min_sigma", *std::min_element(smin.begin(), smin.end()));
    r.passed = r.passed && full == Index(dirs.size());
  }
  r.seconds = sw.seconds();
  return r;
}

RecoveryTable recover_cone(const SymTensorField& F, const EndToEndParams& p) {
  const SlabProvider data(F, 1, p.noise_sigma, p.seed, p.interpolation);
  RecoveryTable t;
  t.results = cone_sweep(F.n(), data, p.cone, p.fit, p.workers);
  t.errors.assign(t.results.size(), kNaN);
  parallel_for(Index(t.results.size()), p.workers, [&](Index k) {
    const ConeResult& c = t.results[std::size_t(k)];
    if (!c.ok) return;
    const CVec ref = dft_at(F, c.zeta).coeffs;
    t.errors[std::size_t(k)] = (c.coeffs - ref).norm() / ref.norm();
  });
  return t;
}

CheckResult check_end_to_end(const EndToEndParams& p, RecoveryTable* table_out, SymTensorField* phantom_out) {
  Stopwatch sw;
  CheckResult r = make_result(6, "end-to-end recovery");
  const Grid g = Grid::cube(p.n, p.N, p.half_width);
  SolenoidalPhantom ph = phantom_solenoidal(g, p.phantom);
  RecoveryTable t = recover_cone(ph.F, p);
  const Index ok = Index(std::count_if(t.results.begin(), t.results.end(), [](const ConeResult& c) { return c.ok; }));
  const double med = median(t.errors), worst = max_finite(t.errors);
  r.metric("frequencies", double(t.results.size()));
  r.metric("solved", double(ok));
  r.metric("median_rel_error", med);
  r.metric("max_rel_error", worst);
  r.metric("phantom_trace_residual", ph.trace_residual);
  r.metric("phantom_divergence_residual", ph.divergence_residual);
  r.passed = ok >= p.min_frequencies && ok == Index(t.results.size()) && med <= p.median_tol && worst <= p.max_tol;
  if (p.interpolation == Interpolation::CubicBSpline) r.notes.push_back("slab data from cubic B-spline ray quadrature");
  if (table_out) *table_out = std::move(t);
  if (phantom_out) *phantom_out = std::move(ph.F);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_decomposition(const DecompositionParams& p, DecompositionResult* finest_out) {
  Stopwatch sw;
  CheckResult r = make_result(7, "decomposition round trip");
  std::vector<double> hs, ev, el;
  bool diagnostics_ok = true;
  for (std::size_t L = 0; L < p.levels.size(); ++L) {
    const Index N = p.levels[L];
    const Grid g = Grid::cube(p.n, N, p.half_width);
    GaugeSpec spec = random_gauge_spec(g, p.seed);
    spec.analytic_derivative = true;
    const GaugePhantom ph = phantom_gauge(g, spec);
    DecompositionResult res = decompose(ph.F, p.solver);
    const double h = g.spacing(0);
    std::vector<Array> a, b;
    for (int i = 0; i <= p.n; ++i) {
      a.push_back(res.v[i]);
      b.push_back(ph.v[i]);
    }
    const double e_v_full = relative_l2(a, b);
    const double e_l = relative_l2({res.lambda.values()}, {ph.lambda.values()});
    const auto& dg = res.diagnostics;
    const double div_rel = dg.div_residual / dg.field_scale, tr_rel = dg.trace_residual / dg.field_scale;
    const std::string tag = "N" + std::to_string(N) + "_";
    r.metric(tag + "h", h);
    r.metric(tag + "v_rel_l2", e_v_full);
    r.metric(tag + "lambda_rel_l2", e_l);
    r.metric(tag + "v_constant", e_v_full / (h * h));
    r.metric(tag + "lambda_constant", e_l / (h * h));
    r.metric(tag + "div_residual_rel", div_rel);
    r.metric(tag + "trace_residual_rel", tr_rel);
    r.metric(tag + "solver_residual", dg.solver_residual);
    r.metric(tag + "iterations", dg.iterations);
    r.notes.push_back("N=" + std::to_string(N) + " solver " + dg.method);
    diagnostics_ok = diagnostics_ok && div_rel <= p.diagnostics_tol && tr_rel <= p.diagnostics_tol;
    hs.push_back(h);
    ev.push_back(e_v_full);
    el.push_back(e_l);
    if (finest_out && L + 1 == p.levels.size()) *finest_out = std::move(res);
  }
  r.passed = diagnostics_ok;
  if (hs.size() >= 2) {
    const double ov = fitted_order(hs, ev), ol = fitted_order(hs, el);
    r.metric("order_v", ov);
    r.metric("order_lambda", ol);
    r.passed = r.passed && ov >= p.order_lo && ov <= p.order_hi && ol >= p.order_lo && ol <= p.order_hi;
  }
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_ellipticity(const CertifyParams& p) {
  Stopwatch sw;
  CheckResult r = make_result(8, "strong ellipticity certificate");
  r.passed = true;
  for (int n = p.n_min; n <= p.n_max; ++n) {
    const EllipticityReport rep = ellipticity_certificate(n, p.samples, p.seed + std::uint64_t(n), p.refine_starts);
    // re-evaluate the reported pair from the symmetric part of the symbol
    const Mat P = symbol(rep.xi, n).second;
    const double again = rep.eta.dot(P * rep.eta) / (rep.xi.squaredNorm() * rep.eta.squaredNorm());
    const std::string tag = "n" + std::to_string(n) + "_";
    r.metric(tag + "bound", rep.bound);
    r.metric(tag + "min_ratio", rep.min_ratio);
    r.metric(tag + "sampled_min", rep.sampled_min);
    r.metric(tag + "reevaluated", again);
    r.passed = r.passed && rep.min_ratio >= rep.bound - p.tolerance && again >= rep.bound - p.tolerance &&
               std::abs(again - rep.min_ratio) <= 1e-12;
  }
  r.metric("samples_per_n", double(p.samples));
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_kernel_energy(const KernelParams& p) {
  Stopwatch sw;
  CheckResult r = make_result(9, "kernel and energy checks");
  if (p.points.size() != p.dims.size()) throw InvalidArgument("kernel check: need one grid size per dimension");
  r.passed = true;
  for (std::size_t k = 0; k < p.dims.size(); ++k) {
    const int n = p.dims[k];
    const Grid g = Grid::cube(n, p.points[k], 1.0);
    const EllipticOperator op(g);
    const std::string tag = "n" + std::to_string(n) + "_";

    const VectorField guess = random_boundary_vanishing(g, p.seed);
    SolverOptions opt;
    opt.method = SolverOptions::Method::Krylov;
    SolveReport rep;
    const VectorField v = solve_dirichlet(op, VectorField(g), opt, &rep, &guess);
    const double kernel = max_abs(v) / max_abs(guess);

    double energy = 0.0;
    int holds = 0;
    for (int t = 0; t < p.fields; ++t) {
      const VectorField w = random_boundary_vanishing(g, p.seed + 1000 + std::uint64_t(t));
      energy = std::max(energy, energy_identity_residual(op, w));
      if (discriminant_check(w).holds()) ++holds;
    }
    const double adjoint = adjoint_residual(g, 10, p.seed);

    r.metric(tag + "homogeneous_v_inf_rel", kernel);
    r.metric(tag + "homogeneous_iterations", rep.iterations);
    r.metric(tag + "energy_residual_max", energy);
    r.metric(tag + "adjoint_residual", adjoint);
    r.metric(tag + "discriminant_holds", holds);
    r.passed = r.passed && kernel <= p.kernel_tol && energy <= p.energy_tol && adjoint <= p.adjoint_tol &&
               holds == p.fields;
  }
  r.metric("fields", p.fields);
  r.seconds = sw.seconds();
  return r;
}

CheckResult check_gauge_insensitivity(const GaugeRecoveryParams& p, const RecoveryTable* baseline) {
  Stopwatch sw;
  CheckResult r = make_result(10, "gauge insensitivity of recovery");
  const EndToEndParams& b = p.base;
  const Grid g = Grid::cube(b.n, b.N, b.half_width);
  const SymTensorField F = phantom_solenoidal(g, b.phantom).F;
  GaugeSpec spec = random_gauge_spec(g, b.seed + 17);
  spec.analytic_derivative = true;
  SymTensorField G = phantom_gauge(g, spec).F;
  G *= p.gauge_scale * F.max_abs() / G.max_abs();
  SymTensorField F2 = F;
  F2 += G;
  F2.declare_compact_support(true);

  RecoveryTable own;
  if (!baseline) {
    own = recover_cone(F, b);
    baseline = &own;
  }
  const RecoveryTable shifted = recover_cone(F2, b);
  if (shifted.results.size() != baseline->results.size())
    throw InvalidArgument("gauge check: baseline table does not match the cone");
  std::vector<double> diff(shifted.results.size(), kNaN);
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const ConeResult &x = baseline->results[k], &y = shifted.results[k];
    if (x.ok && y.ok) diff[k] = (y.coeffs - x.coeffs).norm() / x.coeffs.norm();
  }
  const double med = median(diff), worst = max_finite(diff);
  r.metric("frequencies", double(diff.size()));
  r.metric("gauge_to_field_max_ratio", G.max_abs() / F.max_abs());
  r.metric("median_rel_difference", med);
  r.metric("max_rel_difference", worst);
  r.metric("median_rel_error_vs_reference", median(shifted.errors));
  r.metric("median_limit", p.factor * b.median_tol);
  r.metric("max_limit", p.factor * b.max_tol);
  r.passed = med <= p.factor * b.median_tol && worst <= p.factor * b.max_tol;
  r.seconds = sw.seconds();
  return r;
}

}  // namespace minkray
