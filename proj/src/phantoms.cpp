#include "minkray/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>

#include "minkray/operators.hpp"

namespace minkray {

namespace {

constexpr double kClip = 1e-14;

double sq_dist(const double* z, const Vec& c) {
  double r2 = 0.0;
  for (Index a = 0; a < c.size(); ++a) r2 += (z[a] - c[a]) * (z[a] - c[a]);
  return r2;
}

// Window W = prod_a sin^2(pi (z_a - lo_a) / L_a) and its gradient.
struct Window {
  const Grid& grid;

  double value(const double* z, double* grad) const {
    const int d = grid.dims();
    double s[16], c[16], k[16];
    for (int a = 0; a < d; ++a) {
      k[a] = std::numbers::pi / (grid.upper(a) - grid.origin(a));
      const double x = k[a] * (z[a] - grid.origin(a));
      s[a] = std::sin(x);
      c[a] = std::cos(x);
    }
    double w = 1.0;
    for (int a = 0; a < d; ++a) w *= s[a] * s[a];
    if (grad) {
      for (int a = 0; a < d; ++a) {
        double g = 2.0 * s[a] * c[a] * k[a];
        for (int b = 0; b < d; ++b) {
          if (b != a) g *= s[b] * s[b];
        }
        grad[a] = g;
      }
    }
    return w;
  }
};

void check_bump(const GaussianBump& b, int dims, const char* what) {
  if (b.center.size() != dims) throw InvalidArgument(std::string(what) + ": bump centre needs n+1 entries");
  if (!(b.width > 0.0)) throw InvalidArgument(std::string(what) + ": bump width must be positive");
}

}  // namespace

double GaussianBump::operator()(const Vec& z) const {
  return amplitude * std::exp(-(z - center).squaredNorm() / (width * width));
}

SymTensorField phantom_gaussian(const Grid& grid, const Vec& center, double width, const Vec& weights) {
  const int n = grid.n();
  if (!(width > 0.0)) throw InvalidArgument("phantom_gaussian: width must be positive");
  if (center.size() != grid.dims()) throw InvalidArgument("phantom_gaussian: centre needs n+1 entries");
  if (weights.size() != sym_components(n)) {
    throw InvalidArgument("phantom_gaussian: need (n+1)(n+2)/2 weights");
  }
  for (int a = 0; a <= n; ++a) {
    if (center[a] < grid.origin(a) || center[a] > grid.upper(a)) {
      throw InvalidArgument("phantom_gaussian: centre outside the box");
    }
  }
  Array env(grid.size());
  const double w2 = width * width;
  bool leaks = false;
  grid.for_each_point([&](Index k, const double* z) {
    double e = std::exp(-sq_dist(z, center) / w2);
    if (e < kClip) e = 0.0;
    env[k] = e;
  });
  for (Index k = 0; k < grid.size() && !leaks; ++k) {
    if (env[k] != 0.0 && grid.on_boundary(k)) leaks = true;
  }
  if (leaks) {
    throw InvalidArgument("phantom_gaussian: width too large for support flag (envelope >= 1e-14 on the boundary)");
  }
  SymTensorField F(grid);
  for (Index c = 0; c < F.count(); ++c) {
    if (weights[c] != 0.0) F.component(c) = weights[c] * env;
  }
  F.declare_compact_support(true);
  return F;
}

GaugePhantom phantom_gauge(const Grid& grid, const GaugeSpec& spec) {
  const int n = grid.n();
  const int d = grid.dims();
  if (!spec.v_bumps.empty() && int(spec.v_bumps.size()) != d) {
    throw InvalidArgument("phantom_gauge: v_bumps needs n+1 entries (or none)");
  }
  for (const auto& b : spec.lambda_bumps) check_bump(b, d, "phantom_gauge");
  for (const auto& b : spec.v_bumps) check_bump(b, d, "phantom_gauge");

  const Window window{grid};
  ScalarField lambda(grid);
  VectorField v(grid);
  // dv[i][a] = d_a v_i, only filled for the analytic path
  std::vector<std::vector<Array>> dv;
  if (spec.analytic_derivative) {
    dv.assign(d, std::vector<Array>(d, Array::Zero(grid.size())));
  }

  grid.for_each_point([&](Index k, const double* z) {
    double grad_w[16];
    const double w = window.value(z, grad_w);
    double lam = 0.0;
    for (const auto& b : spec.lambda_bumps) lam += b.amplitude * std::exp(-sq_dist(z, b.center) / (b.width * b.width));
    lambda[k] = w * lam;
    for (int i = 0; i < int(spec.v_bumps.size()); ++i) {
      const auto& b = spec.v_bumps[i];
      const double g = b.amplitude * std::exp(-sq_dist(z, b.center) / (b.width * b.width));
      v[i][k] = w * g;
      if (spec.analytic_derivative) {
        for (int a = 0; a < d; ++a) {
          const double dg = -2.0 * (z[a] - b.center[a]) / (b.width * b.width) * g;
          dv[i][a][k] = grad_w[a] * g + w * dg;
        }
      }
    }
  });
  v.zero_boundary();
  for (Index k = 0; k < grid.size(); ++k) {
    if (grid.on_boundary(k)) lambda[k] = 0.0;
  }

  SymTensorField F = scalar_metric(lambda);
  if (spec.analytic_derivative && !spec.v_bumps.empty()) {
    for (int i = 0; i <= n; ++i) {
      for (int j = i; j <= n; ++j) F(i, j) += 0.5 * (dv[i][j] + dv[j][i]);
    }
  } else if (!spec.v_bumps.empty()) {
    F += sym_derivative(v);
  }
  F.declare_compact_support(true);
  return {std::move(F), std::move(lambda), std::move(v)};
}

GaugeSpec random_gauge_spec(const Grid& grid, std::uint64_t seed, double lambda_scale, double v_scale) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const int d = grid.dims();
  const Vec mid = grid.center();
  double half = 0.0;
  for (int a = 0; a < d; ++a) half = std::max(half, 0.5 * (grid.upper(a) - grid.origin(a)));
  auto bump = [&](double scale) {
    GaussianBump b;
    b.amplitude = scale * (1.0 + 0.5 * unit(rng));
    b.center = mid;
    for (int a = 0; a < d; ++a) {
      b.center[a] += 0.25 * unit(rng) * 0.5 * (grid.upper(a) - grid.origin(a));
    }
    b.width = half * (0.35 + 0.1 * unit(rng));
    return b;
  };
  GaugeSpec spec;
  for (int s = 0; s < 2; ++s) spec.lambda_bumps.push_back(bump(lambda_scale));
  for (int i = 0; i < d; ++i) {
    GaussianBump b = bump(v_scale);
    if (normal(rng) < 0.0) b.amplitude = -b.amplitude;
    spec.v_bumps.push_back(b);
  }
  return spec;
}

std::vector<double> random_weyl_tensor(int dims, std::uint64_t seed) {
  if (dims < 4) throw InvalidArgument("random_weyl_tensor: needs at least 4 dimensions");
  const int D = dims;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto sym = [&] {
    Mat h(D, D);
    for (int i = 0; i < D; ++i) {
      for (int j = i; j < D; ++j) h(i, j) = h(j, i) = normal(rng);
    }
    return h;
  };
  auto at = [D](int a, int b, int c, int e) { return ((a * D + b) * D + c) * D + e; };
  auto kn = [&](const Mat& h, const Mat& k, double s, std::vector<double>& out) {
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c)
          for (int e = 0; e < D; ++e)
            out[at(a, b, c, e)] += s * (h(a, c) * k(b, e) + h(b, e) * k(a, c) - h(a, e) * k(b, c) - h(b, c) * k(a, e));
  };

  std::vector<double> R(std::size_t(D) * D * D * D, 0.0);
  for (int t = 0; t < 3; ++t) kn(sym(), sym(), 1.0, R);

  Mat ric = Mat::Zero(D, D);
  for (int b = 0; b < D; ++b)
    for (int e = 0; e < D; ++e)
      for (int a = 0; a < D; ++a) ric(b, e) += R[at(a, b, a, e)];
  const double scal = ric.trace();
  const Mat id = Mat::Identity(D, D);
  kn(ric, id, -1.0 / (D - 2), R);
  kn(id, id, scal / (2.0 * (D - 1) * (D - 2)), R);

  double norm = 0.0;
  for (double x : R) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : R) x /= norm;
  return R;
}

SolenoidalPhantom phantom_solenoidal(const Grid& grid, const SolenoidalSpec& spec) {
  const int n = grid.n();
  const int D = grid.dims();
  const int K = spec.smoothness;
  if (spec.terms < 1) throw InvalidArgument("phantom_solenoidal: need at least one term");
  if (K < 4) throw InvalidArgument("phantom_solenoidal: smoothness must be >= 4");
  if (!(spec.radius_fraction > 0.0) || spec.center_spread < 0.0 ||
      spec.radius_fraction + spec.center_spread >= 1.0) {
    throw InvalidArgument("phantom_solenoidal: radius_fraction + center_spread must lie in (0, 1)");
  }

  double half = std::numeric_limits<double>::infinity();
  for (int a = 0; a < D; ++a) half = std::min(half, 0.5 * (grid.upper(a) - grid.origin(a)));
  const double h = grid.min_spacing();

  SolenoidalPhantom out{SymTensorField(grid), 0.0, 0.0, 0.0, {}, {}, {}};
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal;
  const Vec mid = grid.center();
  for (int s = 0; s < spec.terms; ++s) {
    Vec c = mid;
    for (int a = 0; a < D; ++a) c[a] += spec.center_spread * half * unit(rng);
    const double R = spec.radius_fraction * half * (1.0 - 0.1 * std::abs(unit(rng)));
    if (R / std::sqrt(double(K)) < 1.5 * h) {
      throw InvalidArgument("phantom_solenoidal: bump not resolved by the grid (R/sqrt(k) < 1.5h)");
    }
    out.centers.push_back(c);
    out.radii.push_back(R);
    out.weyl.push_back(random_weyl_tensor(D, rng()));
    const double amp = normal(rng);
    for (double& x : out.weyl.back()) x *= amp;
  }

  const Index m = sym_components(n);
  std::vector<std::pair<int, int>> pairs;
  for (Index c = 0; c < m; ++c) pairs.push_back(component_pair(n, c));

  // Closed-form derivatives of q^K, q = 1 - |y|^2/R^2.
  auto hessian = [&](const double* y, double R, double* H) {
    double r2 = 0.0;
    for (int a = 0; a < D; ++a) r2 += y[a] * y[a];
    const double q = 1.0 - r2 / (R * R);
    if (q <= 0.0) return false;
    const double c1 = -2.0 / (R * R);
    const double f2 = K * (K - 1) * std::pow(q, K - 2) * c1 * c1;
    const double f1 = K * std::pow(q, K - 1) * c1;
    for (int k = 0; k < D; ++k)
      for (int l = 0; l < D; ++l) H[k * D + l] = f2 * y[k] * y[l] + (k == l ? f1 : 0.0);
    return true;
  };

  grid.for_each_point([&](Index node, const double* z) {
    for (int s = 0; s < spec.terms; ++s) {
      double y[16], H[256];
      for (int a = 0; a < D; ++a) y[a] = z[a] - out.centers[s][a];
      if (!hessian(y, out.radii[s], H)) continue;
      const auto& W = out.weyl[s];
      for (Index c = 0; c < m; ++c) {
        const auto [i, j] = pairs[c];
        double acc = 0.0;
        for (int k = 0; k < D; ++k)
          for (int l = 0; l < D; ++l) acc += W[((i * D + k) * D + j) * D + l] * H[k * D + l];
        out.F.component(c)[node] += acc;
      }
    }
  });

  const double scale = out.F.max_abs();
  if (scale > 0.0) {
    out.F *= 1.0 / scale;
    for (auto& W : out.weyl)
      for (double& x : W) x /= scale;
  }
  out.F.declare_compact_support(true);

  const double fmax = out.F.max_abs();
  out.trace_residual = fmax > 0.0 ? trace(out.F).values().abs().maxCoeff() / fmax : 0.0;

  // Closed-form divergence on a strided subset of nodes.
  double div_max = 0.0;
  const Index stride = std::max<Index>(1, grid.size() / 20000);
  for (Index node = 0; node < grid.size(); node += stride) {
    const Vec z = grid.point(node);
    std::vector<double> div(D, 0.0);
    for (int s = 0; s < spec.terms; ++s) {
      const double R = out.radii[s];
      double y[16], r2 = 0.0;
      for (int a = 0; a < D; ++a) {
        y[a] = z[a] - out.centers[s][a];
        r2 += y[a] * y[a];
      }
      const double q = 1.0 - r2 / (R * R);
      if (q <= 0.0) continue;
      const double c1 = -2.0 / (R * R);
      const double f3 = double(K) * (K - 1) * (K - 2) * std::pow(q, K - 3) * c1 * c1 * c1;
      const double f2 = double(K) * (K - 1) * std::pow(q, K - 2) * c1 * c1;
      const auto& W = out.weyl[s];
      for (int i = 0; i < D; ++i)
        for (int j = 0; j < D; ++j)
          for (int k = 0; k < D; ++k)
            for (int l = 0; l < D; ++l) {
              double t = f3 * y[j] * y[k] * y[l];
              if (j == k) t += f2 * y[l];
              if (j == l) t += f2 * y[k];
              if (k == l) t += f2 * y[j];
              div[i] += W[((i * D + k) * D + j) * D + l] * t;
            }
    }
    for (double x : div) div_max = std::max(div_max, std::abs(x));
  }
  const double rmin = *std::min_element(out.radii.begin(), out.radii.end());
  out.divergence_residual = fmax > 0.0 ? div_max / (fmax / rmin) : 0.0;

  const VectorField dF = divergence(out.F);
  double ddiv = 0.0;
  for (int i = 0; i < D; ++i) {
    for (Index k = 0; k < grid.size(); ++k) {
      if (grid.is_interior(k, 1)) ddiv = std::max(ddiv, std::abs(dF[i][k]));
    }
  }
  out.discrete_divergence_residual = fmax > 0.0 ? ddiv / (fmax / rmin) : 0.0;
  return out;
}

}  // namespace minkray
