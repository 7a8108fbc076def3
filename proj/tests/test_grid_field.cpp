#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "minkray/operators.hpp"
#include "minkray/phantoms.hpp"

using namespace minkray;

namespace {

Array fill(const Grid& g, const std::function<double(const Vec&)>& f) {
  Array out(g.size());
  for (Index k = 0; k < g.size(); ++k) out[k] = f(g.point(k));
  return out;
}

// Plain per-node central difference, independent of the library kernel.
double central_diff(const Grid& g, const Array& f, Index node, int axis) {
  return (f[node + g.stride(axis)] - f[node - g.stride(axis)]) / (2.0 * g.spacing(axis));
}

double interior_max(const Grid& g, const Array& f, Index depth = 1) {
  double m = 0.0;
  for (Index k = 0; k < g.size(); ++k) {
    if (g.is_interior(k, depth)) m = std::max(m, std::abs(f[k]));
  }
  return m;
}

}  // namespace

TEST(ComponentIndex, LexOrder) {
  EXPECT_EQ(component_index(3, 0, 0), 0);
  EXPECT_EQ(component_index(3, 1, 0), 1);
  EXPECT_EQ(component_index(3, 1, 1), 4);
  EXPECT_EQ(component_index(3, 3, 3), 9);
  EXPECT_THROW(component_index(3, 4, 0), InvalidArgument);
  for (int n = 3; n <= 6; ++n) {
    Index expect = 0;
    for (int i = 0; i <= n; ++i) {
      for (int j = i; j <= n; ++j) {
        EXPECT_EQ(component_index(n, i, j), expect);
        EXPECT_EQ(component_pair(n, expect), std::make_pair(i, j));
        ++expect;
      }
    }
    EXPECT_EQ(expect, sym_components(n));
  }
}

TEST(Grid, Validation) {
  EXPECT_THROW(Grid::cube(2, 16, 1.0), InvalidArgument);
  EXPECT_THROW(Grid::cube(3, 7, 1.0), InvalidArgument);
  Grid g = Grid::cube(3, 8, 1.0);
  EXPECT_EQ(g.size(), 4096);
  for (Index k : {Index(0), Index(123), Index(4095)}) EXPECT_EQ(g.flat(g.multi(k)), k);
  EXPECT_DOUBLE_EQ(g.point(4095)[2], 1.0);
}

TEST(Grid, ForEachPointMatchesPoint) {
  Grid g(3, {8, 9, 10, 11}, {0.1, 0.2, 0.3, 0.4}, {-1, 0, 1, 2});
  Index count = 0;
  g.for_each_point([&](Index k, const double* z) {
    const Vec p = g.point(k);
    for (int a = 0; a < 4; ++a) ASSERT_NEAR(z[a], p[a], 1e-13);
    ++count;
  });
  EXPECT_EQ(count, g.size());
}

TEST(Fields, SymmetricAccess) {
  Grid g = Grid::cube(3, 8, 1.0);
  SymTensorField F(g);
  F(2, 1) = Array::Constant(g.size(), 3.0);
  EXPECT_EQ(F(1, 2)[17], 3.0);
}

TEST(Operators, TraceOfMetric) {
  for (int n = 3; n <= 5; ++n) {
    Grid g = Grid::cube(n, 8, 1.0);
    ScalarField one(g, Array::Ones(g.size()));
    SymTensorField G = scalar_metric(one);
    EXPECT_NEAR(trace(G).values().maxCoeff(), n - 1, 1e-15);
    EXPECT_NEAR(trace(G).values().minCoeff(), n - 1, 1e-15);
    EXPECT_EQ(MinkowskiMetric{n}.diagonal().sum(), n - 1);
  }
}

TEST(Operators, TraceIgnoresOffDiagonal) {
  Grid g = Grid::cube(3, 8, 1.0);
  SymTensorField F(g);
  F(0, 1) = Array::Random(g.size());
  F(2, 3) = Array::Random(g.size());
  EXPECT_EQ(trace(F).values().abs().maxCoeff(), 0.0);
}

TEST(Operators, TraceOfScalarMetricExact) {
  Grid g = Grid::cube(4, 8, 1.0);
  ScalarField lam(g, Array::Random(g.size()));
  const Array t = trace(scalar_metric(lam)).values();
  EXPECT_LE((t - 3.0 * lam.values()).abs().maxCoeff(), 1e-15);
}

TEST(Operators, DerivativeExactOnQuadratics) {
  Grid g(3, {9, 10, 11, 12}, {0.3, 0.2, 0.25, 0.1}, {-1, -0.5, 0.2, 0.0});
  const Array f = fill(g, [](const Vec& z) { return 1 + 2 * z[0] - z[1] * z[2] + 0.5 * z[3] * z[3] + z[0] * z[0]; });
  const Array d0 = derivative(g, f, 0);
  const Array d3 = derivative(g, f, 3);
  for (Index k = 0; k < g.size(); ++k) {
    const Vec z = g.point(k);
    ASSERT_NEAR(d0[k], 2 + 2 * z[0], 1e-12);
    ASSERT_NEAR(d3[k], z[3], 1e-12);
  }
}

TEST(Operators, DivergenceOfTimeOnlyField) {
  Grid g = Grid::cube(3, 24, 1.0);
  SymTensorField F(g);
  F(0, 0) = fill(g, [](const Vec& z) { return std::sin(z[0]); });
  const VectorField d = divergence(F);
  double err = 0.0;
  for (Index k = 0; k < g.size(); ++k) err = std::max(err, std::abs(d[0][k] - std::cos(g.point(k)[0])));
  EXPECT_LT(err, 5e-3);
  for (int i = 1; i <= 3; ++i) EXPECT_EQ(d[i].abs().maxCoeff(), 0.0);
}

TEST(Operators, DivergenceOfSymDerivativeMatchesOracle) {
  // delta(dv)_i = (Lap v_i + d_i div v)/2, built here with nested central differences.
  Grid g = Grid::cube(3, 12, 1.0);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N;
  VectorField v(g);
  for (int i = 0; i <= 3; ++i) {
    Vec c(4);
    for (int a = 0; a < 4; ++a) c[a] = N(rng);
    v[i] = fill(g, [&](const Vec& z) { return std::sin(c.dot(z)); });
  }
  const VectorField lhs = divergence(sym_derivative(v));
  // Oracle on nodes at depth 2 where every nested stencil is centered.
  std::vector<std::vector<Array>> dv(4);
  for (int i = 0; i <= 3; ++i)
    for (int a = 0; a <= 3; ++a) {
      Array t = Array::Zero(g.size());
      for (Index k = 0; k < g.size(); ++k)
        if (g.is_interior(k, 1)) t[k] = central_diff(g, v[i], k, a);
      dv[i].push_back(t);
    }
  double err = 0.0;
  for (Index k = 0; k < g.size(); ++k) {
    if (!g.is_interior(k, 2)) continue;
    for (int i = 0; i <= 3; ++i) {
      double lap = 0.0, ddiv = 0.0;
      for (int a = 0; a <= 3; ++a) {
        lap += central_diff(g, dv[i][a], k, a);
        ddiv += central_diff(g, dv[a][a], k, i);
      }
      err = std::max(err, std::abs(lhs[i][k] - 0.5 * (lap + ddiv)));
    }
  }
  EXPECT_LT(err, 1e-12);
}

TEST(Operators, SymDerivativeOfLinearIsIdentity) {
  Grid g = Grid::cube(3, 8, 1.0);
  VectorField v(g);
  for (int i = 0; i <= 3; ++i) v[i] = fill(g, [i](const Vec& z) { return z[i]; });
  const SymTensorField d = sym_derivative(v);
  for (int i = 0; i <= 3; ++i)
    for (int j = i; j <= 3; ++j) {
      const double expect = i == j ? 1.0 : 0.0;
      EXPECT_LT((d(i, j) - expect).abs().maxCoeff(), 1e-12);
    }
}

TEST(Operators, Linearity) {
  Grid g = Grid::cube(3, 8, 1.0);
  SymTensorField F(g), G(g);
  for (Index c = 0; c < F.count(); ++c) {
    F.component(c) = Array::Random(g.size());
    G.component(c) = Array::Random(g.size());
  }
  const VectorField lhs = divergence(2.0 * F + (-3.0) * G);
  const VectorField a = divergence(F), b = divergence(G);
  for (int i = 0; i <= 3; ++i) EXPECT_LT((lhs[i] - (2.0 * a[i] - 3.0 * b[i])).abs().maxCoeff(), 1e-10);
}

TEST(Phantoms, GaussianBasics) {
  Grid g = Grid::cube(3, 33, 1.0);
  Vec w = Vec::Zero(10);
  EXPECT_EQ(phantom_gaussian(g, Vec::Zero(4), 0.15, w).max_abs(), 0.0);
  w[0] = 1.0;
  SymTensorField F = phantom_gaussian(g, Vec::Zero(4), 0.15, w);
  EXPECT_TRUE(F.compact_support());
  EXPECT_EQ(F.boundary_max_abs(), 0.0);
  EXPECT_DOUBLE_EQ(F(0, 0)[g.flat({16, 16, 16, 16})], 1.0);
  EXPECT_THROW(phantom_gaussian(g, Vec::Zero(4), 0.5, w), InvalidArgument);
}

TEST(Phantoms, GaussianIntegral) {
  // Riemann sum of a well-resolved Gaussian is spectrally accurate.
  Grid g = Grid::cube(3, 41, 1.0);
  const double w = 0.17;
  Vec wt = Vec::Zero(10);
  wt[0] = 1.0;
  SymTensorField F = phantom_gaussian(g, Vec::Zero(4), w, wt);
  const double integral = F(0, 0).sum() * g.cell_volume();
  const double exact = std::pow(std::sqrt(std::numbers::pi) * w, 4);
  EXPECT_NEAR(integral / exact, 1.0, 1e-6);
}

TEST(Phantoms, GaugeTraceEquation) {
  Grid g = Grid::cube(3, 20, 1.0);
  GaugePhantom p = phantom_gauge(g, random_gauge_spec(g, 3));
  EXPECT_TRUE(p.v.vanishes_on_boundary(0.0));
  const Array r = trace(p.F).values() - 2.0 * p.lambda.values() - vector_divergence(p.v).values();
  EXPECT_LT(r.abs().maxCoeff(), 1e-12);

  GaugeSpec only_lambda = random_gauge_spec(g, 3);
  only_lambda.v_bumps.clear();
  GaugePhantom q = phantom_gauge(g, only_lambda);
  EXPECT_LT((q.F(0, 0) + q.lambda.values()).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(q.F(0, 1).abs().maxCoeff(), 0.0);

  EXPECT_EQ(phantom_gauge(g, GaugeSpec{}).F.max_abs(), 0.0);
}

TEST(Phantoms, AnalyticGaugeConverges) {
  // Analytic dv differs from the discrete one by O(h^2).
  double prev = 0.0;
  for (int N : {16, 32}) {
    Grid g = Grid::cube(3, N, 1.0);
    GaugeSpec s = random_gauge_spec(g, 11);
    GaugePhantom d = phantom_gauge(g, s);
    s.analytic_derivative = true;
    GaugePhantom a = phantom_gauge(g, s);
    double err = 0.0;
    for (Index c = 0; c < d.F.count(); ++c)
      err = std::max(err, interior_max(g, d.F.component(c) - a.F.component(c)));
    if (prev > 0.0) EXPECT_GT(prev / err, 3.0);
    prev = err;
  }
}

TEST(Phantoms, WeylTensorSymmetries) {
  for (int D : {4, 5, 7}) {
    const auto W = random_weyl_tensor(D, 42 + D);
    auto at = [&](int a, int b, int c, int e) { return W[((a * D + b) * D + c) * D + e]; };
    double asym = 0.0, pair = 0.0, ric = 0.0;
    for (int a = 0; a < D; ++a)
      for (int b = 0; b < D; ++b)
        for (int c = 0; c < D; ++c)
          for (int e = 0; e < D; ++e) {
            asym = std::max(asym, std::abs(at(a, b, c, e) + at(b, a, c, e)));
            asym = std::max(asym, std::abs(at(a, b, c, e) + at(a, b, e, c)));
            pair = std::max(pair, std::abs(at(a, b, c, e) - at(c, e, a, b)));
          }
    for (int b = 0; b < D; ++b)
      for (int e = 0; e < D; ++e) {
        double s = 0.0;
        for (int a = 0; a < D; ++a) s += at(a, b, a, e);
        ric = std::max(ric, std::abs(s));
      }
    EXPECT_LT(asym, 1e-14);
    EXPECT_LT(pair, 1e-14);
    EXPECT_LT(ric, 1e-13);
  }
}

TEST(Phantoms, SolenoidalConstraints) {
  Grid g = Grid::cube(3, 16, 1.0);
  SolenoidalPhantom p = phantom_solenoidal(g, SolenoidalSpec{});
  EXPECT_TRUE(p.F.compact_support());
  EXPECT_EQ(p.F.boundary_max_abs(), 0.0);
  EXPECT_NEAR(p.F.max_abs(), 1.0, 1e-12);
  EXPECT_LT(p.trace_residual, 1e-12);
  EXPECT_LT(p.divergence_residual, 1e-10);
  EXPECT_LT(p.discrete_divergence_residual, 1.0);
}

TEST(Phantoms, SolenoidalDiscreteDivergenceIsSecondOrder) {
  SolenoidalSpec s;
  s.terms = 2;
  const double r16 = phantom_solenoidal(Grid::cube(3, 16, 1.0), s).discrete_divergence_residual;
  const double r32 = phantom_solenoidal(Grid::cube(3, 31, 1.0), s).discrete_divergence_residual;
  EXPECT_GT(r16 / r32, 3.0);
}
