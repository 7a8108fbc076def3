#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/LU>

#include "minkray/decomposition.hpp"
#include "minkray/operators.hpp"
#include "minkray/phantoms.hpp"

using namespace minkray;

namespace {

// v_i = amp_i prod_a sin(m_ia pi s_a), s_a in [0,1] across the box.
struct SineField {
  Grid grid;
  std::vector<double> amp;
  std::vector<std::vector<int>> modes;

  double d(int i, int a, int b, const double* z) const {
    // Mixed derivative d_a d_b (a or b = -1 means no derivative).
    double val = amp[i];
    for (int c = 0; c < grid.dims(); ++c) {
      const double L = grid.upper(c) - grid.origin(c);
      const double k = modes[i][c] * std::numbers::pi / L;
      const double x = k * (z[c] - grid.origin(c));
      const int order = (c == a) + (c == b);
      val *= order == 0 ? std::sin(x) : order == 1 ? k * std::cos(x) : -k * k * std::sin(x);
    }
    return val;
  }

  VectorField sample() const {
    VectorField v(grid);
    grid.for_each_point([&](Index k, const double* z) {
      for (int i = 0; i < grid.dims(); ++i) v[i][k] = d(i, -1, -1, z);
    });
    v.zero_boundary();
    return v;
  }

  // Continuous A v evaluated in closed form.
  VectorField image(double alpha, double beta) const {
    VectorField u(grid);
    const int D = grid.dims();
    grid.for_each_point([&](Index k, const double* z) {
      for (int i = 0; i < D; ++i) {
        double acc = 0.0;
        for (int a = 0; a < D; ++a) acc += d(i, a, a, z);
        for (int j = 0; j < D; ++j) acc += (i == 0 ? alpha : beta) * d(j, i, j, z);
        u[i][k] = acc;
      }
    });
    return u;
  }
};

SineField sine_field(const Grid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> M(1, 2);
  std::uniform_real_distribution<double> A(-1.0, 1.0);
  SineField f{g, {}, {}};
  for (int i = 0; i < g.dims(); ++i) {
    f.amp.push_back(A(rng));
    std::vector<int> m;
    for (int a = 0; a < g.dims(); ++a) m.push_back(M(rng));
    f.modes.push_back(m);
  }
  return f;
}

double rel_l2(const VectorField& a, const VectorField& b) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < a.count(); ++i) {
    num += (a[i] - b[i]).square().sum();
    den += b[i].square().sum();
  }
  return std::sqrt(num / den);
}

double max_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  for (int i = 0; i < a.count(); ++i) m = std::max(m, (a[i] - b[i]).abs().maxCoeff());
  return m;
}

}  // namespace

TEST(Symbol, TimeAxis) {
  for (int n : {3, 4, 7}) {
    const double alpha = 1 + 2.0 / (n - 1);
    const auto [A, P] = symbol(Vec::Unit(n + 1, 0), n);
    Vec expect = Vec::Ones(n + 1);
    expect[0] = 1 + alpha;
    EXPECT_EQ(Mat(A), Mat(expect.asDiagonal()));
    EXPECT_EQ(P, A);
  }
  EXPECT_THROW(symbol(Vec::Zero(5), 4), InvalidArgument);
  EXPECT_THROW(symbol(Vec::Ones(4), 4), InvalidArgument);
}

TEST(Symbol, TraceAndQuadraticForm) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> N;
  for (int n : {4, 5, 8}) {
    const double a = 1 + 2.0 / (n - 1), b = 1 - 2.0 / (n - 1);
    Vec xi(n + 1), eta(n + 1);
    for (int i = 0; i <= n; ++i) xi[i] = N(rng), eta[i] = N(rng);
    const auto [A, P] = symbol(xi, n);
    const double x2 = xi.squaredNorm();
    EXPECT_NEAR(A.trace(), (n + 1) * x2 + a * xi[0] * xi[0] + b * (x2 - xi[0] * xi[0]), 1e-12 * x2);
    // Entry-by-entry from the display.
    double quad = 0.0;
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) quad += eta[i] * ((i == j ? x2 : 0.0) + (i == 0 ? a : b) * xi[i] * xi[j]) * eta[j];
    EXPECT_NEAR(eta.dot(A * eta), quad, 1e-12 * x2 * eta.squaredNorm());
    EXPECT_NEAR(eta.dot(P * eta), quad, 1e-12 * x2 * eta.squaredNorm());
  }
}

TEST(Ellipticity, CertificateAndOracle) {
  for (int n : {4, 6}) {
    const EllipticityReport r = ellipticity_certificate(n, 20000, 11);
    EXPECT_TRUE(r.certified);
    EXPECT_DOUBLE_EQ(r.bound, double(n - 3) / (n - 1));
    EXPECT_LE(r.min_ratio, r.sampled_min);
    // Closed form of the reduced quadratic form, independent of the symbol.
    const Vec& x = r.xi;
    const Vec& e = r.eta;
    const double xe = x.dot(e);
    const double oracle = (x.squaredNorm() * e.squaredNorm() + double(n - 3) / (n - 1) * xe * xe +
                           4.0 / (n - 1) * x[0] * e[0] * xe) /
                          (x.squaredNorm() * e.squaredNorm());
    EXPECT_NEAR(oracle, r.min_ratio, 1e-12);
    EXPECT_GE(oracle, r.bound - 1e-9);
  }
  EXPECT_THROW(ellipticity_certificate(3, 10, 1), InvalidArgument);
}

TEST(Ellipticity, OrthogonalSpatialPairHasUnitRatio) {
  const int n = 5;
  Vec xi = Vec::Zero(n + 1), eta = Vec::Zero(n + 1);
  xi[1] = 2.0, xi[2] = -1.0;
  eta[1] = 1.0, eta[2] = 2.0, eta[4] = 3.0;
  const Mat P = symbol(xi, n).second;
  EXPECT_DOUBLE_EQ(eta.dot(P * eta) / (xi.squaredNorm() * eta.squaredNorm()), 1.0);
}

TEST(Krylov, MatchesDenseSolve) {
  std::srand(3);
  const Mat A = Mat::Random(60, 60) + 20.0 * Mat::Identity(60, 60);
  const Vec b = Vec::Random(60);
  Vec x = Vec::Zero(60);
  LinearMap op = [&](const Vec& in, Vec& out) { out = A * in; };
  LinearMap id = [](const Vec& in, Vec& out) { out = in; };
  const KrylovResult r = gmres(op, id, b, x, {1e-12, 500, 10});
  EXPECT_TRUE(r.converged);
  EXPECT_LT((x - A.partialPivLu().solve(b)).norm(), 1e-10);
  Vec z = Vec::Zero(60);
  EXPECT_EQ(gmres(op, id, Vec::Zero(60), z).iterations, 0);
}

TEST(SinePreconditioner, InvertsReflectedWideStencil) {
  Grid g(3, {9, 10, 8, 11}, {0.2, 0.1, 0.3, 0.15}, {0, 0, 0, 0});
  const std::vector<double> w = {3.0, 1.0, 0.5, 2.0};
  SinePreconditioner P(g, w);
  std::srand(4);
  Vec x = Vec::Random(g.size());
  for (Index k = 0; k < g.size(); ++k)
    if (g.on_boundary(k)) x[k] = 0.0;
  Vec y(g.size());
  P.apply(x.data(), y.data());
  // Wide stencil (f[k+2] - 2f[k] + f[k-2]) / 4h^2 with odd reflection about the faces.
  Vec back = Vec::Zero(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    if (g.on_boundary(k)) continue;
    for (int a = 0; a < 4; ++a) {
      const Index N = g.points(a), j = g.coordinate_index(k, a), s = g.stride(a);
      auto at = [&](Index jj) {
        if (jj < 0) return -y[k + (-jj - j) * s];
        if (jj > N - 1) return -y[k + (2 * (N - 1) - jj - j) * s];
        return y[k + (jj - j) * s];
      };
      back[k] += w[a] * (at(j + 2) - 2 * y[k] + at(j - 2)) / (4 * g.spacing(a) * g.spacing(a));
    }
  }
  EXPECT_LT((back - x).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Operator, MatchesCompositeForm) {
  for (int n : {3, 4}) {
    Grid g = Grid::cube(n, 9, 1.0);
    EllipticOperator op(g);
    const VectorField v = random_boundary_vanishing(g, 5);
    const VectorField Av = op.apply(v);
    // 2 delta(dv) - (2/(n-1)) eps D(div v)
    const VectorField dd = divergence(sym_derivative(v));
    const Array q = vector_divergence(v).values();
    for (int i = 0; i <= n; ++i) {
      const double eps = i == 0 ? -1.0 : 1.0;
      const Array ref = 2.0 * dd[i] - (2.0 / (n - 1)) * eps * derivative(g, q, i);
      EXPECT_LT(interior_max_abs(g, Av[i] - ref), 1e-10 * ref.abs().maxCoeff());
    }
  }
}

TEST(Operator, SparseAssemblyAgrees) {
  Grid g = Grid::cube(4, 8, 1.0);
  EllipticOperator op(g);
  const VectorField v = random_boundary_vanishing(g, 6);
  const Vec a = op.assemble() * flatten(v);
  const Vec b = flatten(op.apply(v));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10 * b.cwiseAbs().maxCoeff());
}

TEST(Operator, CoefficientsForThreeDimensions) {
  EllipticOperator op(Grid::cube(3, 8, 1.0));
  EXPECT_DOUBLE_EQ(op.alpha(), 2.0);
  EXPECT_DOUBLE_EQ(op.beta(), 0.0);
  EXPECT_THROW(EllipticOperator(Grid::cube(2, 8, 1.0)), InvalidArgument);
}

TEST(Rhs, ZeroAndPerTermOracle) {
  Grid g = Grid::cube(3, 10, 1.0);
  SymTensorField Z(g);
  const VectorField u0 = assemble_rhs(Z);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(u0[i].abs().maxCoeff(), 0.0);

  std::srand(7);
  SymTensorField F(g);
  for (Index c = 0; c < F.count(); ++c) F.component(c) = Array::Random(g.size());
  const VectorField u = assemble_rhs(F);
  // Interior nodes: explicit centred differences, term by term.
  for (Index k = 0; k < g.size(); ++k) {
    if (g.on_boundary(k)) continue;
    auto dc = [&](const Array& f, int a) {
      const Index s = g.stride(a);
      return (f[k + s] - f[k - s]) / (2 * g.spacing(a));
    };
    for (int i = 0; i <= 3; ++i) {
      double div = 0.0, dtr = 0.0;
      for (int j = 0; j <= 3; ++j) div += dc(F(i, j), j);
      for (int j = 0; j <= 3; ++j) dtr += dc(F(j, j), i);
      const double eps = i == 0 ? -1.0 : 1.0;
      ASSERT_NEAR(u[i][k], 2 * div - eps * dtr, 1e-9);
    }
  }
}

TEST(Rhs, MetricMultipleGivesZero) {
  Grid g = Grid::cube(4, 8, 1.0);
  ScalarField lam(g, Array::Random(g.size()));
  const VectorField u = assemble_rhs(scalar_metric(lam));
  for (int i = 0; i <= 4; ++i) EXPECT_LT(u[i].abs().maxCoeff(), 1e-10);
}

TEST(Solve, ZeroRhsGivesZero) {
  Grid g = Grid::cube(3, 10, 1.0);
  EllipticOperator op(g);
  SolveReport rep;
  const VectorField v = solve_dirichlet(op, VectorField(g), {}, &rep);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(v[i].abs().maxCoeff(), 0.0);
  EXPECT_EQ(rep.method, "trivial");
}

TEST(Solve, HomogeneousFromRandomGuess) {
  for (int n : {3, 4}) {
    Grid g = Grid::cube(n, 10, 1.0);
    EllipticOperator op(g);
    const VectorField guess = random_boundary_vanishing(g, 9);
    SolverOptions opt;
    opt.method = SolverOptions::Method::Krylov;
    const VectorField v = solve_dirichlet(op, VectorField(g), opt, nullptr, &guess);
    double m = 0.0;
    for (int i = 0; i <= n; ++i) m = std::max(m, v[i].abs().maxCoeff());
    EXPECT_LT(m, 1e-8);
  }
}

TEST(Solve, MethodsAgreeOnDiscreteImage) {
  Grid g = Grid::cube(3, 8, 1.0);
  EllipticOperator op(g);
  const VectorField vs = random_boundary_vanishing(g, 10);
  const VectorField u = op.apply(vs);
  for (auto m : {SolverOptions::Method::Direct, SolverOptions::Method::Krylov}) {
    for (bool dec : {true, false}) {
      SolverOptions opt;
      opt.method = m;
      opt.decoupled = dec;
      SolveReport rep;
      const VectorField v = solve_dirichlet(op, u, opt, &rep);
      EXPECT_LT(max_diff(v, vs), 1e-7) << rep.method;
      EXPECT_LE(rep.residual, 1e-9);
    }
  }
}

TEST(Solve, CoupledPathHigherDimension) {
  Grid g = Grid::cube(5, 8, 1.0);
  EllipticOperator op(g);
  const VectorField vs = random_boundary_vanishing(g, 11);
  SolveReport rep;
  const VectorField v = solve_dirichlet(op, op.apply(vs), {}, &rep);
  EXPECT_EQ(rep.method, "gmres");
  EXPECT_LT(max_diff(v, vs), 1e-7);
}

TEST(Solve, DecoupledSpatialRows) {
  Grid g = Grid::cube(3, 12, 1.0);
  EllipticOperator op(g);
  VectorField u(g);
  u[1] = Array::Random(g.size());
  SolverOptions opt;
  opt.method = SolverOptions::Method::Krylov;
  const VectorField v = solve_dirichlet(op, u, opt);
  EXPECT_EQ(v[2].abs().maxCoeff(), 0.0);
  EXPECT_EQ(v[3].abs().maxCoeff(), 0.0);
  EXPECT_GT(v[0].abs().maxCoeff(), 0.0);
}

TEST(Solve, ManufacturedSecondOrder) {
  std::vector<double> err, hs;
  for (Index N : {12, 16, 20}) {
    Grid g = Grid::cube(3, N, 1.0);
    EllipticOperator op(g);
    const SineField f = sine_field(g, 12);
    const VectorField v = solve_dirichlet(op, f.image(op.alpha(), op.beta()));
    err.push_back(rel_l2(v, f.sample()));
    hs.push_back(g.spacing(0));
  }
  const double p1 = std::log(err[0] / err[1]) / std::log(hs[0] / hs[1]);
  const double p2 = std::log(err[1] / err[2]) / std::log(hs[1] / hs[2]);
  EXPECT_GT(p1, 1.7);
  EXPECT_GT(p2, 1.7);
  EXPECT_LT(p2, 2.5);
  EXPECT_LT(err.back(), 5e-2);
}

TEST(Lambda, FromTrace) {
  Grid g = Grid::cube(3, 10, 1.0);
  ScalarField lam(g, Array::Random(g.size()));
  const ScalarField l = lambda_from_trace(scalar_metric(lam), VectorField(g));
  EXPECT_LT((l.values() - lam.values()).abs().maxCoeff(), 1e-14);

  const VectorField v = random_boundary_vanishing(g, 13);
  const ScalarField z = lambda_from_trace(sym_derivative(v), v);
  EXPECT_LT(z.values().abs().maxCoeff(), 1e-12);
}

TEST(Decompose, PureMetricMultiple) {
  Grid g = Grid::cube(3, 12, 1.0);
  GaugeSpec s = random_gauge_spec(g, 3);
  const GaugePhantom p = phantom_gauge(g, s);
  const DecompositionResult r = decompose(scalar_metric(p.lambda));
  EXPECT_LT((r.lambda.values() - p.lambda.values()).abs().maxCoeff(), 1e-12);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(r.v[i].abs().maxCoeff(), 0.0);
  EXPECT_LT(r.F_tilde.max_abs(), 1e-12);
}

TEST(Decompose, GaugeRoundTrip) {
  Grid g = Grid::cube(3, 16, 1.0);
  GaugeSpec s = random_gauge_spec(g, 4);
  s.analytic_derivative = true;
  const GaugePhantom p = phantom_gauge(g, s);
  const DecompositionResult r = decompose(p.F);
  const auto& d = r.diagnostics;
  EXPECT_LT(d.div_residual, 1e-8 * d.div_scale);
  EXPECT_LT(d.trace_residual, 1e-8 * d.field_scale);
  EXPECT_LT(d.reconstruction_residual, 1e-9);
  EXPECT_LT(rel_l2(r.v, p.v), 0.2);
  EXPECT_TRUE(r.v.vanishes_on_boundary());
}

TEST(Decompose, DiscreteGaugeIsExact) {
  Grid g = Grid::cube(3, 12, 1.0);
  const GaugePhantom p = phantom_gauge(g, random_gauge_spec(g, 5));
  const DecompositionResult r = decompose(p.F);
  EXPECT_LT(max_diff(r.v, p.v), 1e-8 * max_diff(p.v, VectorField(g)));
  EXPECT_LT(r.F_tilde.max_abs(), 1e-8 * p.F.max_abs());
}

TEST(Decompose, UniqueAcrossSolvers) {
  Grid g = Grid::cube(3, 8, 1.0);
  std::srand(14);
  SymTensorField F(g);
  for (Index c = 0; c < F.count(); ++c) F.component(c) = Array::Random(g.size());
  SolverOptions a, b;
  a.method = SolverOptions::Method::Direct;
  b.method = SolverOptions::Method::Krylov;
  const DecompositionResult ra = decompose(F, a), rb = decompose(F, b);
  EXPECT_LT(max_diff(ra.v, rb.v), 1e-8);
  EXPECT_LT((ra.lambda.values() - rb.lambda.values()).abs().maxCoeff(), 1e-7);
  EXPECT_LT(ra.diagnostics.div_residual, 1e-7 * ra.diagnostics.div_scale);
}

TEST(Identities, Adjoint) {
  EXPECT_LT(adjoint_residual(Grid::cube(3, 10, 1.0), 5, 1), 1e-10);
  EXPECT_LT(adjoint_residual(Grid::cube(4, 9, 1.0), 3, 2), 1e-10);
}

TEST(Identities, AdjointSpatialColumnsAreLaplaciansForN3) {
  Grid g = Grid::cube(3, 10, 1.0);
  EllipticOperator op(g);
  VectorField w = random_boundary_vanishing(g, 15);
  w[0].setZero();
  const VectorField Aw = op.apply_adjoint(w);
  EXPECT_LT(interior_max_abs(g, Aw[0]), 1e-9);
  for (int j = 1; j <= 3; ++j) {
    Array lap = Array::Zero(g.size());
    for (int a = 0; a <= 3; ++a) lap += derivative(g, derivative(g, w[j], a), a);
    EXPECT_LT(interior_max_abs(g, Aw[j] - lap), 1e-9);
  }
}

TEST(Identities, EnergyAndDiscriminant) {
  for (int n : {3, 4}) {
    Grid g = Grid::cube(n, 9, 1.0);
    EllipticOperator op(g);
    EXPECT_EQ(energy_identity_residual(op, VectorField(g)), 0.0);
    for (unsigned s = 0; s < 5; ++s) {
      const VectorField v = random_boundary_vanishing(g, 100 + s);
      EXPECT_LT(energy_identity_residual(op, v), 1e-10);
      const DiscriminantCheck c = discriminant_check(v);
      EXPECT_TRUE(c.holds());
      EXPECT_GT(c.sum_b2, 0.0);
    }
    VectorField bad = random_boundary_vanishing(g, 1, 0);
    EXPECT_THROW(energy_identity_residual(op, bad), InvalidArgument);
  }
}
