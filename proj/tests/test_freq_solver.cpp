#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "minkray/freq_solver.hpp"
#include "minkray/phantoms.hpp"

using namespace minkray;

namespace {

// Fraction-free Gaussian elimination on an integer matrix.
long long bareiss_det(std::vector<std::vector<long long>> M) {
  const std::size_t n = M.size();
  long long sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (M[k][k] == 0) {
      std::size_t p = k + 1;
      while (p < n && M[p][k] == 0) ++p;
      if (p == n) return 0;
      std::swap(M[p], M[k]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j) M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev;
    prev = M[k][k];
  }
  return sign * M[n - 1][n - 1];
}

Vec zeta0() { return Vec::Unit(4, 2); }

Index ix(int i, int j) { return component_index(3, i, j); }

Vec random_unit(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v / v.norm();
}

CVec random_constrained(int n, const Vec& zeta, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  const Index m = sym_components(n);
  CVec s(m);
  for (Index k = 0; k < m; ++k) s[k] = Complex(N(rng), N(rng));
  return constraint_projector(n, zeta).cast<Complex>() * s;
}

}  // namespace

TEST(TrigCoeffs, BaseFamily) {
  const TrigCoeffs tc = trig_coefficients({3, 0}, 0.0, Mat::Identity(3, 3));
  EXPECT_EQ(tc.c, Vec::Zero(3));
  EXPECT_EQ(tc.p, Vec::Unit(3, 0));
  EXPECT_EQ(tc.q, Vec::Unit(3, 2));
}

TEST(TrigCoeffs, MatchesDirectionFamily) {
  std::mt19937_64 rng(1);
  for (int n : {3, 4, 6}) {
    const Mat A = rotation_to_e2(random_unit(n, rng));
    for (const Family& f : families_for(n)) {
      const TrigCoeffs tc = trig_coefficients(f, 0.07, A);
      EXPECT_LT((tc.evaluate(0.3) - direction_family(f, 0.07, 0.3, A).theta()).norm(), 1e-14);
      EXPECT_NEAR((tc.c + tc.p).squaredNorm(), 1.0, 1e-12);
      EXPECT_EQ(trig_coefficients(f, 0.0, A).c.norm(), 0.0);
    }
  }
  EXPECT_THROW(trig_coefficients({2, 0}, 0.0, Mat::Identity(3, 3)), InvalidArgument);
}

TEST(DirectionalRows, IntegerRowsAtZeta0) {
  const Mat rows = directional_rows(zeta0(), trig_coefficients({3, 0}, 0.0, Mat::Identity(3, 3)));
  const double scale[5] = {1.0, 0.5, -0.5, -0.5, 0.5};
  Mat expect = Mat::Zero(5, 10);
  expect(0, ix(0, 0)) = 1, expect(0, ix(0, 1)) = 2, expect(0, ix(1, 1)) = 1;
  expect(1, ix(0, 3)) = 1, expect(1, ix(1, 3)) = 1;
  expect(2, ix(0, 1)) = 1, expect(2, ix(1, 1)) = 1, expect(2, ix(3, 3)) = -1;
  expect(3, ix(0, 3)) = 1, expect(3, ix(1, 3)) = 4;
  expect(4, ix(0, 1)) = 1, expect(4, ix(1, 1)) = 4, expect(4, ix(3, 3)) = -4;
  for (int r = 0; r < 5; ++r) EXPECT_EQ(Mat(scale[r] * rows.row(r)), Mat(expect.row(r))) << "row " << r;
}

TEST(DirectionalRows, DegenerateCoefficients) {
  TrigCoeffs tc{Vec::Zero(3), Vec::Zero(3), Vec::Zero(3)};
  const Mat rows = directional_rows(zeta0(), tc);
  EXPECT_EQ(rows(0, 0), 1.0);
  EXPECT_EQ(rows.cwiseAbs().sum(), 1.0);
}

TEST(DirectionalRows, AgreeWithNumericalDifferentiation) {
  // Central differences on 9 points in long double, weights from a Vandermonde solve.
  const int P = 9;
  const long double h = 0.02L;
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic> V(P, P);
  for (int r = 0; r < P; ++r)
    for (int s = 0; s < P; ++s) V(r, s) = std::pow((long double)(s - 4), r);
  const Eigen::FullPivLU<decltype(V)> lu(V);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-0.2, 0.2);
  for (int n : {3, 5}) {
    for (int t = 0; t < 4; ++t) {
      const Mat A = rotation_to_e2(random_unit(n, rng));
      const double phi = U(rng);
      const Family f = families_for(n).back();
      const TrigCoeffs tc = trig_coefficients(f, phi, A);
      Vec zeta(n + 1);
      zeta << -std::sin(phi), A.transpose() * Vec::Unit(n, 1);
      const Mat rows = directional_rows(zeta, tc);
      const Vec S = Vec::Random(sym_components(n));
      auto g = [&](long double a) {
        Eigen::Matrix<long double, Eigen::Dynamic, 1> th(n + 1);
        th[0] = 1;
        for (int i = 0; i < n; ++i) th[i + 1] = tc.c[i] + tc.p[i] * std::cos(a) + tc.q[i] * std::sin(a);
        long double acc = 0;
        for (int i = 0; i <= n; ++i)
          for (int j = 0; j <= n; ++j) acc += th[i] * th[j] * (long double)S[component_index(n, i, j)];
        return acc;
      };
      Eigen::Matrix<long double, Eigen::Dynamic, 1> samples(P);
      for (int s = 0; s < P; ++s) samples[s] = g((s - 4) * h);
      for (int r = 0; r <= 4; ++r) {
        Eigen::Matrix<long double, Eigen::Dynamic, 1> rhs = Eigen::Matrix<long double, Eigen::Dynamic, 1>::Zero(P);
        long double fact = 1;
        for (int k = 2; k <= r; ++k) fact *= k;
        rhs[r] = fact / std::pow(h, r);
        const Eigen::Matrix<long double, Eigen::Dynamic, 1> w = lu.solve(rhs);
        const double numeric = double(w.dot(samples));
        EXPECT_NEAR(rows.row(r).dot(S), numeric, 1e-8) << "n=" << n << " r=" << r;
      }
    }
  }
}

TEST(ConstraintRows, Zeta0SelectsColumnTwo) {
  const Mat C = constraint_rows(zeta0());
  for (int i = 0; i <= 3; ++i) {
    Vec expect = Vec::Zero(10);
    expect[ix(i, 2)] = 1.0;
    EXPECT_EQ(Vec(C.row(i)), expect);
  }
  Vec tr = Vec::Zero(10);
  for (int i = 0; i <= 3; ++i) tr[ix(i, i)] = 1.0;
  EXPECT_EQ(Vec(C.row(4)), tr);
  EXPECT_THROW(constraint_rows(Vec::Zero(4)), InvalidArgument);
}

TEST(ConstraintRows, AnnihilateConstrainedSpectra) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    const Vec zeta = 3.0 * random_unit(4, rng);
    const CVec s = random_constrained(3, zeta, rng);
    EXPECT_LT((constraint_rows(zeta).cast<Complex>() * s).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(System, Zeta0ContainsIntegerRows) {
  const FrequencySystem sys = assemble_system(zeta0());
  ASSERT_EQ(sys.rows.rows(), 10);
  ASSERT_EQ(sys.rows.cols(), 10);
  EXPECT_EQ(sys.tags.front(), "single(3):d0");
  EXPECT_EQ(sys.tags.back(), "trace");
  EXPECT_EQ(sys.rhs.cwiseAbs().maxCoeff(), 0.0);
  const FrequencySolution sol = solve_frequency(sys);
  EXPECT_EQ(sol.rank, 10);
  EXPECT_EQ(sol.spectrum.coeffs.cwiseAbs().maxCoeff(), 0.0);
}

TEST(System, DeterminantAgainstIntegerOracle) {
  const FrequencySystem sys = assemble_system(zeta0());
  std::vector<std::vector<long long>> M(10, std::vector<long long>(10));
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      ASSERT_EQ(sys.rows(i, j), std::round(sys.rows(i, j)));
      M[i][j] = (long long)std::llround(sys.rows(i, j));
    }
  const long long exact = bareiss_det(M);
  EXPECT_EQ(std::llabs(exact), 144);
  EXPECT_NEAR(std::abs(system_determinant(zeta0())), 144.0, 144.0 * 1e-12);
}

TEST(System, RejectsBadFrequencies) {
  EXPECT_THROW(assemble_system(Vec::Unit(4, 0)), InvalidArgument);
  Frame bad = frame_for(zeta0());
  bad.phi = 0.3;
  EXPECT_THROW(assemble_system(zeta0(), bad, families_for(3)), InvalidArgument);
}

TEST(System, FrameProperty) {
  std::mt19937_64 rng(5);
  ConeSpec spec;
  spec.random_samples = 30;
  for (int n : {3, 4, 5}) {
    for (const Vec& z : cone_directions(n, spec)) {
      const Frame fr = frame_for(2.5 * z);
      for (const Family& f : families_for(n)) {
        const TrigCoeffs tc = trig_coefficients(f, fr.phi, fr.A);
        for (double a : {-0.2, -0.05, 0.0, 0.13}) {
          Vec t(n + 1);
          t << 1.0, tc.evaluate(a);
          EXPECT_LT(std::abs(t.dot(2.5 * z)), 1e-10);
        }
      }
    }
  }
}

TEST(System, RowCountsForHigherDimensions) {
  for (int n : {4, 5, 6}) {
    const Index fam = (n - 2) + (n - 2) * (n - 3) / 2;
    EXPECT_EQ(Index(families_for(n).size()), fam);
    const FrequencySystem sys = assemble_system(Vec::Unit(n + 1, 2));
    EXPECT_EQ(sys.rows.rows(), 5 * fam + n + 2);
    EXPECT_EQ(solve_frequency(sys).rank, sym_components(n));
  }
}

TEST(Fit, RecoversTrigPolynomialDerivatives) {
  FitSpec fit;
  const auto a = fit.angles();
  ASSERT_EQ(a.size(), 7u);
  EXPECT_DOUBLE_EQ(a.front(), -0.2);
  const TrigPoly coef = (TrigPoly() << 0.3, -1.2, 0.7, 2.0, -0.4).finished();
  CVec y(7);
  for (int s = 0; s < 7; ++s) {
    const double v = coef[0] + coef[1] * std::cos(a[s]) + coef[2] * std::sin(a[s]) + coef[3] * std::cos(2 * a[s]) +
                     coef[4] * std::sin(2 * a[s]);
    y[s] = Complex(v, -2 * v);
  }
  const CVec d = fit_derivatives(a, y);
  const Vec expect = trig_derivative_map() * coef;
  for (int r = 0; r < 5; ++r) {
    EXPECT_NEAR(d[r].real(), expect[r], 1e-10 * std::max(1.0, std::abs(expect[r])));
    EXPECT_NEAR(d[r].imag(), -2 * expect[r], 1e-10 * std::max(1.0, std::abs(expect[r])));
  }
  EXPECT_THROW(FitSpec({4, 0.2}).angles(), InvalidArgument);
}

TEST(Recovery, SyntheticSpectraN3) {
  std::mt19937_64 rng(6);
  ConeSpec spec;
  spec.random_samples = 50;
  for (const Vec& dir : cone_directions(3, spec)) {
    const Vec zeta = 2.0 * dir;
    const CVec S = random_constrained(3, zeta, rng);
    SpectrumProvider data([&](const Vec&) { return S; });
    const FrequencySolution sol = solve_frequency(assemble_system(zeta, &data));
    EXPECT_LT((sol.spectrum.coeffs - S).norm() / S.norm(), 1e-10);
  }
}

TEST(Recovery, ZeroDataGivesZero) {
  SpectrumProvider data([](const Vec&) { return CVec::Zero(10); });
  ConeSpec spec;
  spec.resolution = 2;
  for (const ConeResult& r : cone_sweep(3, data, spec)) {
    ASSERT_TRUE(r.ok) << r.error;
    EXPECT_EQ(r.coeffs.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Recovery, RadialScaling) {
  const Vec z = cone_zeta(0.05, -0.03, 0.04);
  const FrequencySystem a = assemble_system(z), b = assemble_system(3.0 * z);
  EXPECT_LT((a.rows.topRows(5) - b.rows.topRows(5)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((3.0 * a.rows.middleRows(5, 4) - b.rows.middleRows(5, 4)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(a.rows.row(9), b.rows.row(9));
}

TEST(Recovery, RankInHigherDimensions) {
  for (int n : {4, 5}) {
    ConeSpec spec;
    spec.random_samples = 40;
    spec.scales = {0.5, 2.0};
    SpectrumProvider data([n](const Vec&) { return CVec::Zero(sym_components(n)); });
    for (const ConeResult& r : cone_sweep(n, data, spec)) EXPECT_TRUE(r.ok) << r.error;
  }
}

TEST(DeterminantMap, SmallBox) {
  const DeterminantMap map = determinant_map(0.1, 5);
  EXPECT_NEAR(map.values[2 * 25 + 2 * 5 + 2], map.at_origin, 1e-12 * map.at_origin);
  EXPECT_GT(map.min_abs, 0.0);
  // Even in beta at alpha = 0.
  for (int j = 0; j < 5; ++j)
    for (int l = 0; l < 5; ++l) EXPECT_NEAR(map.values[2 * 25 + j * 5 + l], map.values[2 * 25 + (4 - j) * 5 + l], 1e-10);
}

TEST(DeterminantMap, PinnedMinimum) {
  // Independent evaluation of the same 21^3 box gave min |det| = 144.
  const DeterminantMap map = determinant_map(0.1, 21);
  EXPECT_NEAR(map.min_abs, 144.0, 144.0 * 1e-12);
}

TEST(SlabProvider, CachesPerDirection) {
  Grid g = Grid::cube(3, 12, 1.0);
  Vec w = Vec::Zero(10);
  w[0] = 1.0;
  SlabProvider data(phantom_gaussian(g, Vec::Zero(4), 0.15, w));
  const Vec z = cone_zeta(0.02, 0.01, 0.03);
  const Frame fr = frame_for(z);
  const Complex a = data.contracted(direction_family({3, 0}, fr.phi, 0.1, fr.A), z);
  const Complex b = data.contracted(direction_family({3, 0}, fr.phi, 0.1, fr.A), z);
  EXPECT_EQ(a, b);
  EXPECT_EQ(data.cached_slabs(), 1u);
}
