#include "minkray/fourier.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

namespace minkray {

namespace {

using RowMajorC = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;

// sum over a row-major block of real values with per-axis phase vectors.
Complex separable_sum(const double* values, const std::vector<Index>& counts, const std::vector<CVec>& phases) {
  const int d = int(counts.size());
  Index rest = 1;
  for (int a = 0; a < d - 1; ++a) rest *= counts[a];
  const Index last = counts[d - 1];
  Eigen::Map<const Mat> M(values, last, rest);
  CVec cur(rest);
  cur.real() = M.transpose() * phases[d - 1].real();
  cur.imag() = M.transpose() * phases[d - 1].imag();
  for (int a = d - 2; a >= 0; --a) {
    const Index len = counts[a];
    rest /= len;
    Eigen::Map<const CMat> C(cur.data(), len, rest);
    CVec next = C.transpose() * phases[a];
    cur.swap(next);
  }
  return cur[0];
}

CVec axis_phase(Index N, double origin, double h, double zeta) {
  CVec p(N);
  for (Index j = 0; j < N; ++j) p[j] = std::polar(1.0, -(origin + double(j) * h) * zeta);
  return p;
}

// Applies a 1-D transform to every line of `data` along `axis`.
template <class Op>
void along_axis(const Grid& g, CArray& data, int axis, Op&& op) {
  const Index len = g.points(axis);
  const Index inner = g.stride(axis);
  const Index outer = g.size() / (len * inner);
  std::vector<Complex> line(len), out(len);
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      Complex* base = data.data() + o * len * inner + i;
      for (Index k = 0; k < len; ++k) line[k] = base[k * inner];
      op(line, out);
      for (Index k = 0; k < len; ++k) base[k * inner] = out[k];
    }
  }
}

}  // namespace

SpectralField::SpectralField(const Grid& grid, std::vector<CArray> components)
    : grid_(grid), components_(std::move(components)) {
  if (Index(components_.size()) != sym_components(grid_.n())) {
    throw InvalidArgument("SpectralField: need (n+1)(n+2)/2 components");
  }
  for (const auto& c : components_) {
    if (c.size() != grid_.size()) throw InvalidArgument("SpectralField: value count mismatch");
  }
}

double SpectralField::frequency(int axis, Index j) const {
  const Index N = grid_.points(axis);
  return 2.0 * std::numbers::pi * double(frequency_number(j, N)) / (double(N) * grid_.spacing(axis));
}

Vec SpectralField::zeta(Index flat) const {
  Vec z(grid_.dims());
  for (int a = 0; a < grid_.dims(); ++a) z[a] = frequency(a, grid_.coordinate_index(flat, a));
  return z;
}

SpectralTensor SpectralField::at(Index flat) const {
  SpectralTensor s{zeta(flat), CVec(count())};
  for (Index c = 0; c < count(); ++c) s.coeffs[c] = components_[c][flat];
  return s;
}

Index SpectralField::find(const std::vector<Index>& k) const {
  if (int(k.size()) != grid_.dims()) throw InvalidArgument("SpectralField::find: need n+1 frequency numbers");
  std::vector<Index> j(k.size());
  for (int a = 0; a < grid_.dims(); ++a) {
    const Index N = grid_.points(a);
    j[a] = k[a] + N / 2;
    if (j[a] < 0 || j[a] >= N) return -1;
  }
  return grid_.flat(j);
}

SpectralField dft_field(const SymTensorField& F) {
  const Grid& g = F.grid();
  Eigen::FFT<double> fft;
  std::vector<CArray> comps;
  for (Index c = 0; c < F.count(); ++c) {
    CArray data = F.component(c).cast<Complex>();
    for (int a = 0; a < g.dims(); ++a) {
      const Index N = g.points(a);
      CVec phase(N);
      for (Index j = 0; j < N; ++j) {
        const Index k = SpectralField::frequency_number(j, N);
        const double zeta = 2.0 * std::numbers::pi * double(k) / (double(N) * g.spacing(a));
        phase[j] = g.spacing(a) * std::polar(1.0, -g.origin(a) * zeta);
      }
      along_axis(g, data, a, [&](std::vector<Complex>& line, std::vector<Complex>& out) {
        std::vector<Complex> X;
        fft.fwd(X, line);
        for (Index j = 0; j < N; ++j) {
          const Index k = SpectralField::frequency_number(j, N);
          out[j] = X[((k % N) + N) % N] * phase[j];
        }
      });
    }
    comps.push_back(std::move(data));
  }
  return SpectralField(g, std::move(comps));
}

SymTensorField inverse_dft(const SpectralField& S) {
  const Grid& g = S.grid();
  Eigen::FFT<double> fft;
  SymTensorField F(g);
  for (Index c = 0; c < S.count(); ++c) {
    CArray data = S.component(c);
    for (int a = 0; a < g.dims(); ++a) {
      const Index N = g.points(a);
      CVec phase(N);
      for (Index j = 0; j < N; ++j) {
        const Index k = SpectralField::frequency_number(j, N);
        const double zeta = 2.0 * std::numbers::pi * double(k) / (double(N) * g.spacing(a));
        phase[j] = std::polar(1.0, g.origin(a) * zeta) / g.spacing(a);
      }
      along_axis(g, data, a, [&](std::vector<Complex>& line, std::vector<Complex>& out) {
        std::vector<Complex> X(N);
        for (Index j = 0; j < N; ++j) {
          const Index k = SpectralField::frequency_number(j, N);
          X[((k % N) + N) % N] = line[j] * phase[j];
        }
        fft.inv(out, X);
      });
    }
    F.component(c) = data.real();
  }
  F.declare_compact_support(true);
  return F;
}

SpectralTensor dft_at(const SymTensorField& F, const Vec& zeta) {
  const Grid& g = F.grid();
  if (zeta.size() != g.dims()) throw InvalidArgument("dft_at: frequency needs n+1 entries");
  std::vector<CVec> phases;
  for (int a = 0; a < g.dims(); ++a) phases.push_back(axis_phase(g.points(a), g.origin(a), g.spacing(a), zeta[a]));
  SpectralTensor s{zeta, CVec(F.count())};
  const double vol = g.cell_volume();
  for (Index c = 0; c < F.count(); ++c) s.coeffs[c] = vol * separable_sum(F.component(c).data(), g.shape(), phases);
  return s;
}

Vec light_weights(const Vec& t) {
  const int n = int(t.size()) - 1;
  Vec w(sym_components(n));
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) w[component_index(n, i, j)] = pair_multiplicity(i, j) * t[i] * t[j];
  }
  return w;
}

Complex contract_light(const Direction& d, const CVec& coeffs) {
  if (coeffs.size() != sym_components(d.n())) throw InvalidArgument("contract_light: coefficient count mismatch");
  return light_weights(d.tilde()).cast<Complex>().dot(coeffs);
}

Mat constraint_matrix(int n, const Vec& zeta) {
  if (zeta.size() != n + 1) throw InvalidArgument("constraint_matrix: frequency needs n+1 entries");
  Mat C = Mat::Zero(n + 2, sym_components(n));
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) C(i, component_index(n, i, j)) += zeta[j];
    C(n + 1, component_index(n, i, i)) = 1.0;
  }
  return C;
}

Mat constraint_projector(int n, const Vec& zeta) {
  const Mat C = constraint_matrix(n, zeta);
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
  const double tol = 1e-12 * std::max(1.0, svd.singularValues()[0]);
  const Index m = C.cols();
  Index rank = 0;
  for (Index k = 0; k < svd.singularValues().size(); ++k) rank += svd.singularValues()[k] > tol;
  if (rank >= m) throw NumericalFailure("constraint_projector: empty null space");
  const Mat V = svd.matrixV().rightCols(m - rank);
  return V * V.transpose();
}

Vec project_to_hyperplane(const Direction& d, const Vec& zeta) {
  const Vec t = d.tilde();
  if (zeta.size() != t.size()) throw InvalidArgument("slice: frequency needs n+1 entries");
  const double dist = std::abs(zeta.dot(t)) / t.norm();
  if (dist > kHyperplaneTol * std::max(1.0, zeta.norm())) {
    throw InvalidArgument("slice: frequency not in (1, theta)^perp (distance " + std::to_string(dist) + ")");
  }
  return zeta - (zeta.dot(t) / t.squaredNorm()) * t;
}

Complex slice_via_data(const Slab& slab, const Vec& zeta_in) {
  const Vec zeta = project_to_hyperplane(slab.direction, zeta_in);
  const Vec q = slab.basis.transpose() * zeta;
  const int n = int(slab.counts.size());
  std::vector<CVec> phases;
  for (int k = 0; k < n; ++k) {
    const Index M = slab.counts[k];
    const double start = -0.5 * double(M - 1) * slab.spacing;
    phases.push_back(axis_phase(M, start, slab.spacing, q[k]));
  }
  const Complex sum = separable_sum(slab.values.data(), slab.counts, phases);
  return std::sqrt(2.0) * std::pow(slab.spacing, n) * std::polar(1.0, -slab.anchor.dot(zeta)) * sum;
}

double slice_residual(const SymTensorField& F, const Slab& slab, const Vec& zeta_in) {
  const Vec zeta = project_to_hyperplane(slab.direction, zeta_in);
  const Complex lhs = contract_light(slab.direction, dft_at(F, zeta));
  const Complex rhs = slice_via_data(slab, zeta);
  const Grid& g = F.grid();
  const double floor = 1e-12 * F.max_abs() * g.cell_volume() * double(g.size());
  const double denom = std::max(std::abs(lhs), floor);
  return denom > 0.0 ? std::abs(lhs - rhs) / denom : 0.0;
}

double slice_residual(const SymTensorField& F, const Direction& d, const Vec& zeta) {
  return slice_residual(F, transform_slab(F, d), zeta);
}

}  // namespace minkray
