#include "minkray/freq_solver.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "minkray/parallel.hpp"

namespace minkray {

TrigCoeffs trig_coefficients(const Family& f, double phi, const Mat& A) {
  const int n = int(A.rows());
  if (A.cols() != n) throw InvalidArgument("trig_coefficients: rotation must be square");
  validate_family(n, f);
  TrigCoeffs tc{Vec(n), Vec(n), Vec(n)};
  const double s = std::sin(phi), c = std::cos(phi);
  for (int i = 0; i < n; ++i) {
    tc.c[i] = A(1, i) * s;
    tc.p[i] = A(0, i) * c;
    tc.q[i] = f.is_pair() ? (A(f.k - 1, i) + A(f.l - 1, i)) * c / std::sqrt(2.0) : A(f.k - 1, i) * c;
  }
  return tc;
}

TrigPoly trig_product(double c1, double p1, double q1, double c2, double p2, double q2) {
  TrigPoly t;
  t << c1 * c2 + 0.5 * (p1 * p2 + q1 * q2), c1 * p2 + c2 * p1, c1 * q2 + c2 * q1, 0.5 * (p1 * p2 - q1 * q2),
      0.5 * (p1 * q2 + p2 * q1);
  return t;
}

Eigen::Matrix<double, 5, 5> trig_derivative_map() {
  Eigen::Matrix<double, 5, 5> D;
  // columns: 1, cos a, sin a, cos 2a, sin 2a
  D << 1, 1, 0, 1, 0,  //
      0, 0, 1, 0, 2,   //
      0, -1, 0, -4, 0, //
      0, 0, -1, 0, -8, //
      0, 1, 0, 16, 0;
  return D;
}

Mat directional_rows(const Vec& zeta, const TrigCoeffs& tc) {
  const int n = int(tc.c.size());
  if (zeta.size() != n + 1) throw InvalidArgument("directional_rows: frequency needs n+1 entries");
  const auto D = trig_derivative_map();
  auto triple = [&](int i) -> Eigen::Vector3d {
    if (i == 0) return {1.0, 0.0, 0.0};
    return {tc.c[i - 1], tc.p[i - 1], tc.q[i - 1]};
  };
  Mat rows = Mat::Zero(5, sym_components(n));
  for (int i = 0; i <= n; ++i) {
    const Eigen::Vector3d u = triple(i);
    for (int j = i; j <= n; ++j) {
      const Eigen::Vector3d v = triple(j);
      const TrigPoly t = trig_product(u[0], u[1], u[2], v[0], v[1], v[2]);
      rows.col(component_index(n, i, j)) = pair_multiplicity(i, j) * (D * t);
    }
  }
  return rows;
}

Mat constraint_rows(const Vec& zeta) {
  if (zeta.size() < 4) throw InvalidArgument("constraint_rows: frequency needs n+1 >= 4 entries");
  if (zeta.norm() == 0.0) throw InvalidArgument("constraint_rows: zeta = 0 leaves only the trace row");
  return constraint_matrix(int(zeta.size()) - 1, zeta);
}

bool is_space_like(const Vec& zeta) { return std::abs(zeta[0]) < zeta.tail(zeta.size() - 1).norm(); }

Frame frame_for(const Vec& zeta) {
  if (zeta.size() < 4) throw InvalidArgument("frame_for: frequency needs n+1 >= 4 entries");
  if (!is_space_like(zeta)) throw InvalidArgument("frame_for: zeta is not space-like (|zeta_0| >= |zeta'|)");
  const Vec zp = zeta.tail(zeta.size() - 1);
  const double r = zp.norm();
  return Frame{std::asin(-zeta[0] / r), rotation_to_e2(zp / r)};
}

std::vector<Family> families_for(int n) {
  if (n < 3) throw InvalidArgument("families_for: n must be >= 3");
  std::vector<Family> out;
  for (int k = 3; k <= n; ++k) out.push_back({k, 0});
  for (int k = 3; k <= n; ++k)
    for (int l = k + 1; l <= n; ++l) out.push_back({k, l});
  return out;
}

Complex SpectrumProvider::contracted(const Direction& d, const Vec& zeta) const {
  return contract_light(d, spectrum_(zeta));
}

SlabProvider::SlabProvider(SymTensorField F, int workers, double noise_sigma, std::uint64_t seed,
                           Interpolation interp)
    : field_(std::move(F)), workers_(workers), noise_sigma_(noise_sigma), seed_(seed), interp_(interp) {
  if (noise_sigma_ < 0.0) throw InvalidArgument("SlabProvider: noise sigma must be >= 0");
}

std::shared_ptr<const Slab> SlabProvider::slab_for(const Direction& d) const {
  std::vector<double> key(d.theta().data(), d.theta().data() + d.n());
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto slab = std::make_shared<Slab>(transform_slab(field_, d, {}, workers_, interp_));
  if (noise_sigma_ > 0.0) {
    std::uint64_t h = seed_;
    for (double x : key) {
      std::uint64_t bits;
      std::memcpy(&bits, &x, sizeof bits);
      h = (h ^ bits) * 0x100000001b3ULL;
    }
    std::mt19937_64 rng(h);
    std::normal_distribution<double> N(0.0, noise_sigma_);
    for (Index i = 0; i < slab->values.size(); ++i) slab->values[i] += N(rng);
  }
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(std::move(key), std::move(slab)).first->second;
}

Complex SlabProvider::contracted(const Direction& d, const Vec& zeta) const {
  return slice_via_data(*slab_for(d), zeta);
}

std::size_t SlabProvider::cached_slabs() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

std::vector<double> FitSpec::angles() const {
  if (samples < 5) throw InvalidArgument("fit: need at least 5 angle samples");
  if (!(max_angle > 0.0)) throw InvalidArgument("fit: angle range must be positive");
  std::vector<double> a(samples);
  for (int s = 0; s < samples; ++s) a[s] = -max_angle + 2.0 * max_angle * double(s) / double(samples - 1);
  return a;
}

CVec fit_derivatives(const std::vector<double>& angles, const CVec& values) {
  const Index S = Index(angles.size());
  if (S < 5 || values.size() != S) throw InvalidArgument("fit_derivatives: need >= 5 matching samples");
  Mat X(S, 5);
  for (Index s = 0; s < S; ++s) {
    const double a = angles[s];
    X.row(s) << 1.0, std::cos(a), std::sin(a), std::cos(2 * a), std::sin(2 * a);
  }
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  if (qr.rank() < 5) throw NumericalFailure("fit_derivatives: angles do not determine the fit");
  const Vec re = qr.solve(Vec(values.real()));
  const Vec im = qr.solve(Vec(values.imag()));
  const auto D = trig_derivative_map();
  CVec out(5);
  out.real() = D * re;
  out.imag() = D * im;
  return out;
}

FrequencySystem assemble_system(const Vec& zeta, const Frame& frame, const std::vector<Family>& families,
                                const DataProvider* data, const FitSpec& fit) {
  const int n = int(zeta.size()) - 1;
  if (n < 3) throw InvalidArgument("assemble_system: n must be >= 3");
  if (!is_space_like(zeta)) throw InvalidArgument("assemble_system: zeta is not space-like");
  if (frame.A.rows() != n || frame.A.cols() != n) throw InvalidArgument("assemble_system: frame dimension mismatch");
  if (families.empty()) throw InvalidArgument("assemble_system: no direction families");
  const Index m = sym_components(n);
  const Index r = 5 * Index(families.size()) + n + 2;

  FrequencySystem sys{zeta, Mat::Zero(r, m), CVec::Zero(r), {}, frame};
  const std::vector<double> angles = data ? fit.angles() : std::vector<double>{};
  Index row = 0;
  for (const Family& f : families) {
    const TrigCoeffs tc = trig_coefficients(f, frame.phi, frame.A);
    Vec t0(n + 1);
    t0[0] = 1.0;
    t0.tail(n) = tc.evaluate(0.0);
    if (std::abs(t0.dot(zeta)) > 1e-10 * std::max(1.0, zeta.norm())) {
      throw InvalidArgument("assemble_system: frame inconsistent, (1, Theta(phi, 0)).zeta != 0");
    }
    sys.rows.middleRows(row, 5) = directional_rows(zeta, tc);
    const std::string name = f.is_pair() ? "pair(" + std::to_string(f.k) + "," + std::to_string(f.l) + ")"
                                         : "single(" + std::to_string(f.k) + ")";
    if (data) {
      CVec y(Index(angles.size()));
      for (std::size_t s = 0; s < angles.size(); ++s) y[Index(s)] = data->contracted(Direction(tc.evaluate(angles[s])), zeta);
      sys.rhs.segment(row, 5) = fit_derivatives(angles, y);
    }
    for (int k = 0; k < 5; ++k) sys.tags.push_back(name + ":d" + std::to_string(k));
    row += 5;
  }
  sys.rows.middleRows(row, n + 2) = constraint_rows(zeta);
  for (int i = 0; i <= n; ++i) sys.tags.push_back("div(" + std::to_string(i) + ")");
  sys.tags.push_back("trace");
  return sys;
}

FrequencySystem assemble_system(const Vec& zeta, const DataProvider* data, const FitSpec& fit) {
  return assemble_system(zeta, frame_for(zeta), families_for(int(zeta.size()) - 1), data, fit);
}

FrequencySolution solve_frequency(const FrequencySystem& sys, double rank_tol) {
  const Index m = sys.rows.cols();
  Mat R = sys.rows;
  CVec b = sys.rhs;
  for (Index i = 0; i < R.rows(); ++i) {
    const double s = R.row(i).norm();
    if (s == 0.0) continue;
    R.row(i) /= s;
    b[i] /= s;
  }
  Eigen::JacobiSVD<Mat> svd(R, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec& sv = svd.singularValues();
  FrequencySolution out;
  out.sigma_min = sv[sv.size() - 1];
  out.cond = sv[0] / out.sigma_min;
  for (Index k = 0; k < sv.size(); ++k) out.rank += sv[k] > rank_tol * sv[0];
  if (R.rows() < m || out.rank < m) {
    throw NumericalFailure("solve_frequency: rank " + std::to_string(out.rank) + " < " + std::to_string(m) +
                           " (sigma_min " + std::to_string(out.sigma_min) + ")");
  }
  const Mat& U = svd.matrixU();
  const Mat& V = svd.matrixV();
  const Vec inv = sv.cwiseInverse();
  CVec x(m);
  x.real() = V * inv.asDiagonal() * (U.transpose() * Vec(b.real()));
  x.imag() = V * inv.asDiagonal() * (U.transpose() * Vec(b.imag()));
  out.spectrum = SpectralTensor{sys.zeta, x};
  return out;
}

Vec cone_zeta(double alpha, double beta, double phi) {
  Vec z(4);
  z << -std::sin(phi), std::sin(alpha) * std::cos(beta), std::cos(alpha), std::sin(alpha) * std::sin(beta);
  return z;
}

double DeterminantMap::axis_value(int j) const {
  if (resolution == 1) return 0.0;
  return -half_width + 2.0 * half_width * double(j) / double(resolution - 1);
}

double system_determinant(const Vec& zeta) {
  if (zeta.size() != 4) throw InvalidArgument("system_determinant: the square system needs n = 3");
  const FrequencySystem sys = assemble_system(zeta);
  return Eigen::FullPivLU<Mat>(sys.rows).determinant();
}

DeterminantMap determinant_map(double half_width, int resolution, int workers) {
  if (resolution < 1) throw InvalidArgument("determinant_map: resolution must be >= 1");
  if (!(half_width >= 0.0) || half_width >= 0.5) throw InvalidArgument("determinant_map: half width must lie in [0, 0.5)");
  DeterminantMap map;
  map.half_width = half_width;
  map.resolution = resolution;
  const Index R = resolution;
  map.values.assign(std::size_t(R * R * R), 0.0);
  parallel_for(R * R * R, workers, [&](Index k) {
    const int i = int(k / (R * R)), j = int((k / R) % R), l = int(k % R);
    map.values[std::size_t(k)] =
        std::abs(system_determinant(cone_zeta(map.axis_value(i), map.axis_value(j), map.axis_value(l))));
  });
  const auto it = std::min_element(map.values.begin(), map.values.end());
  map.min_abs = *it;
  map.argmin = Index(it - map.values.begin());
  map.at_origin = std::abs(system_determinant(cone_zeta(0.0, 0.0, 0.0)));
  return map;
}

std::vector<Vec> cone_directions(int n, const ConeSpec& spec) {
  if (n < 3) throw InvalidArgument("cone: n must be >= 3");
  if (!(spec.half_width >= 0.0) || spec.half_width >= 0.5) throw InvalidArgument("cone: half width must lie in [0, 0.5)");
  std::vector<Vec> out;
  if (n == 3 && spec.random_samples == 0) {
    if (spec.resolution < 1) throw InvalidArgument("cone: resolution must be >= 1");
    auto axis = [&](int j) {
      return spec.resolution == 1 ? 0.0
                                  : -spec.half_width + 2.0 * spec.half_width * double(j) / double(spec.resolution - 1);
    };
    for (int i = 0; i < spec.resolution; ++i)
      for (int j = 0; j < spec.resolution; ++j)
        for (int l = 0; l < spec.resolution; ++l) out.push_back(cone_zeta(axis(i), axis(j), axis(l)));
    return out;
  }
  const int count = spec.random_samples > 0 ? spec.random_samples : spec.resolution * spec.resolution * spec.resolution;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> U(-spec.half_width, spec.half_width);
  std::normal_distribution<double> N;
  for (int s = 0; s < count; ++s) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = N(rng);
    u[1] = 0.0;
    u /= u.norm();
    const double alpha = U(rng), phi = U(rng);
    Vec z(n + 1);
    z[0] = -std::sin(phi);
    z.tail(n) = std::cos(alpha) * Vec::Unit(n, 1) + std::sin(alpha) * u;
    out.push_back(z);
  }
  return out;
}

std::vector<ConeResult> cone_sweep(int n, const DataProvider& data, const ConeSpec& spec, const FitSpec& fit,
                                   int workers) {
  if (spec.scales.empty()) throw InvalidArgument("cone: need at least one radial scale");
  for (double s : spec.scales) {
    if (!(s > 0.0)) throw InvalidArgument("cone: radial scales must be positive");
  }
  const std::vector<Vec> dirs = cone_directions(n, spec);
  std::vector<ConeResult> out(dirs.size() * spec.scales.size());
  parallel_for(Index(out.size()), workers, [&](Index k) {
    ConeResult& r = out[std::size_t(k)];
    r.zeta = spec.scales[std::size_t(k) % spec.scales.size()] * dirs[std::size_t(k) / spec.scales.size()];
    try {
      const FrequencySolution sol = solve_frequency(assemble_system(r.zeta, &data, fit));
      r.coeffs = sol.spectrum.coeffs;
      r.sigma_min = sol.sigma_min;
      r.cond = sol.cond;
      r.ok = true;
    } catch (const Error& e) {
      r.error = e.what();
    }
  });
  return out;
}

}  // namespace minkray
