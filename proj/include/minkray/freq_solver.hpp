#ifndef MINKRAY_FREQ_SOLVER_HPP
#define MINKRAY_FREQ_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "minkray/fourier.hpp"
#include "minkray/lightray.hpp"

namespace minkray {

/// Spatial direction components Theta_i(a) = c_i + p_i cos a + q_i sin a.
struct TrigCoeffs {
  Vec c, p, q;

  Vec evaluate(double a) const { return c + p * std::cos(a) + q * std::sin(a); }
};

TrigCoeffs trig_coefficients(const Family& f, double phi, const Mat& A);

/// Degree-2 trigonometric polynomial in the basis {1, cos a, sin a, cos 2a, sin 2a}.
using TrigPoly = Eigen::Matrix<double, 5, 1>;

/// Product of (c1 + p1 cos a + q1 sin a)(c2 + p2 cos a + q2 sin a).
TrigPoly trig_product(double c1, double p1, double q1, double c2, double p2, double q2);

/// Row r holds the r-th derivative at a = 0 of each basis function.
Eigen::Matrix<double, 5, 5> trig_derivative_map();

/// Rows r = 0..4: d^r/da^r at a = 0 of sum_{i<=j} mu_ij Ã_i Ã_j F_ij with
/// Ã = (1, Theta(a)). Computed by trigonometric algebra.
Mat directional_rows(const Vec& zeta, const TrigCoeffs& tc);

/// Divergence rows and the trace row; rejects zeta = 0.
Mat constraint_rows(const Vec& zeta);

/// phi with sin phi = -zeta_0/|zeta'| and A = rotation_to_e2(zeta'/|zeta'|).
struct Frame {
  double phi = 0.0;
  Mat A;
};

bool is_space_like(const Vec& zeta);
Frame frame_for(const Vec& zeta);

/// n = 3: the single family k = 3. n >= 4: singles k = 3..n, then pairs.
std::vector<Family> families_for(int n);

/// Source of measured contractions tilde^i tilde^j F^_ij(zeta) along one light
/// direction. Implementations must be safe to call concurrently.
class DataProvider {
 public:
  virtual ~DataProvider() = default;
  virtual Complex contracted(const Direction& d, const Vec& zeta) const = 0;
};

/// Exact contractions of a known spectrum function.
class SpectrumProvider : public DataProvider {
 public:
  explicit SpectrumProvider(std::function<CVec(const Vec&)> spectrum) : spectrum_(std::move(spectrum)) {}
  Complex contracted(const Direction& d, const Vec& zeta) const override;

 private:
  std::function<CVec(const Vec&)> spectrum_;
};

/// Measured contractions: slab transforms of a field followed by
/// slice_via_data. Slabs are cached per direction. Optional additive Gaussian
/// noise on the slab values, seeded per direction.
class SlabProvider : public DataProvider {
 public:
  SlabProvider(SymTensorField F, int workers = 1, double noise_sigma = 0.0, std::uint64_t seed = 0,
               Interpolation interp = Interpolation::Multilinear);
  Complex contracted(const Direction& d, const Vec& zeta) const override;
  std::size_t cached_slabs() const;
  const SymTensorField& field() const { return field_; }

 private:
  std::shared_ptr<const Slab> slab_for(const Direction& d) const;

  SymTensorField field_;
  int workers_;
  double noise_sigma_;
  std::uint64_t seed_;
  Interpolation interp_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, std::shared_ptr<const Slab>> cache_;
};

/// Angles used to sample each family for the trigonometric fit.
struct FitSpec {
  int samples = 7;
  double max_angle = 0.2;

  std::vector<double> angles() const;
};

/// Least-squares fit of samples y(a_s) to the degree-2 trig basis, returning
/// the derivatives r = 0..4 at a = 0.
CVec fit_derivatives(const std::vector<double>& angles, const CVec& values);

struct FrequencySystem {
  Vec zeta;
  Mat rows;
  CVec rhs;
  std::vector<std::string> tags;
  Frame frame;
};

FrequencySystem assemble_system(const Vec& zeta, const Frame& frame, const std::vector<Family>& families,
                                const DataProvider* data = nullptr, const FitSpec& fit = {});
/// Frame and families chosen from zeta.
FrequencySystem assemble_system(const Vec& zeta, const DataProvider* data = nullptr, const FitSpec& fit = {});

struct FrequencySolution {
  SpectralTensor spectrum;
  double sigma_min = 0.0;
  double cond = 0.0;
  Index rank = 0;
};

/// Rows normalized to unit length, then solved by SVD. Throws
/// NumericalFailure when the numerical rank is below m.
FrequencySolution solve_frequency(const FrequencySystem& sys, double rank_tol = 1e-10);

/// Cone point of the n = 3 parametrization
/// (-sin phi, sin alpha cos beta, cos alpha, sin alpha sin beta).
Vec cone_zeta(double alpha, double beta, double phi);

struct DeterminantMap {
  double half_width = 0.1;
  int resolution = 21;
  std::vector<double> values;  // |det|, row-major over (alpha, beta, phi)
  double min_abs = 0.0;
  double at_origin = 0.0;
  Index argmin = 0;

  double axis_value(int j) const;
};

/// Determinant of the square n = 3 system as assembled (unnormalized rows).
double system_determinant(const Vec& zeta);

DeterminantMap determinant_map(double half_width = 0.1, int resolution = 21, int workers = 1);

struct ConeSpec {
  double half_width = 0.1;
  int resolution = 3;          // per angle for the n = 3 tensor grid
  int random_samples = 0;      // > 0, or n >= 4: seeded random cone points
  std::vector<double> scales = {1.0};
  std::uint64_t seed = 1;
};

/// Unit-scale cone directions around zeta_0 = e_2 (spatial).
std::vector<Vec> cone_directions(int n, const ConeSpec& spec);

struct ConeResult {
  Vec zeta;
  CVec coeffs;
  double sigma_min = 0.0;
  double cond = 0.0;
  bool ok = false;
  std::string error;
};

std::vector<ConeResult> cone_sweep(int n, const DataProvider& data, const ConeSpec& spec, const FitSpec& fit = {},
                                   int workers = 1);

}  // namespace minkray

#endif  // MINKRAY_FREQ_SOLVER_HPP
