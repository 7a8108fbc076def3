#ifndef MINKRAY_PHANTOMS_HPP
#define MINKRAY_PHANTOMS_HPP

#include <cstdint>
#include <vector>

#include "minkray/fields.hpp"

namespace minkray {

/// amplitude * exp(-|z - center|^2 / width^2)
struct GaussianBump {
  double amplitude = 1.0;
  Vec center;
  double width = 1.0;

  double operator()(const Vec& z) const;
};

/// F_ij = w_ij exp(-|z - c|^2 / width^2). Samples where the envelope drops
/// below 1e-14 are set to zero; throws if that does not cover the grid faces.
SymTensorField phantom_gaussian(const Grid& grid, const Vec& center, double width, const Vec& weights);

/// Gauge (natural kernel) generator specification.
///
/// lambda = W(z) * sum(lambda_bumps), v_i = W(z) * v_bumps[i](z), where
/// W = prod_a sin^2(pi (z_a - lo_a) / (hi_a - lo_a)) vanishes to second order
/// on every face.
struct GaugeSpec {
  std::vector<GaussianBump> lambda_bumps;
  std::vector<GaussianBump> v_bumps;  // one per component, n+1 entries
  /// Build dv from closed-form derivatives instead of difference stencils.
  bool analytic_derivative = false;
};

struct GaugePhantom {
  SymTensorField F;
  ScalarField lambda;
  VectorField v;
};

GaugePhantom phantom_gauge(const Grid& grid, const GaugeSpec& spec);

/// Random gauge spec with bumps centred near the middle of the box.
GaugeSpec random_gauge_spec(const Grid& grid, std::uint64_t seed, double lambda_scale = 1.0,
                            double v_scale = 1.0);

/// Exactly divergence-free and trace-free phantom.
///
/// F_ij = sum_s W^s_{ikjl} d_k d_l phi_s, where each W^s is a random constant
/// tensor with the algebraic symmetries of a Weyl tensor (antisymmetric in
/// (i,k) and in (j,l), pair-symmetric, all Euclidean traces zero) and
/// phi_s = (1 - |z - c_s|^2 / R_s^2)_+^k is a compactly supported bump.
/// Antisymmetry kills the divergence and tracelessness kills the trace, so
/// the constraints hold pointwise and the support is the union of the balls.
struct SolenoidalSpec {
  int terms = 3;
  int smoothness = 8;            // bump exponent k; the field is C^{k-3}
  double radius_fraction = 0.8;  // R_s as a fraction of the box half-width
  double center_spread = 0.05;   // centres within this fraction of the half-width
  std::uint64_t seed = 1;
};

struct SolenoidalPhantom {
  SymTensorField F;
  /// max |trace F| / max |F|.
  double trace_residual = 0.0;
  /// max |delta F| evaluated from closed-form third derivatives, relative to
  /// max |F| / R.
  double divergence_residual = 0.0;
  /// Same quantity with difference stencils (O(h^2)).
  double discrete_divergence_residual = 0.0;
  std::vector<std::vector<double>> weyl;  // per term, D^4 entries (i,k,j,l) row-major
  std::vector<Vec> centers;
  std::vector<double> radii;
};

SolenoidalPhantom phantom_solenoidal(const Grid& grid, const SolenoidalSpec& spec);

/// Random tensor with Weyl symmetries in D dimensions, entries indexed
/// ((i*D + k)*D + j)*D + l.
std::vector<double> random_weyl_tensor(int dims, std::uint64_t seed);

}  // namespace minkray

#endif  // MINKRAY_PHANTOMS_HPP
