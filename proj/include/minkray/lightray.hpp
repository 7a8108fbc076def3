#ifndef MINKRAY_LIGHTRAY_HPP
#define MINKRAY_LIGHTRAY_HPP

#include <vector>

#include "minkray/fields.hpp"

namespace minkray {

/// Unit spatial direction theta in R^n; the light direction is (1, theta).
class Direction {
 public:
  static constexpr double kUnitTol = 1e-12;

  explicit Direction(Vec theta);

  int n() const { return int(theta_.size()); }
  const Vec& theta() const { return theta_; }
  /// (1, theta) in R^{1+n}.
  Vec tilde() const;

 private:
  Vec theta_;
};

/// Columns are n orthonormal vectors spanning (1, theta)^perp. The first is
/// (1, -theta)/sqrt(2); the others are (0, w) with w a Householder
/// completion of theta.
Mat perp_basis(const Direction& d);

/// Sum_{i<=j} mu_ij tilde_i tilde_j F_ij as a scalar field.
Array contract_field(const SymTensorField& F, const Direction& d);

/// Off-grid reconstruction used by the ray quadrature. Multilinear is second
/// order; the interpolating cubic B-spline is fourth order and C^2, which
/// keeps the slab data smooth in the direction.
enum class Interpolation { Multilinear, CubicBSpline };

struct RayGeometry {
  Direction direction;
  Mat basis;
  double s_step;
  double s_extent;
  Interpolation interpolation = Interpolation::Multilinear;

  static RayGeometry for_grid(const Grid& grid, const Direction& d,
                              Interpolation interp = Interpolation::Multilinear);
};

/// Coefficients of the cubic B-spline interpolating f at the nodes, with zero
/// coefficients outside the grid.
Array bspline_coefficients(const Grid& grid, Array f);

/// Integral of the contracted field along s -> p + s (1, theta). Samples are
/// spaced s_step apart and read by multilinear interpolation; the ray is
/// clipped to the box, outside of which the field is zero.
double light_ray_integral(const SymTensorField& F, const Vec& p, const Direction& d,
                          Interpolation interp = Interpolation::Multilinear);

/// Same, given the contracted field and a prepared geometry. For the spline,
/// `contracted` holds bspline_coefficients of the contracted field.
double light_ray_integral(const Grid& grid, const Array& contracted, const Vec& p, const RayGeometry& geo);

/// Lattice over (1, theta)^perp in perp_basis coordinates. Defaults (zeros)
/// choose spacing = min h and the smallest odd counts covering the projected
/// support.
struct LatticeSpec {
  double spacing = 0.0;
  std::vector<Index> counts;
};

struct Slab {
  Direction direction;
  Mat basis;            // (n+1) x n, columns b_k
  Vec anchor;           // lattice centre, a point of (1, theta)^perp
  double spacing = 0.0;
  std::vector<Index> counts;
  Array values;         // row-major over counts, last coordinate fastest
  bool covers_support = true;
  double required_half_extent = 0.0;  // largest |c_k| of the projected support

  Index size() const { return values.size(); }
  /// Coordinates c_k of lattice node `flat`.
  Vec coords(Index flat) const;
  /// anchor + basis * coords(flat).
  Vec point(Index flat) const;
};

Slab transform_slab(const SymTensorField& F, const Direction& d, const LatticeSpec& spec = {}, int workers = 1,
                    Interpolation interp = Interpolation::Multilinear);

/// Direction family: single (k) or pair (k, l), spatial indices numbered 1..n.
struct Family {
  int k = 3;
  int l = 0;  // 0 for a single family
  bool is_pair() const { return l != 0; }
};

void validate_family(int n, const Family& f);

/// A^T (cos a cos phi e_1 + sin phi e_2 + sin a cos phi e_k), with
/// (e_k + e_l)/sqrt(2) in place of e_k for pairs.
Direction direction_family(const Family& f, double phi, double a, const Mat& A);

/// Orthogonal A with A zeta' = e_2 built from Householder reflections.
/// Returns the identity for zeta' = e_2 and varies continuously nearby.
Mat rotation_to_e2(const Vec& zeta_prime);

}  // namespace minkray

#endif  // MINKRAY_LIGHTRAY_HPP
