#ifndef MINKRAY_FOURIER_HPP
#define MINKRAY_FOURIER_HPP

#include <vector>

#include "minkray/fields.hpp"
#include "minkray/lightray.hpp"

namespace minkray {

/// Fourier coefficients of a symmetric tensor at one frequency, upper-lex.
struct SpectralTensor {
  Vec zeta;
  CVec coeffs;
};

/// Spectrum of a tensor field on the dual lattice of its grid. Frequencies
/// along axis a are 2 pi k / (N_a h_a) with k centred: k = j - N_a/2
/// (integer division) for storage index j.
class SpectralField {
 public:
  SpectralField(const Grid& grid, std::vector<CArray> components);

  const Grid& grid() const { return grid_; }
  Index count() const { return Index(components_.size()); }
  const CArray& component(Index c) const { return components_[c]; }
  CArray& component(Index c) { return components_[c]; }

  static Index frequency_number(Index j, Index N) { return j - N / 2; }
  double frequency(int axis, Index j) const;
  Vec zeta(Index flat) const;
  SpectralTensor at(Index flat) const;
  /// Flat index of the node holding frequency numbers k, or -1 if out of range.
  Index find(const std::vector<Index>& k) const;

 private:
  Grid grid_;
  std::vector<CArray> components_;
};

/// Riemann-sum approximation of int F(z) e^{-i z.zeta} dz on the dual lattice.
SpectralField dft_field(const SymTensorField& F);

/// Inverse of dft_field (real part of the reconstruction).
SymTensorField inverse_dft(const SpectralField& S);

/// Same quadrature at an arbitrary frequency, by separable direct sums.
SpectralTensor dft_at(const SymTensorField& F, const Vec& zeta);

/// Sum_{i<=j} mu_ij tilde_i tilde_j S_ij.
Complex contract_light(const Direction& d, const CVec& coeffs);
inline Complex contract_light(const Direction& d, const SpectralTensor& S) { return contract_light(d, S.coeffs); }

/// Light contraction weights mu_ij tilde_i tilde_j as an m-vector.
Vec light_weights(const Vec& tilde);

/// Rows 0..n: sum_j zeta_j F_ij (divergence); row n+1: sum_i F_ii (trace).
Mat constraint_matrix(int n, const Vec& zeta);

/// Orthogonal projector onto the null space of constraint_matrix(n, zeta).
Mat constraint_projector(int n, const Vec& zeta);

/// Tolerance for zeta to count as lying in (1, theta)^perp.
inline constexpr double kHyperplaneTol = 1e-10;

/// Projects zeta onto (1, theta)^perp; throws if it is farther than
/// kHyperplaneTol * max(1, |zeta|).
Vec project_to_hyperplane(const Direction& d, const Vec& zeta);

/// sqrt(2) * sum over the slab lattice of LF(l) e^{-i l.zeta} spacing^n.
Complex slice_via_data(const Slab& slab, const Vec& zeta);

/// |contract_light(dft_at(F, zeta)) - slice_via_data(slab, zeta)| / max(|lhs|, floor)
/// with floor = 1e-12 * max|F| * box volume.
double slice_residual(const SymTensorField& F, const Slab& slab, const Vec& zeta);
double slice_residual(const SymTensorField& F, const Direction& d, const Vec& zeta);

}  // namespace minkray

#endif  // MINKRAY_FOURIER_HPP
