#ifndef MINKRAY_OPERATORS_HPP
#define MINKRAY_OPERATORS_HPP

#include "minkray/fields.hpp"

namespace minkray {

/// First derivative along `axis`: centered differences in the interior and
/// second-order one-sided differences on the two faces of that axis.
Array derivative(const Grid& grid, const Array& f, int axis);

/// Euclidean trace: sum_{i=0}^{n} F_ii.
ScalarField trace(const SymTensorField& F);

/// Euclidean divergence (delta F)_i = sum_j d_j F_ij, with d_0 the time derivative.
VectorField divergence(const SymTensorField& F);

/// Symmetrized derivative (dv)_ij = (d_i v_j + d_j v_i) / 2.
SymTensorField sym_derivative(const VectorField& v);

/// lambda * g, i.e. F_00 = -lambda, F_ii = lambda for i >= 1.
SymTensorField scalar_metric(const ScalarField& lambda);

/// Divergence of a vector field, sum_j d_j v_j (time component included).
ScalarField vector_divergence(const VectorField& v);

/// Gradient of a scalar field.
VectorField gradient(const ScalarField& f);

}  // namespace minkray

#endif  // MINKRAY_OPERATORS_HPP
