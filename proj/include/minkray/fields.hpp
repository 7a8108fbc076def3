#ifndef MINKRAY_FIELDS_HPP
#define MINKRAY_FIELDS_HPP

#include <vector>

#include "minkray/grid.hpp"
#include "minkray/types.hpp"

namespace minkray {

/// Position of (i, j) in the upper-triangular lexicographic order
/// (0,0),(0,1),...,(0,n),(1,1),...,(n,n). Symmetric in i and j.
Index component_index(int n, int i, int j);

/// Inverse of component_index for the stored (i <= j) pair.
std::pair<int, int> component_pair(int n, Index k);

/// Weight of F_ij in a full double sum over (i, j) when only i <= j is stored.
inline double pair_multiplicity(int i, int j) { return i == j ? 1.0 : 2.0; }

class ScalarField {
 public:
  explicit ScalarField(const Grid& grid);
  ScalarField(const Grid& grid, Array values);

  const Grid& grid() const { return grid_; }
  const Array& values() const { return values_; }
  Array& values() { return values_; }
  double operator[](Index k) const { return values_[k]; }
  double& operator[](Index k) { return values_[k]; }

 private:
  Grid grid_;
  Array values_;
};

/// n+1 component vector field; component 0 is the time component.
class VectorField {
 public:
  explicit VectorField(const Grid& grid);
  VectorField(const Grid& grid, std::vector<Array> components);

  const Grid& grid() const { return grid_; }
  int count() const { return int(components_.size()); }
  const Array& operator[](int i) const { return components_[i]; }
  Array& operator[](int i) { return components_[i]; }

  /// Forces every component to zero on the grid faces.
  void zero_boundary();
  bool vanishes_on_boundary(double tol = 0.0) const;

 private:
  Grid grid_;
  std::vector<Array> components_;
};

/// Symmetric 2-tensor field; only the i <= j components are stored.
class SymTensorField {
 public:
  explicit SymTensorField(const Grid& grid);
  SymTensorField(const Grid& grid, std::vector<Array> components);

  const Grid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  Index count() const { return Index(components_.size()); }

  const Array& operator()(int i, int j) const { return components_[component_index(n(), i, j)]; }
  Array& operator()(int i, int j) { return components_[component_index(n(), i, j)]; }
  const Array& component(Index k) const { return components_[k]; }
  Array& component(Index k) { return components_[k]; }

  /// Upper-lex coefficient vector at one grid node.
  Vec at(Index node) const;

  /// Support flag: the field is declared to vanish outside the box, so
  /// samples beyond the grid are read as zero. Arithmetic keeps the flag only
  /// when every operand carries it.
  bool compact_support() const { return compact_support_; }
  void declare_compact_support(bool flag = true) { compact_support_ = flag; }

  /// Largest absolute sample on the grid faces.
  double boundary_max_abs() const;

  /// Largest absolute sample over all components.
  double max_abs() const;

  SymTensorField& operator+=(const SymTensorField& other);
  SymTensorField& operator-=(const SymTensorField& other);
  SymTensorField& operator*=(double s);

 private:
  Grid grid_;
  std::vector<Array> components_;
  bool compact_support_ = false;
};

SymTensorField operator+(SymTensorField a, const SymTensorField& b);
SymTensorField operator-(SymTensorField a, const SymTensorField& b);
SymTensorField operator*(double s, SymTensorField a);

/// Minkowski metric diag(-1, 1, ..., 1) on R^{1+n}.
struct MinkowskiMetric {
  int n;
  double operator()(int i, int j) const { return i != j ? 0.0 : (i == 0 ? -1.0 : 1.0); }
  Vec diagonal() const;
  /// Upper-lex coefficient vector of g.
  Vec coefficients() const;
};

}  // namespace minkray

#endif  // MINKRAY_FIELDS_HPP
