#include "minkray/fields.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace minkray {

Index component_index(int n, int i, int j) {
  if (i < 0 || j < 0 || i > n || j > n) {
    throw InvalidArgument("component_index: (" + std::to_string(i) + "," + std::to_string(j) +
                          ") out of range for n=" + std::to_string(n));
  }
  if (i > j) std::swap(i, j);
  const Index d = n + 1;
  return Index(i) * d - Index(i) * (i - 1) / 2 + (j - i);
}

std::pair<int, int> component_pair(int n, Index k) {
  const Index m = sym_components(n);
  if (k < 0 || k >= m) throw InvalidArgument("component_pair: index out of range");
  int i = 0;
  Index row_start = 0;
  while (k >= row_start + (n + 1 - i)) {
    row_start += n + 1 - i;
    ++i;
  }
  return {i, int(i + (k - row_start))};
}

ScalarField::ScalarField(const Grid& grid) : grid_(grid), values_(Array::Zero(grid.size())) {}

ScalarField::ScalarField(const Grid& grid, Array values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw InvalidArgument("ScalarField: value count mismatch");
}

VectorField::VectorField(const Grid& grid)
    : grid_(grid), components_(std::size_t(grid.dims()), Array::Zero(grid.size())) {}

VectorField::VectorField(const Grid& grid, std::vector<Array> components)
    : grid_(grid), components_(std::move(components)) {
  if (int(components_.size()) != grid_.dims()) {
    throw InvalidArgument("VectorField: need n+1 components");
  }
  for (const auto& c : components_) {
    if (c.size() != grid_.size()) throw InvalidArgument("VectorField: value count mismatch");
  }
}

void VectorField::zero_boundary() {
  for (Index k = 0; k < grid_.size(); ++k) {
    if (grid_.on_boundary(k)) {
      for (auto& c : components_) c[k] = 0.0;
    }
  }
}

bool VectorField::vanishes_on_boundary(double tol) const {
  for (Index k = 0; k < grid_.size(); ++k) {
    if (!grid_.on_boundary(k)) continue;
    for (const auto& c : components_) {
      if (std::abs(c[k]) > tol) return false;
    }
  }
  return true;
}

SymTensorField::SymTensorField(const Grid& grid)
    : grid_(grid), components_(std::size_t(sym_components(grid.n())), Array::Zero(grid.size())) {}

SymTensorField::SymTensorField(const Grid& grid, std::vector<Array> components)
    : grid_(grid), components_(std::move(components)) {
  if (Index(components_.size()) != sym_components(grid_.n())) {
    throw InvalidArgument("SymTensorField: need (n+1)(n+2)/2 components");
  }
  for (const auto& c : components_) {
    if (c.size() != grid_.size()) throw InvalidArgument("SymTensorField: value count mismatch");
  }
}

Vec SymTensorField::at(Index node) const {
  Vec s(count());
  for (Index k = 0; k < count(); ++k) s[k] = components_[k][node];
  return s;
}

double SymTensorField::boundary_max_abs() const {
  double m = 0.0;
  for (Index k = 0; k < grid_.size(); ++k) {
    if (!grid_.on_boundary(k)) continue;
    for (const auto& c : components_) m = std::max(m, std::abs(c[k]));
  }
  return m;
}

double SymTensorField::max_abs() const {
  double m = 0.0;
  for (const auto& c : components_) m = std::max(m, c.abs().maxCoeff());
  return m;
}

SymTensorField& SymTensorField::operator+=(const SymTensorField& other) {
  if (grid_ != other.grid_) throw InvalidArgument("SymTensorField: grid mismatch");
  for (std::size_t k = 0; k < components_.size(); ++k) components_[k] += other.components_[k];
  compact_support_ = compact_support_ && other.compact_support_;
  return *this;
}

SymTensorField& SymTensorField::operator-=(const SymTensorField& other) {
  if (grid_ != other.grid_) throw InvalidArgument("SymTensorField: grid mismatch");
  for (std::size_t k = 0; k < components_.size(); ++k) components_[k] -= other.components_[k];
  compact_support_ = compact_support_ && other.compact_support_;
  return *this;
}

SymTensorField& SymTensorField::operator*=(double s) {
  for (auto& c : components_) c *= s;
  return *this;
}

SymTensorField operator+(SymTensorField a, const SymTensorField& b) { return a += b; }
SymTensorField operator-(SymTensorField a, const SymTensorField& b) { return a -= b; }
SymTensorField operator*(double s, SymTensorField a) { return a *= s; }

Vec MinkowskiMetric::diagonal() const {
  Vec d = Vec::Ones(n + 1);
  d[0] = -1.0;
  return d;
}

Vec MinkowskiMetric::coefficients() const {
  Vec g = Vec::Zero(sym_components(n));
  for (int i = 0; i <= n; ++i) g[component_index(n, i, i)] = (*this)(i, i);
  return g;
}

}  // namespace minkray
