#include "minkray/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace minkray {

Grid::Grid(int n, std::vector<Index> shape, std::vector<double> spacing, std::vector<double> origin)
    : n_(n), shape_(std::move(shape)), spacing_(std::move(spacing)), origin_(std::move(origin)) {
  if (n_ < 3) {
    throw InvalidArgument("grid: spatial dimension n must be >= 3, got " + std::to_string(n_));
  }
  const auto d = std::size_t(n_ + 1);
  if (shape_.size() != d || spacing_.size() != d || origin_.size() != d) {
    throw InvalidArgument("grid: shape, spacing and origin need n+1 entries");
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (shape_[a] < kMinPoints) {
      throw InvalidArgument("grid: axis " + std::to_string(a) + " has fewer than 8 points");
    }
    if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) {
      throw InvalidArgument("grid: axis " + std::to_string(a) + " spacing must be positive");
    }
  }
  stride_.assign(d, 1);
  for (int a = int(d) - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * shape_[a + 1];
  size_ = stride_[0] * shape_[0];
}

Grid Grid::cube(int n, Index points, double half_width) {
  const auto d = std::size_t(n + 1);
  const double h = 2.0 * half_width / double(points - 1);
  return Grid(n, std::vector<Index>(d, points), std::vector<double>(d, h),
              std::vector<double>(d, -half_width));
}

double Grid::cell_volume() const {
  double v = 1.0;
  for (double h : spacing_) v *= h;
  return v;
}

double Grid::min_spacing() const { return *std::min_element(spacing_.begin(), spacing_.end()); }

Index Grid::flat(const std::vector<Index>& multi) const {
  Index k = 0;
  for (int a = 0; a <= n_; ++a) k += multi[a] * stride_[a];
  return k;
}

std::vector<Index> Grid::multi(Index flat) const {
  std::vector<Index> m(n_ + 1);
  for (int a = 0; a <= n_; ++a) m[a] = coordinate_index(flat, a);
  return m;
}

Vec Grid::point(Index flat) const {
  Vec z(n_ + 1);
  for (int a = 0; a <= n_; ++a) z[a] = origin_[a] + spacing_[a] * double(coordinate_index(flat, a));
  return z;
}

bool Grid::on_boundary(Index flat) const { return !is_interior(flat, 1); }

bool Grid::is_interior(Index flat, Index depth) const {
  for (int a = 0; a <= n_; ++a) {
    const Index k = coordinate_index(flat, a);
    if (k < depth || k > shape_[a] - 1 - depth) return false;
  }
  return true;
}

Vec Grid::center() const {
  Vec c(n_ + 1);
  for (int a = 0; a <= n_; ++a) c[a] = 0.5 * (origin_[a] + upper(a));
  return c;
}

double Grid::circumradius() const {
  double r2 = 0.0;
  for (int a = 0; a <= n_; ++a) {
    const double half = 0.5 * (upper(a) - origin_[a]);
    r2 += half * half;
  }
  return std::sqrt(r2);
}

bool Grid::operator==(const Grid& other) const {
  return n_ == other.n_ && shape_ == other.shape_ && spacing_ == other.spacing_ &&
         origin_ == other.origin_;
}

}  // namespace minkray
