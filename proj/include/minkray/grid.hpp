#ifndef MINKRAY_GRID_HPP
#define MINKRAY_GRID_HPP

#include <vector>

#include "minkray/types.hpp"

namespace minkray {

/// Uniform tensor-product grid over a box in R^{1+n}. Axis 0 is time.
///
/// Samples are stored row-major: the last axis varies fastest. A multi-index
/// k maps to the coordinate origin + k * spacing (componentwise).
class Grid {
 public:
  static constexpr Index kMinPoints = 8;

  Grid(int n, std::vector<Index> shape, std::vector<double> spacing, std::vector<double> origin);

  /// Cube [-half_width, half_width]^{1+n} with `points` samples per axis.
  static Grid cube(int n, Index points, double half_width);

  int n() const { return n_; }
  int dims() const { return n_ + 1; }
  Index points(int axis) const { return shape_[axis]; }
  double spacing(int axis) const { return spacing_[axis]; }
  double origin(int axis) const { return origin_[axis]; }
  const std::vector<Index>& shape() const { return shape_; }
  const std::vector<double>& spacings() const { return spacing_; }
  const std::vector<double>& origins() const { return origin_; }

  Index size() const { return size_; }
  Index stride(int axis) const { return stride_[axis]; }
  double cell_volume() const;
  double min_spacing() const;
  double upper(int axis) const { return origin_[axis] + spacing_[axis] * double(shape_[axis] - 1); }

  Index flat(const std::vector<Index>& multi) const;
  std::vector<Index> multi(Index flat) const;
  Index coordinate_index(Index flat, int axis) const { return (flat / stride_[axis]) % shape_[axis]; }
  Vec point(Index flat) const;
  bool on_boundary(Index flat) const;
  /// True when the node is at least `depth` cells away from every face.
  bool is_interior(Index flat, Index depth = 1) const;

  Vec center() const;
  /// Radius of the ball circumscribing the box, measured from center().
  double circumradius() const;

  /// Calls fn(flat, z) for every node in storage order; z points at the n+1
  /// coordinates of the node.
  template <class Fn>
  void for_each_point(Fn&& fn) const {
    const int d = n_ + 1;
    std::vector<Index> k(d, 0);
    std::vector<double> z(origin_);
    for (Index flat = 0; flat < size_; ++flat) {
      fn(flat, static_cast<const double*>(z.data()));
      for (int a = d - 1; a >= 0; --a) {
        if (++k[a] < shape_[a]) {
          z[a] = origin_[a] + spacing_[a] * double(k[a]);
          break;
        }
        k[a] = 0;
        z[a] = origin_[a];
      }
    }
  }

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int n_;
  std::vector<Index> shape_;
  std::vector<double> spacing_;
  std::vector<double> origin_;
  std::vector<Index> stride_;
  Index size_ = 0;
};

}  // namespace minkray

#endif  // MINKRAY_GRID_HPP
