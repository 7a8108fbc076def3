#include "minkray/lightray.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "minkray/parallel.hpp"

namespace minkray {

namespace {

// Axis-aligned box [lo, hi] in coordinates.
struct Box {
  Vec lo, hi;
};

Box grid_box(const Grid& g) {
  Box b{Vec(g.dims()), Vec(g.dims())};
  for (int a = 0; a < g.dims(); ++a) {
    b.lo[a] = g.origin(a);
    b.hi[a] = g.upper(a);
  }
  return b;
}

// Bounding box of the nonzero samples grown by `grow` cells, clamped to the
// grid. Returns false for an all-zero field.
bool support_box(const Grid& g, const Array& f, Box& out, Index grow) {
  const int d = g.dims();
  std::vector<Index> lo(g.shape()), hi(d, -1);
  bool any = false;
  for (Index k = 0; k < g.size(); ++k) {
    if (f[k] == 0.0) continue;
    any = true;
    for (int a = 0; a < d; ++a) {
      const Index i = g.coordinate_index(k, a);
      lo[a] = std::min(lo[a], i);
      hi[a] = std::max(hi[a], i);
    }
  }
  if (!any) return false;
  out = Box{Vec(d), Vec(d)};
  for (int a = 0; a < d; ++a) {
    out.lo[a] = g.origin(a) + g.spacing(a) * double(std::max<Index>(lo[a] - grow, 0));
    out.hi[a] = g.origin(a) + g.spacing(a) * double(std::min<Index>(hi[a] + grow, g.points(a) - 1));
  }
  return true;
}

// Multilinear interpolation of a grid function at z (inside the box).
double interpolate(const Grid& g, const Array& f, const double* z) {
  const int d = g.dims();
  Index base = 0;
  double t[16];
  Index step[16];
  for (int a = 0; a < d; ++a) {
    const double u = (z[a] - g.origin(a)) / g.spacing(a);
    Index i = Index(std::floor(u));
    i = std::clamp<Index>(i, 0, g.points(a) - 2);
    t[a] = std::clamp(u - double(i), 0.0, 1.0);
    base += i * g.stride(a);
    step[a] = g.stride(a);
  }
  double acc = 0.0;
  const int corners = 1 << d;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    Index off = base;
    for (int a = 0; a < d; ++a) {
      if (c & (1 << a)) {
        w *= t[a];
        off += step[a];
      } else {
        w *= 1.0 - t[a];
      }
    }
    if (w != 0.0) acc += w * f[off];
  }
  return acc;
}

// Cubic B-spline kernel.
double bspline3(double x) {
  x = std::abs(x);
  if (x < 1.0) return 2.0 / 3.0 - x * x + 0.5 * x * x * x;
  if (x < 2.0) {
    const double y = 2.0 - x;
    return y * y * y / 6.0;
  }
  return 0.0;
}

struct SplineStencil {
  Index offset[16][4];
  double weight[16][4];
  int dims;
};

double spline_accumulate(const SplineStencil& st, const Array& c, int axis, Index base) {
  double acc = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double w = st.weight[axis][q];
    if (w == 0.0) continue;
    acc += w * (axis + 1 == st.dims ? c[base + st.offset[axis][q]]
                                    : spline_accumulate(st, c, axis + 1, base + st.offset[axis][q]));
  }
  return acc;
}

// Spline with coefficients c at z; coefficients outside the grid are zero.
double interpolate_spline(const Grid& g, const Array& c, const double* z) {
  SplineStencil st{};
  st.dims = g.dims();
  for (int a = 0; a < st.dims; ++a) {
    const double u = (z[a] - g.origin(a)) / g.spacing(a);
    const Index i0 = Index(std::floor(u)) - 1;
    for (int q = 0; q < 4; ++q) {
      const Index i = i0 + q;
      const bool inside = i >= 0 && i < g.points(a);
      st.weight[a][q] = inside ? bspline3(u - double(i)) : 0.0;
      st.offset[a][q] = inside ? i * g.stride(a) : 0;
    }
  }
  return spline_accumulate(st, c, 0, 0);
}

double ray_sum(const Grid& g, const Array& f, const Box& box, const Vec& p, const Vec& dir, double step,
               double extent, Interpolation interp) {
  const int d = g.dims();
  double s0 = -extent, s1 = extent;
  for (int a = 0; a < d; ++a) {
    if (dir[a] == 0.0) {
      if (p[a] < box.lo[a] || p[a] > box.hi[a]) return 0.0;
      continue;
    }
    double u = (box.lo[a] - p[a]) / dir[a], v = (box.hi[a] - p[a]) / dir[a];
    if (u > v) std::swap(u, v);
    s0 = std::max(s0, u);
    s1 = std::min(s1, v);
  }
  if (s0 > s1) return 0.0;
  const Index k0 = Index(std::ceil((s0 + extent) / step));
  const Index k1 = Index(std::floor((s1 + extent) / step));
  double z[16];
  double acc = 0.0;
  for (Index k = k0; k <= k1; ++k) {
    const double s = -extent + double(k) * step;
    for (int a = 0; a < d; ++a) z[a] = std::clamp(p[a] + s * dir[a], box.lo[a], box.hi[a]);
    acc += interp == Interpolation::Multilinear ? interpolate(g, f, z) : interpolate_spline(g, f, z);
  }
  return acc * step;
}

void require_support(const SymTensorField& F) {
  if (!F.compact_support()) {
    throw InvalidArgument("light ray transform: field must carry the compact support flag");
  }
}

}  // namespace

Direction::Direction(Vec theta) : theta_(std::move(theta)) {
  if (theta_.size() < 3) throw InvalidArgument("Direction: need n >= 3 components");
  if (std::abs(theta_.norm() - 1.0) > kUnitTol) {
    throw InvalidArgument("Direction: theta must be a unit vector (|theta| = " + std::to_string(theta_.norm()) + ")");
  }
}

Vec Direction::tilde() const {
  Vec t(n() + 1);
  t[0] = 1.0;
  t.tail(n()) = theta_;
  return t;
}

Mat perp_basis(const Direction& d) {
  const int n = d.n();
  const Vec& th = d.theta();
  Mat B = Mat::Zero(n + 1, n);
  B(0, 0) = 1.0 / std::sqrt(2.0);
  B.col(0).tail(n) = -th / std::sqrt(2.0);
  // H theta = s e_1 with s = -sign(theta_1); H e_j, j >= 2, completes theta.
  const double s = th[0] >= 0.0 ? -1.0 : 1.0;
  Vec u = th;
  u[0] -= s;
  const double uu = u.squaredNorm();
  for (int j = 1; j < n; ++j) {
    Vec e = Vec::Unit(n, j);
    B.col(j).tail(n) = e - (2.0 * u[j] / uu) * u;
  }
  return B;
}

Array contract_field(const SymTensorField& F, const Direction& d) {
  const int n = F.n();
  if (d.n() != n) throw InvalidArgument("contract_field: direction dimension mismatch");
  const Vec t = d.tilde();
  Array out = Array::Zero(F.grid().size());
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) {
      const double w = pair_multiplicity(i, j) * t[i] * t[j];
      if (w != 0.0) out += w * F(i, j);
    }
  }
  return out;
}

RayGeometry RayGeometry::for_grid(const Grid& grid, const Direction& d, Interpolation interp) {
  if (d.n() != grid.n()) throw InvalidArgument("RayGeometry: direction dimension mismatch");
  return RayGeometry{d, perp_basis(d), 0.5 * grid.min_spacing(), 1.1 * grid.circumradius(), interp};
}

Array bspline_coefficients(const Grid& grid, Array f) {
  if (f.size() != grid.size()) throw InvalidArgument("bspline_coefficients: size mismatch");
  // (c_{k-1} + 4 c_k + c_{k+1}) / 6 = f_k along each axis, c = 0 off the grid
  for (int a = 0; a < grid.dims(); ++a) {
    const Index M = grid.points(a), st = grid.stride(a);
    std::vector<double> cp(static_cast<std::size_t>(M)), dp(static_cast<std::size_t>(M));
    for (Index base = 0; base < grid.size(); ++base) {
      if (grid.coordinate_index(base, a) != 0) continue;
      constexpr double diag = 4.0 / 6.0, off = 1.0 / 6.0;
      cp[0] = off / diag;
      dp[0] = f[base] / diag;
      for (Index k = 1; k < M; ++k) {
        const double m = diag - off * cp[k - 1];
        cp[k] = off / m;
        dp[k] = (f[base + k * st] - off * dp[k - 1]) / m;
      }
      f[base + (M - 1) * st] = dp[M - 1];
      for (Index k = M - 2; k >= 0; --k) f[base + k * st] = dp[k] - cp[k] * f[base + (k + 1) * st];
    }
  }
  return f;
}

double light_ray_integral(const Grid& grid, const Array& contracted, const Vec& p, const RayGeometry& geo) {
  if (p.size() != grid.dims()) throw InvalidArgument("light_ray_integral: point needs n+1 entries");
  const double extent = geo.s_extent + (p - grid.center()).norm();
  return ray_sum(grid, contracted, grid_box(grid), p, geo.direction.tilde(), geo.s_step, extent, geo.interpolation);
}

double light_ray_integral(const SymTensorField& F, const Vec& p, const Direction& d, Interpolation interp) {
  require_support(F);
  const RayGeometry geo = RayGeometry::for_grid(F.grid(), d, interp);
  Array samples = contract_field(F, d);
  if (interp == Interpolation::CubicBSpline) samples = bspline_coefficients(F.grid(), std::move(samples));
  return light_ray_integral(F.grid(), samples, p, geo);
}

Vec Slab::coords(Index flat) const {
  const int n = int(counts.size());
  Vec c(n);
  for (int k = n - 1; k >= 0; --k) {
    const Index j = flat % counts[k];
    flat /= counts[k];
    c[k] = (double(j) - 0.5 * double(counts[k] - 1)) * spacing;
  }
  return c;
}

Vec Slab::point(Index flat) const { return anchor + basis * coords(flat); }

Slab transform_slab(const SymTensorField& F, const Direction& d, const LatticeSpec& spec, int workers,
                    Interpolation interp) {
  require_support(F);
  const Grid& g = F.grid();
  const int n = g.n();
  const RayGeometry geo = RayGeometry::for_grid(g, d, interp);
  Array G = contract_field(F, d);
  const Vec tilde = d.tilde();

  // The spline reaches two cells beyond the last nonzero sample.
  Box box;
  const bool nonzero = support_box(g, G, box, interp == Interpolation::Multilinear ? 1 : 2);
  if (nonzero && interp == Interpolation::CubicBSpline) G = bspline_coefficients(g, std::move(G));
  if (!nonzero) box = grid_box(g);

  Slab slab{d, geo.basis, Vec(), spec.spacing > 0.0 ? spec.spacing : g.min_spacing(), {}, Array(), true, 0.0};
  const Vec mid = 0.5 * (box.lo + box.hi);
  slab.anchor = mid - (mid.dot(tilde) / tilde.squaredNorm()) * tilde;

  // Largest perp coordinate over the corners of the support box.
  Vec half = Vec::Zero(n);
  const int d1 = n + 1;
  for (int c = 0; c < (1 << d1); ++c) {
    Vec z(d1);
    for (int a = 0; a < d1; ++a) z[a] = (c & (1 << a)) ? box.hi[a] : box.lo[a];
    const Vec coords = geo.basis.transpose() * (z - slab.anchor);
    half = half.cwiseMax(coords.cwiseAbs());
  }
  slab.required_half_extent = half.maxCoeff();

  if (spec.counts.empty()) {
    for (int k = 0; k < n; ++k) slab.counts.push_back(2 * (Index(std::ceil(half[k] / slab.spacing)) + 1) + 1);
  } else {
    if (int(spec.counts.size()) != n) throw InvalidArgument("transform_slab: lattice counts need n entries");
    for (Index c : spec.counts) {
      if (c < 1 || c % 2 == 0) throw InvalidArgument("transform_slab: lattice counts must be odd and positive");
    }
    slab.counts = spec.counts;
  }
  Index total = 1;
  for (int k = 0; k < n; ++k) {
    total *= slab.counts[k];
    if (0.5 * double(slab.counts[k] - 1) * slab.spacing < half[k]) slab.covers_support = false;
  }
  slab.values = Array::Zero(total);
  if (!nonzero) return slab;

  // The ray through anchor + B c reaches the support box only if its
  // coordinates lie within the projected half extents.
  const double extent = geo.s_extent + (slab.anchor - g.center()).norm();
  parallel_for(total, workers, [&](Index i) {
    const Vec c = slab.coords(i);
    for (int k = 0; k < n; ++k) {
      if (std::abs(c[k]) > half[k] + 1e-12) return;
    }
    slab.values[i] = ray_sum(g, G, box, slab.anchor + geo.basis * c, tilde, geo.s_step, extent, interp);
  });
  return slab;
}

void validate_family(int n, const Family& f) {
  const bool ok = f.k >= 3 && f.k <= n && (!f.is_pair() || (f.l > f.k && f.l <= n));
  if (!ok) {
    throw InvalidArgument("direction family: need 3 <= k (< l) <= n, got k=" + std::to_string(f.k) +
                          " l=" + std::to_string(f.l) + " for n=" + std::to_string(n));
  }
}

Direction direction_family(const Family& f, double phi, double a, const Mat& A) {
  const int n = int(A.rows());
  if (A.cols() != n) throw InvalidArgument("direction_family: rotation must be square");
  validate_family(n, f);
  Vec th = Vec::Zero(n);
  th[0] = std::cos(a) * std::cos(phi);
  th[1] = std::sin(phi);
  const double side = std::sin(a) * std::cos(phi);
  if (f.is_pair()) {
    th[f.k - 1] += side / std::sqrt(2.0);
    th[f.l - 1] += side / std::sqrt(2.0);
  } else {
    th[f.k - 1] += side;
  }
  Vec out = A.transpose() * th;
  out /= out.norm();
  return Direction(out);
}

Mat rotation_to_e2(const Vec& zp) {
  const int n = int(zp.size());
  if (n < 2) throw InvalidArgument("rotation_to_e2: need at least 2 components");
  if (std::abs(zp.norm() - 1.0) > Direction::kUnitTol) {
    throw InvalidArgument("rotation_to_e2: input must be a unit vector");
  }
  const Mat I = Mat::Identity(n, n);
  if (zp[1] >= 0.0) {
    // H maps zp to -e2, then the reflection through e2^perp sends it to e2.
    // Both reflections collapse to the identity at zp = e2.
    Vec u = zp;
    u[1] += 1.0;
    const Mat H = I - (2.0 / u.squaredNorm()) * u * u.transpose();
    Mat R = I;
    R(1, 1) = -1.0;
    return R * H;
  }
  Vec u = zp;
  u[1] -= 1.0;
  return I - (2.0 / u.squaredNorm()) * u * u.transpose();
}

}  // namespace minkray
