#include "minkray/operators.hpp"

namespace minkray {

Array derivative(const Grid& grid, const Array& f, int axis) {
  const Index len = grid.points(axis);
  const Index inner = grid.stride(axis);
  const Index outer = grid.size() / (len * inner);
  const double c = 0.5 / grid.spacing(axis);
  Array out(f.size());
  for (Index o = 0; o < outer; ++o) {
    const Index base = o * len * inner;
    const double* src = f.data() + base;
    double* dst = out.data() + base;
    for (Index i = 0; i < inner; ++i) {
      dst[i] = c * (-3.0 * src[i] + 4.0 * src[i + inner] - src[i + 2 * inner]);
    }
    for (Index k = 1; k < len - 1; ++k) {
      const double* lo = src + (k - 1) * inner;
      const double* hi = src + (k + 1) * inner;
      double* d = dst + k * inner;
      for (Index i = 0; i < inner; ++i) d[i] = c * (hi[i] - lo[i]);
    }
    const double* e = src + (len - 1) * inner;
    double* d = dst + (len - 1) * inner;
    for (Index i = 0; i < inner; ++i) {
      d[i] = c * (3.0 * e[i] - 4.0 * e[i - inner] + e[i - 2 * inner]);
    }
  }
  return out;
}

ScalarField trace(const SymTensorField& F) {
  ScalarField t(F.grid());
  for (int i = 0; i <= F.n(); ++i) t.values() += F(i, i);
  return t;
}

VectorField divergence(const SymTensorField& F) {
  const Grid& g = F.grid();
  VectorField out(g);
  for (int i = 0; i <= F.n(); ++i) {
    for (int j = 0; j <= F.n(); ++j) out[i] += derivative(g, F(i, j), j);
  }
  return out;
}

SymTensorField sym_derivative(const VectorField& v) {
  const Grid& g = v.grid();
  const int n = g.n();
  std::vector<std::vector<Array>> dv(n + 1);
  for (int i = 0; i <= n; ++i) {
    for (int a = 0; a <= n; ++a) dv[i].push_back(derivative(g, v[i], a));
  }
  SymTensorField out(g);
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= n; ++j) out(i, j) = 0.5 * (dv[j][i] + dv[i][j]);
  }
  return out;
}

SymTensorField scalar_metric(const ScalarField& lambda) {
  SymTensorField out(lambda.grid());
  out(0, 0) = -lambda.values();
  for (int i = 1; i <= out.n(); ++i) out(i, i) = lambda.values();
  return out;
}

ScalarField vector_divergence(const VectorField& v) {
  ScalarField out(v.grid());
  for (int j = 0; j < v.count(); ++j) out.values() += derivative(v.grid(), v[j], j);
  return out;
}

VectorField gradient(const ScalarField& f) {
  VectorField out(f.grid());
  for (int a = 0; a < out.count(); ++a) out[a] = derivative(f.grid(), f.values(), a);
  return out;
}

}  // namespace minkray
