#include "minkray/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "minkray/operators.hpp"

namespace minkray {

namespace {

Array second(const Grid& g, const Array& f, int a) { return derivative(g, derivative(g, f, a), a); }

std::vector<Index> faces_of(const Grid& g) {
  std::vector<Index> out;
  for (Index k = 0; k < g.size(); ++k)
    if (g.on_boundary(k)) out.push_back(k);
  return out;
}

SparseMat derivative_matrix(const Grid& g, int axis) {
  const Index N = g.points(axis), s = g.stride(axis);
  const double c = 0.5 / g.spacing(axis);
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * g.size());
  for (Index k = 0; k < g.size(); ++k) {
    const Index j = g.coordinate_index(k, axis);
    if (j == 0) {
      t.emplace_back(k, k, -3 * c), t.emplace_back(k, k + s, 4 * c), t.emplace_back(k, k + 2 * s, -c);
    } else if (j == N - 1) {
      t.emplace_back(k, k, 3 * c), t.emplace_back(k, k - s, -4 * c), t.emplace_back(k, k - 2 * s, c);
    } else {
      t.emplace_back(k, k + s, c), t.emplace_back(k, k - s, -c);
    }
  }
  SparseMat D(g.size(), g.size());
  D.setFromTriplets(t.begin(), t.end());
  return D;
}

// Scalar operator sum_a w_a D_a D_a with identity face rows.
struct ScalarOperator {
  const Grid& grid;
  const std::vector<Index>& faces;
  std::vector<double> weights;

  void operator()(const Vec& in, Vec& out) const {
    const Array f = in.array();
    Array acc = Array::Zero(f.size());
    for (int a = 0; a < grid.dims(); ++a) acc += weights[a] * second(grid, f, a);
    out = acc.matrix();
    for (Index k : faces) out[k] = in[k];
  }
};

double face_term(const Grid& g, const Array& f, const Array& gv, int axis) {
  // <D f, g> + <f, D g> for g vanishing on the faces of `axis`.
  const Index N = g.points(axis), s = g.stride(axis);
  double acc = 0.0;
  for (Index k = 0; k < g.size(); ++k) {
    const Index j = g.coordinate_index(k, axis);
    if (j == 0) acc += f[k] * (3 * gv[k + s] - gv[k + 2 * s]);
    else if (j == N - 1) acc -= f[k] * (3 * gv[k - s] - gv[k - 2 * s]);
  }
  return acc * 0.5 / g.spacing(axis);
}

}  // namespace

// ---------------------------------------------------------------------------

EllipticOperator::EllipticOperator(const Grid& grid) : grid_(grid), face_nodes_(faces_of(grid)) {
  if (grid.n() < 3) throw InvalidArgument("EllipticOperator: n must be at least 3");
}

VectorField EllipticOperator::apply(const VectorField& v) const {
  if (v.grid() != grid_) throw InvalidArgument("EllipticOperator: grid mismatch");
  Array q = Array::Zero(grid_.size());
  for (int j = 0; j <= n(); ++j) q += derivative(grid_, v[j], j);
  VectorField out(grid_);
  for (int i = 0; i <= n(); ++i) {
    Array acc = row_coefficient(i) * derivative(grid_, q, i);
    for (int a = 0; a <= n(); ++a) acc += second(grid_, v[i], a);
    for (Index k : face_nodes_) acc[k] = v[i][k];
    out[i] = std::move(acc);
  }
  return out;
}

VectorField EllipticOperator::apply_adjoint(const VectorField& w) const {
  if (w.grid() != grid_) throw InvalidArgument("EllipticOperator: grid mismatch");
  Array s = Array::Zero(grid_.size());
  for (int i = 0; i <= n(); ++i) s += row_coefficient(i) * derivative(grid_, w[i], i);
  VectorField out(grid_);
  for (int j = 0; j <= n(); ++j) {
    Array acc = derivative(grid_, s, j);
    for (int a = 0; a <= n(); ++a) acc += second(grid_, w[j], a);
    for (Index k : face_nodes_) acc[k] = w[j][k];
    out[j] = std::move(acc);
  }
  return out;
}

void EllipticOperator::apply(const Vec& in, Vec& out) const { out = flatten(apply(to_vector_field(grid_, in))); }

SparseMat EllipticOperator::assemble() const {
  const Index S = grid_.size();
  std::vector<SparseMat> D;
  for (int a = 0; a <= n(); ++a) D.push_back(derivative_matrix(grid_, a));
  SparseMat L(S, S);
  for (int a = 0; a <= n(); ++a) L += SparseMat(D[a] * D[a]);
  std::vector<char> face(S, 0);
  for (Index k : face_nodes_) face[k] = 1;

  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i <= n(); ++i) {
    for (int j = 0; j <= n(); ++j) {
      SparseMat B = row_coefficient(i) * SparseMat(D[i] * D[j]);
      if (i == j) B += L;
      for (Index col = 0; col < B.outerSize(); ++col) {
        if (face[col]) continue;
        for (SparseMat::InnerIterator it(B, col); it; ++it) {
          if (!face[it.row()]) t.emplace_back(i * S + it.row(), j * S + col, it.value());
        }
      }
    }
    for (Index k : face_nodes_) t.emplace_back(i * S + k, i * S + k, 1.0);
  }
  SparseMat A(unknowns(), unknowns());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

// ---------------------------------------------------------------------------

SinePreconditioner::SinePreconditioner(const Grid& grid, std::vector<double> weights) : grid_(grid) {
  const int d = grid.dims();
  if (int(weights.size()) != d) throw InvalidArgument("SinePreconditioner: one weight per axis");
  std::vector<Array> eig;
  for (int a = 0; a < d; ++a) {
    const Index M = grid.points(a) - 2;
    interior_shape_.push_back(M);
    Mat S(M, M);
    for (Index j = 0; j < M; ++j)
      for (Index k = 0; k < M; ++k)
        S(j, k) = std::sqrt(2.0 / double(M + 1)) * std::sin(std::numbers::pi * double((j + 1) * (k + 1)) / double(M + 1));
    sine_.push_back(std::move(S));
    Array e(M);
    const double h = grid.spacing(a);
    for (Index k = 0; k < M; ++k) e[k] = -weights[a] * std::pow(std::sin(std::numbers::pi * double(k + 1) / double(M + 1)) / h, 2);
    eig.push_back(std::move(e));
  }
  Index total = 1;
  for (Index M : interior_shape_) total *= M;
  inverse_symbol_.resize(total);
  std::vector<Index> k(d, 0);
  for (Index flat = 0; flat < total; ++flat) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += eig[a][k[a]];
    inverse_symbol_[flat] = 1.0 / s;
    Index node = 0;
    for (int a = 0; a < d; ++a) node += (k[a] + 1) * grid.stride(a);
    interior_nodes_.push_back(node);
    for (int a = d - 1; a >= 0; --a) {
      if (++k[a] < interior_shape_[a]) break;
      k[a] = 0;
    }
  }
}

void SinePreconditioner::apply(const double* in, double* out) const {
  const int d = grid_.dims();
  const Index total = inverse_symbol_.size();
  std::copy(in, in + grid_.size(), out);
  Array X(total);
  for (Index i = 0; i < total; ++i) X[i] = in[interior_nodes_[i]];

  auto transform = [&]() {
    Index outer = 1, inner = total;
    for (int a = 0; a < d; ++a) {
      const Index len = interior_shape_[a];
      inner /= len;
      if (inner == 1) {
        Eigen::Map<Mat> B(X.data(), len, outer);
        B = (sine_[a] * B).eval();
      } else {
        for (Index o = 0; o < outer; ++o) {
          Eigen::Map<Mat> B(X.data() + o * len * inner, inner, len);
          B = (B * sine_[a]).eval();
        }
      }
      outer *= len;
    }
  };
  transform();
  X *= inverse_symbol_;
  transform();
  for (Index i = 0; i < total; ++i) out[interior_nodes_[i]] = X[i];
}

// ---------------------------------------------------------------------------

VectorField to_vector_field(const Grid& grid, const Vec& flat) {
  const Index S = grid.size();
  if (flat.size() != Index(grid.dims()) * S) throw InvalidArgument("to_vector_field: size mismatch");
  VectorField v(grid);
  for (int i = 0; i < grid.dims(); ++i) v[i] = flat.segment(i * S, S).array();
  return v;
}

Vec flatten(const VectorField& v) {
  const Index S = v.grid().size();
  Vec out(Index(v.count()) * S);
  for (int i = 0; i < v.count(); ++i) out.segment(i * S, S) = v[i].matrix();
  return out;
}

VectorField assemble_rhs(const SymTensorField& F) {
  const Grid& g = F.grid();
  const int n = g.n();
  VectorField u = divergence(F);
  const Array tr = trace(F).values();
  for (int i = 0; i <= n; ++i) {
    const double eps = i == 0 ? -1.0 : 1.0;
    u[i] = 2.0 * u[i] - (2.0 / (n - 1)) * eps * derivative(g, tr, i);
  }
  return u;
}

VectorField solve_dirichlet(const EllipticOperator& op, const VectorField& u, const SolverOptions& opt,
                            SolveReport* report, const VectorField* initial_guess) {
  const Grid& g = op.grid();
  if (u.grid() != g) throw InvalidArgument("solve_dirichlet: rhs grid mismatch");
  const std::vector<Index> faces = faces_of(g);
  const Index S = g.size();
  const int n = g.n();

  Vec b = flatten(u);
  for (int i = 0; i <= n; ++i)
    for (Index k : faces) b[i * S + k] = 0.0;
  Vec x = Vec::Zero(b.size());
  if (initial_guess) {
    x = flatten(*initial_guess);
    for (int i = 0; i <= n; ++i)
      for (Index k : faces) x[i * S + k] = 0.0;
  }
  SolveReport rep;
  if (b.isZero(0.0) && x.isZero(0.0)) {
    rep.method = "trivial";
    if (report) *report = rep;
    return VectorField(g);
  }
  Vec Ax0;
  op.apply(x, Ax0);
  const double ref = b.norm() > 0.0 ? b.norm() : Ax0.norm();

  const bool direct = opt.method == SolverOptions::Method::Direct ||
                      (opt.method == SolverOptions::Method::Auto && op.unknowns() <= opt.direct_limit);
  KrylovOptions kopt{opt.tolerance, opt.max_iterations, opt.restart};

  if (direct) {
    rep.method = "sparse-lu";
    Eigen::SparseLU<SparseMat> lu;
    lu.compute(op.assemble());
    if (lu.info() != Eigen::Success) throw NumericalFailure("solve_dirichlet: sparse factorization failed");
    x = lu.solve(b);
  } else if (n == 3 && opt.decoupled) {
    rep.method = "decoupled-gmres";
    auto scalar_solve = [&](const std::vector<double>& w, const Vec& rhs, Vec& sol) {
      ScalarOperator A{g, faces, w};
      SinePreconditioner P(g, w);
      LinearMap M = [&P](const Vec& in, Vec& out) {
        out.resize(in.size());
        P.apply(in.data(), out.data());
      };
      const KrylovResult r = gmres(A, M, rhs, sol, kopt);
      rep.iterations += r.iterations;
    };
    for (int j = 1; j <= 3; ++j) {
      Vec sol = x.segment(j * S, S);
      scalar_solve({1, 1, 1, 1}, b.segment(j * S, S), sol);
      x.segment(j * S, S) = sol;
    }
    // Time row: known coupling moved to the right-hand side.
    Array coupling = Array::Zero(S);
    for (int j = 1; j <= 3; ++j) coupling += derivative(g, Array(x.segment(j * S, S).array()), j);
    Vec rhs0 = b.head(S) - op.alpha() * derivative(g, coupling, 0).matrix();
    for (Index k : faces) rhs0[k] = 0.0;
    Vec sol = x.head(S);
    scalar_solve({1 + op.alpha(), 1, 1, 1}, rhs0, sol);
    x.head(S) = sol;
  } else {
    rep.method = "gmres";
    std::vector<SinePreconditioner> P;
    for (int i = 0; i <= n; ++i) {
      std::vector<double> w(n + 1, 1.0);
      w[i] += op.row_coefficient(i);
      P.emplace_back(g, w);
    }
    LinearMap A = [&op](const Vec& in, Vec& out) { op.apply(in, out); };
    LinearMap M = [&](const Vec& in, Vec& out) {
      out.resize(in.size());
      for (int i = 0; i <= n; ++i) P[i].apply(in.data() + i * S, out.data() + i * S);
    };
    const KrylovResult r = gmres(A, M, b, x, kopt);
    rep.iterations = r.iterations;
  }

  Vec Ax;
  op.apply(x, Ax);
  rep.residual = ref > 0.0 ? (Ax - b).norm() / ref : 0.0;
  if (report) *report = rep;
  if (!(rep.residual <= 10.0 * opt.tolerance)) {
    throw NumericalFailure("solve_dirichlet: residual " + std::to_string(rep.residual) + " after " +
                           std::to_string(rep.iterations) + " iterations (" + rep.method + ")");
  }
  VectorField v = to_vector_field(g, x);
  v.zero_boundary();
  return v;
}

ScalarField lambda_from_trace(const SymTensorField& F, const VectorField& v) {
  const int n = F.n();
  return ScalarField(F.grid(), (trace(F).values() - vector_divergence(v).values()) / double(n - 1));
}

double interior_max_abs(const Grid& grid, const Array& a) {
  double m = 0.0;
  for (Index k = 0; k < grid.size(); ++k)
    if (!grid.on_boundary(k)) m = std::max(m, std::abs(a[k]));
  return m;
}

DecompositionResult decompose(const SymTensorField& F, const SolverOptions& opt) {
  const Grid& g = F.grid();
  EllipticOperator op(g);
  SolveReport rep;
  VectorField v = solve_dirichlet(op, assemble_rhs(F), opt, &rep);
  ScalarField lambda = lambda_from_trace(F, v);
  SymTensorField Ft = F - scalar_metric(lambda) - sym_derivative(v);

  DecompositionDiagnostics d;
  const VectorField divFt = divergence(Ft), divF = divergence(F);
  for (int i = 0; i <= g.n(); ++i) {
    d.div_residual = std::max(d.div_residual, interior_max_abs(g, divFt[i]));
    d.div_scale = std::max(d.div_scale, interior_max_abs(g, divF[i]));
  }
  d.trace_residual = interior_max_abs(g, trace(Ft).values());
  d.field_scale = F.max_abs();
  const SymTensorField back = Ft + scalar_metric(lambda) + sym_derivative(v) - F;
  d.reconstruction_residual = d.field_scale > 0.0 ? back.max_abs() / d.field_scale : back.max_abs();
  d.solver_residual = rep.residual;
  d.iterations = rep.iterations;
  d.method = rep.method;
  return {std::move(Ft), std::move(lambda), std::move(v), d};
}

// ---------------------------------------------------------------------------

std::pair<Mat, Mat> symbol(const Vec& xi, int n) {
  if (xi.size() != n + 1) throw InvalidArgument("symbol: xi needs n+1 entries");
  if (xi.isZero(0.0)) throw InvalidArgument("symbol: xi must be nonzero");
  const double a = 1.0 + 2.0 / (n - 1), b = 1.0 - 2.0 / (n - 1);
  Vec c = Vec::Constant(n + 1, b);
  c[0] = a;
  Mat A = c.asDiagonal() * (xi * xi.transpose());
  A.diagonal().array() += xi.squaredNorm();
  Mat P = 0.5 * (A + A.transpose());
  return {A, P};
}

EllipticityReport ellipticity_certificate(int n, Index samples, std::uint64_t seed, int refine_starts) {
  if (n < 4) throw InvalidArgument("ellipticity_certificate: requires n >= 4 (n = 3 uses the decoupled path)");
  EllipticityReport rep;
  rep.n = n;
  rep.bound = double(n - 3) / double(n - 1);
  rep.samples = samples;
  rep.seed = seed;
  Vec c = Vec::Constant(n + 1, 1.0 - 2.0 / (n - 1));
  c[0] = 1.0 + 2.0 / (n - 1);

  auto ratio = [&](const Vec& xi, const Vec& eta) {
    const double xx = xi.squaredNorm(), ee = eta.squaredNorm();
    return 1.0 + c.cwiseProduct(xi).dot(eta) * xi.dot(eta) / (xx * ee);
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  using Entry = std::pair<double, std::pair<Vec, Vec>>;
  auto cmp = [](const Entry& a, const Entry& b) { return a.first < b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> best(cmp);
  Vec xi(n + 1), eta(n + 1);
  rep.sampled_min = std::numeric_limits<double>::infinity();
  for (Index s = 0; s < samples; ++s) {
    for (int i = 0; i <= n; ++i) xi[i] = N(rng);
    for (int i = 0; i <= n; ++i) eta[i] = N(rng);
    const double r = ratio(xi, eta);
    rep.sampled_min = std::min(rep.sampled_min, r);
    if (int(best.size()) < refine_starts) {
      best.push({r, {xi, eta}});
    } else if (refine_starts > 0 && r < best.top().first) {
      best.pop();
      best.push({r, {xi, eta}});
    }
  }
  rep.min_ratio = rep.sampled_min;

  Eigen::SelfAdjointEigenSolver<Mat> es;
  while (!best.empty()) {
    auto [r, pair] = best.top();
    best.pop();
    Vec x = pair.first.normalized(), e = pair.second.normalized();
    double cur = ratio(x, e);
    for (int it = 0; it < 200; ++it) {
      es.compute(symbol(x, n).second);
      e = es.eigenvectors().col(0);
      // For fixed eta the form is quadratic in xi.
      const Vec ce = c.cwiseProduct(e);
      Mat Q = 0.5 * (ce * e.transpose() + e * ce.transpose());
      Q.diagonal().array() += 1.0;
      es.compute(Q);
      x = es.eigenvectors().col(0);
      const double next = ratio(x, e);
      const bool done = cur - next < 1e-15;
      cur = std::min(cur, next);
      if (done) break;
    }
    if (cur < rep.min_ratio || rep.xi.size() == 0) {
      if (cur < rep.min_ratio) rep.min_ratio = cur;
      rep.xi = x;
      rep.eta = e;
    }
  }
  if (rep.xi.size() == 0) {
    rep.xi = xi;
    rep.eta = eta;
  }
  rep.certified = rep.min_ratio >= rep.bound - 1e-9;
  return rep;
}

VectorField random_boundary_vanishing(const Grid& grid, std::uint64_t seed, Index margin) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  VectorField v(grid);
  for (int i = 0; i < v.count(); ++i)
    for (Index k = 0; k < grid.size(); ++k) v[i][k] = grid.is_interior(k, margin) ? U(rng) : 0.0;
  return v;
}

double adjoint_residual(const Grid& grid, int trials, std::uint64_t seed) {
  EllipticOperator op(grid);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const VectorField v = random_boundary_vanishing(grid, seed + 2 * t, 3);
    const VectorField w = random_boundary_vanishing(grid, seed + 2 * t + 1, 3);
    const Vec fv = flatten(v), fw = flatten(w);
    const double nv = fv.norm(), nw = fw.norm();
    if (nv == 0.0 || nw == 0.0) continue;
    const double lhs = fw.dot(flatten(op.apply(v)));
    const double rhs = flatten(op.apply_adjoint(w)).dot(fv);
    worst = std::max(worst, std::abs(lhs - rhs) / (nv * nw));
  }
  return worst;
}

double energy_identity_residual(const EllipticOperator& op, const VectorField& v) {
  const Grid& g = op.grid();
  const int n = g.n();
  if (v.grid() != g) throw InvalidArgument("energy_identity_residual: grid mismatch");
  if (!v.vanishes_on_boundary()) throw InvalidArgument("energy_identity_residual: v must vanish on the faces");
  const VectorField Av = op.apply(v);
  double e_op = 0.0;
  for (int i = 0; i <= n; ++i) e_op -= (Av[i] * v[i]).sum();

  double grad2 = 0.0, faces = 0.0;
  Array q = Array::Zero(g.size());
  Array d00;
  for (int j = 0; j <= n; ++j) {
    for (int a = 0; a <= n; ++a) {
      const Array d = derivative(g, v[j], a);
      grad2 += d.square().sum();
      faces -= face_term(g, d, v[j], a);
      if (a == j) q += d;
      if (a == 0 && j == 0) d00 = d;
    }
  }
  for (int i = 0; i <= n; ++i) faces -= op.row_coefficient(i) * face_term(g, q, v[i], i);
  const double e_identity = grad2 + op.beta() * q.square().sum() + (4.0 / (n - 1)) * (q * d00).sum();
  if (grad2 == 0.0) return std::abs(e_op);
  return std::abs(e_op - e_identity - faces) / grad2;
}

DiscriminantCheck discriminant_check(const VectorField& v) {
  const Grid& g = v.grid();
  const int n = g.n();
  Array c = Array::Zero(g.size()), b = Array::Zero(g.size());
  for (int j = 0; j <= n; ++j) {
    for (int a = 0; a <= n; ++a) {
      const Array d = derivative(g, v[j], a);
      if (!(a == 0 && j == 0)) c += d.square();
      if (a == j && j >= 1) b += d;
    }
  }
  return {double(n) * c.sum(), b.square().sum()};
}

}  // namespace minkray
