#ifndef MINKRAY_DECOMPOSITION_HPP
#define MINKRAY_DECOMPOSITION_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "minkray/fields.hpp"
#include "minkray/krylov.hpp"

namespace minkray {

using SparseMat = Eigen::SparseMatrix<double>;

/// Discrete A(t,x;grad) on (n+1)-component vector fields:
///   (Av)_i = sum_a D_a D_a v_i + c_i D_i (sum_j D_j v_j),  c_0 = alpha, c_i = beta,
/// with D the library's first-difference operator. On grid faces the rows are
/// identity rows (zero Dirichlet data).
///
/// Composing the same D used by divergence and sym_derivative makes
/// A v = 2 delta(d v) - (2/(n-1)) eps D(div v) hold exactly, so a solved
/// system leaves a decomposition whose remainder is divergence-free to solver
/// precision.
class EllipticOperator {
 public:
  explicit EllipticOperator(const Grid& grid);

  const Grid& grid() const { return grid_; }
  int n() const { return grid_.n(); }
  double alpha() const { return 1.0 + 2.0 / (n() - 1); }
  double beta() const { return 1.0 - 2.0 / (n() - 1); }
  /// alpha for the time row, beta for the spatial rows.
  double row_coefficient(int i) const { return i == 0 ? alpha() : beta(); }
  Index unknowns() const { return Index(n() + 1) * grid_.size(); }

  VectorField apply(const VectorField& v) const;
  /// Transposed display: (A* w)_j = sum_a D_a D_a w_j + D_j (sum_i c_i D_i w_i).
  VectorField apply_adjoint(const VectorField& w) const;

  /// Flat form: components stacked, each in grid storage order.
  void apply(const Vec& in, Vec& out) const;

  /// Full sparse matrix including identity rows on the faces; face columns
  /// are dropped so the interior block decouples.
  SparseMat assemble() const;

 private:
  Grid grid_;
  std::vector<Index> face_nodes_;
};

/// Exact inverse of sum_a w_a D~_a^2 on interior nodes, where D~_a^2 is the
/// wide centred stencil closed by odd reflection at the faces. It differs
/// from the real operator only next to the faces; used as a preconditioner.
/// Face entries pass through unchanged.
class SinePreconditioner {
 public:
  SinePreconditioner(const Grid& grid, std::vector<double> weights);
  void apply(const double* in, double* out) const;

 private:
  Grid grid_;
  std::vector<Index> interior_shape_;
  std::vector<Mat> sine_;     // orthonormal DST-I per axis
  Array inverse_symbol_;      // over interior nodes, row-major
  std::vector<Index> interior_nodes_;
};

VectorField to_vector_field(const Grid& grid, const Vec& flat);
Vec flatten(const VectorField& v);

/// u_i = 2 sum_j D_j F_ij - (2/(n-1)) eps_i D_i trace(F), eps = (-1, 1, ..., 1).
VectorField assemble_rhs(const SymTensorField& F);

struct SolverOptions {
  enum class Method { Auto, Krylov, Direct };
  Method method = Method::Auto;
  double tolerance = 1e-10;
  int max_iterations = 3000;
  int restart = 40;
  /// Auto picks the direct factorization at or below this many unknowns.
  Index direct_limit = 20000;
  /// n = 3: solve the spatial rows as independent Poisson problems, then the
  /// time row as one anisotropic scalar problem.
  bool decoupled = true;
};

struct SolveReport {
  std::string method;
  int iterations = 0;
  double residual = 0.0;  // |Av - u| / |u| over interior rows
};

/// Interior values of u are used; face values are ignored (v = 0 there).
/// Throws NumericalFailure when the residual target is missed.
VectorField solve_dirichlet(const EllipticOperator& op, const VectorField& u, const SolverOptions& opt = {},
                            SolveReport* report = nullptr, const VectorField* initial_guess = nullptr);

/// lambda = (trace F - div v) / (n - 1).
ScalarField lambda_from_trace(const SymTensorField& F, const VectorField& v);

struct DecompositionDiagnostics {
  double div_residual = 0.0;    // interior max |delta F~|
  double trace_residual = 0.0;  // interior max |trace F~|
  double div_scale = 0.0;       // interior max |delta F|
  double field_scale = 0.0;     // max |F|
  double reconstruction_residual = 0.0;  // max |F~ + lambda g + dv - F| / max |F|
  double solver_residual = 0.0;
  int iterations = 0;
  std::string method;
};

struct DecompositionResult {
  SymTensorField F_tilde;
  ScalarField lambda;
  VectorField v;
  DecompositionDiagnostics diagnostics;
};

DecompositionResult decompose(const SymTensorField& F, const SolverOptions& opt = {});

/// Interior max norm (nodes off the faces).
double interior_max_abs(const Grid& grid, const Array& a);

/// (A(xi), P(xi)) with P = (A + A^T) / 2.
std::pair<Mat, Mat> symbol(const Vec& xi, int n);

struct EllipticityReport {
  int n = 0;
  double bound = 0.0;      // (n-3)/(n-1)
  double min_ratio = 0.0;  // eta^T P eta / (|xi|^2 |eta|^2), minimized
  double sampled_min = 0.0;
  Vec xi, eta;             // minimizing pair
  Index samples = 0;
  std::uint64_t seed = 0;
  bool certified = false;  // min_ratio >= bound - 1e-9
};

/// Random (xi, eta) pairs, then alternating eigenvector refinement from the
/// best samples. Rejects n < 4.
EllipticityReport ellipticity_certificate(int n, Index samples, std::uint64_t seed, int refine_starts = 16);

/// max over trials |<w, Av> - <A*w, v>| / (|v| |w|) for random fields supported
/// at least three cells away from the faces.
double adjoint_residual(const Grid& grid, int trials, std::uint64_t seed);

/// Discrete integration by parts for boundary-vanishing v:
///   -<Av, v> = sum_j |D v_j|^2 + beta |div v|^2 + (4/(n-1)) <div v, D_0 v_0> + B(v),
/// where B collects the face terms of the one-sided closures. Returns the
/// defect normalized by sum_j |D v_j|^2.
double energy_identity_residual(const EllipticOperator& op, const VectorField& v);

/// Grid sums of c = sum_j |D v_j|^2 - (D_0 v_0)^2 and b = sum_{j>=1} D_j v_j.
struct DiscriminantCheck {
  double n_sum_c = 0.0;
  double sum_b2 = 0.0;
  bool holds() const { return n_sum_c >= sum_b2; }
};

DiscriminantCheck discriminant_check(const VectorField& v);

/// Random boundary-vanishing field with O(1) entries.
VectorField random_boundary_vanishing(const Grid& grid, std::uint64_t seed, Index margin = 1);

}  // namespace minkray

#endif  // MINKRAY_DECOMPOSITION_HPP
