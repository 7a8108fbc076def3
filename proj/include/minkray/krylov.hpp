#ifndef MINKRAY_KRYLOV_HPP
#define MINKRAY_KRYLOV_HPP

#include <functional>

#include "minkray/types.hpp"

namespace minkray {

/// out = Op(in); `out` is resized by the caller's convention (same size as in).
using LinearMap = std::function<void(const Vec& in, Vec& out)>;

struct KrylovOptions {
  double tolerance = 1e-10;
  int max_iterations = 2000;
  int restart = 40;
};

struct KrylovResult {
  int iterations = 0;
  double residual = 0.0;  // true relative residual at exit
  bool converged = false;
};

/// Restarted GMRES with right preconditioning M ~ A^{-1}. Convergence is
/// judged on the true residual |b - Ax| <= tol |b|; for b = 0 the reference
/// is the initial residual instead. x holds the initial guess on entry.
KrylovResult gmres(const LinearMap& A, const LinearMap& M, const Vec& b, Vec& x, const KrylovOptions& opt = {});

}  // namespace minkray

#endif  // MINKRAY_KRYLOV_HPP
