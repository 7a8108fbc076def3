#include "minkray/krylov.hpp"

#include <Eigen/Jacobi>

namespace minkray {

KrylovResult gmres(const LinearMap& A, const LinearMap& M, const Vec& b, Vec& x, const KrylovOptions& opt) {
  if (x.size() != b.size()) x = Vec::Zero(b.size());
  const Index m = b.size();
  const int restart = std::max(1, opt.restart);
  KrylovResult res;

  Vec r(m), w(m), z(m);
  A(x, w);
  r = b - w;
  double beta = r.norm();
  const double ref = b.norm() > 0.0 ? b.norm() : beta;
  if (ref == 0.0) {
    res.converged = true;
    return res;
  }
  const double target = opt.tolerance * ref;

  Mat V(m, restart + 1);
  Mat H = Mat::Zero(restart + 1, restart);
  Vec g(restart + 1);
  std::vector<Eigen::JacobiRotation<double>> rot(restart);

  while (beta > target && res.iterations < opt.max_iterations) {
    H.setZero();
    g.setZero();
    g[0] = beta;
    V.col(0) = r / beta;
    int k = 0;
    bool breakdown = false;
    for (; k < restart && res.iterations < opt.max_iterations; ++k) {
      M(V.col(k), z);
      A(z, w);
      // Modified Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          const double c = V.col(i).dot(w);
          H(i, k) += c;
          w.noalias() -= c * V.col(i);
        }
      }
      H(k + 1, k) = w.norm();
      ++res.iterations;
      breakdown = H(k + 1, k) <= 1e-300;
      if (!breakdown) V.col(k + 1) = w / H(k + 1, k);
      for (int i = 0; i < k; ++i) H.col(k).applyOnTheLeft(i, i + 1, rot[i].adjoint());
      rot[k].makeGivens(H(k, k), H(k + 1, k));
      H.col(k).applyOnTheLeft(k, k + 1, rot[k].adjoint());
      g.applyOnTheLeft(k, k + 1, rot[k].adjoint());
      if (std::abs(g[k + 1]) <= target || breakdown) {
        ++k;
        break;
      }
    }
    const Vec y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    w.noalias() = V.leftCols(k) * y;
    M(w, z);
    x += z;
    A(x, w);
    r = b - w;
    const double prev = beta;
    beta = r.norm();
    if (breakdown && beta >= prev) break;  // invariant subspace exhausted without progress
  }
  res.residual = beta / ref;
  res.converged = beta <= target;
  return res;
}

}  // namespace minkray
