#ifndef MINKRAY_CHECKS_HPP
#define MINKRAY_CHECKS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "minkray/decomposition.hpp"
#include "minkray/freq_solver.hpp"
#include "minkray/phantoms.hpp"

namespace minkray {

/// Outcome of one acceptance check. Metrics are reported in insertion order.
struct CheckResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  double seconds = 0.0;

  void metric(const std::string& key, double value) { metrics.emplace_back(key, value); }
  /// Value of a metric; throws if absent.
  double value(const std::string& key) const;
};

/// 1: the transform of a gauge phantom is small relative to
/// (|lambda|_inf + |grad v|_inf) * support diameter.
struct GaugeKernelParams {
  int n = 3;
  Index N = 32;
  double half_width = 1.0;
  int rays = 200;
  double spread = 0.2;  // max angle between ray directions and theta0
  Vec theta0;           // empty: e1
  double tolerance = 2e-2;
  std::uint64_t seed = 1;
  int workers = 1;
};
CheckResult check_gauge_kernel(const GaugeKernelParams& p, GaugePhantom* phantom_out = nullptr);

/// 2: slice identity on a Gaussian phantom at N, and its refinement factor
/// from N to N_refine (skipped when N_refine = 0).
struct SliceParams {
  int n = 3;
  Index N = 32;
  Index N_refine = 48;
  double half_width = 1.0;
  double width = 0.17;
  int frequencies = 50;
  double min_frequency = 0.5;
  double max_frequency = 6.0;
  Vec theta0;
  double tolerance = 5e-2;
  double factor_lo = 3.0, factor_hi = 5.0;
  std::uint64_t seed = 1;
  int workers = 1;
};
CheckResult check_slice_identity(const SliceParams& p);

/// Pinned |det| of the n = 3 system at zeta_0 and the minimum over the
/// default determinant box.
inline constexpr double kDeterminantAtZeta0 = 144.0;

/// 3: integer rows at zeta_0, trivial kernel of the 10 x 10 system and |det|
/// against `reference`.
struct SystemParams {
  double reference = kDeterminantAtZeta0;
  double rel_tol = 1e-12;
};
CheckResult check_system_at_zeta0(const SystemParams& p = {});

/// 4: min |det| over the angle box is positive and equals `reference`.
struct DetMapParams {
  double half_width = 0.1;
  int resolution = 21;
  double reference = kDeterminantAtZeta0;
  double rel_tol = 1e-12;
  int workers = 1;
};
CheckResult check_determinant_map(const DetMapParams& p, DeterminantMap* map_out = nullptr);

/// 5: exact synthetic data for random constrained spectra at random cone
/// points (n = 3), and full rank at random cone points for higher n.
struct RecoveryParams {
  int spectra = 1000;
  double cone_half_width = 0.1;
  double min_scale = 0.5, max_scale = 10.0;
  FitSpec fit;
  double tolerance = 1e-10;
  std::vector<int> rank_dims = {4, 5};
  int rank_points = 200;
  std::uint64_t seed = 1;
  int workers = 1;
};
CheckResult check_synthetic_recovery(const RecoveryParams& p);

/// 6: recovery from measured slab data against the Riemann-sum spectrum.
struct EndToEndParams {
  int n = 3;
  Index N = 32;
  double half_width = 1.0;
  SolenoidalSpec phantom;
  ConeSpec cone = default_cone();
  FitSpec fit;
  Interpolation interpolation = Interpolation::CubicBSpline;
  double noise_sigma = 0.0;
  int min_frequencies = 100;
  double median_tol = 0.10, max_tol = 0.25;
  std::uint64_t seed = 1;
  int workers = 1;

  static ConeSpec default_cone() {
    ConeSpec c;
    c.half_width = 0.1;
    c.resolution = 3;
    c.scales = {3.0, 5.0, 8.0, 12.0};
    return c;
  }
};

struct RecoveryTable {
  std::vector<ConeResult> results;
  std::vector<double> errors;  // relative to the reference, NaN on failure
};

/// Sweeps the cone with slab data of F and compares to dft_at(F, zeta).
RecoveryTable recover_cone(const SymTensorField& F, const EndToEndParams& p);

CheckResult check_end_to_end(const EndToEndParams& p, RecoveryTable* table_out = nullptr,
                             SymTensorField* phantom_out = nullptr);

/// 7: decomposition of a manufactured gauge field over several grids.
struct DecompositionParams {
  int n = 3;
  std::vector<Index> levels = {16, 24, 32};
  double half_width = 1.0;
  double order_lo = 1.7, order_hi = 2.3;
  double diagnostics_tol = 1e-8;
  SolverOptions solver;
  std::uint64_t seed = 7;
};
CheckResult check_decomposition(const DecompositionParams& p, DecompositionResult* finest_out = nullptr);

/// 8: sampled plus refined minimum of the symbol ratio for each n.
struct CertifyParams {
  int n_min = 4, n_max = 8;
  Index samples = 1000000;
  int refine_starts = 16;
  double tolerance = 1e-9;
  std::uint64_t seed = 1;
};
CheckResult check_ellipticity(const CertifyParams& p);

/// 9: homogeneous solve, energy identity, adjoint consistency and the
/// discriminant inequality.
struct KernelParams {
  std::vector<int> dims = {3, 4};
  std::vector<Index> points = {12, 8};  // grid points per axis, per entry of dims
  int fields = 100;
  double kernel_tol = 1e-8;
  double energy_tol = 1e-8;
  double adjoint_tol = 1e-10;
  std::uint64_t seed = 1;
};
CheckResult check_kernel_energy(const KernelParams& p);

/// 10: spectra recovered from F and from F + lambda g + dv agree within
/// `factor` times the end-to-end tolerances.
struct GaugeRecoveryParams {
  EndToEndParams base;
  double gauge_scale = 1.0;  // max |lambda g + dv| relative to max |F|
  double factor = 2.0;
};
CheckResult check_gauge_insensitivity(const GaugeRecoveryParams& p, const RecoveryTable* baseline = nullptr);

/// Integer coefficient table of the directional rows at zeta_0 after the
/// row scaling (1, 1/2, -1/2, -1/2, 1/2), upper-lex columns.
Mat integer_rows_at_zeta0();

/// Median of the finite entries (NaN if none).
double median(std::vector<double> values);

}  // namespace minkray

#endif  // MINKRAY_CHECKS_HPP
