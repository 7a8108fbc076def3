#ifndef MINKRAY_CONFIG_HPP
#define MINKRAY_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "minkray/freq_solver.hpp"
#include "minkray/lightray.hpp"

namespace minkray {

/// Configuration error; key() is the dotted key path ("grid.n"), or
/// "line N" for syntax errors.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what) : Error("config: " + key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Command { Forward, SliceCheck, FreqSolve, DetMap, Decompose, Certify, EndToEnd, GaugeCheck };

std::string command_name(Command c);
std::optional<Command> parse_command(const std::string& name);
const std::vector<std::string>& command_names();

/// Validated experiment description. Text format: `key = value` lines, with
/// `[section]` headers; `#` starts a comment. Global keys: command, seed,
/// workers (integer or "auto"), out.
struct ExperimentConfig {
  Command command = Command::Forward;
  std::uint64_t seed = 1;
  int workers = 1;  // 0: one per hardware thread
  std::string out = "minkray-out";

  // [grid]
  int n = 3;
  Index N = 32;
  double half_width = 1.0;
  Index N_refine = 48;  // slice-check refinement grid, 0 disables

  // [direction]
  Vec theta0;  // unit, defaults to e1

  // [phantom]
  std::string phantom;  // gaussian | solenoidal | gauge; empty: command default
  std::string input;    // NTF tensor file used instead of a generated phantom
  double width = 0.17;
  int terms = 3;
  int smoothness = 8;
  double radius_fraction = 0.8;
  double center_spread = 0.05;
  double gauge_scale = 1.0;

  // [cone]
  ConeSpec cone;
  std::vector<std::string> cone_text;  // section lines as written

  // [fit]
  FitSpec fit;

  // [rays]
  int rays = 200;
  double spread = 0.2;
  Interpolation interpolation = Interpolation::Multilinear;

  // [slice]
  int frequencies = 50;
  double min_frequency = 0.5, max_frequency = 6.0;

  // [recovery]
  int spectra = 1000;
  std::vector<int> rank_dims = {4, 5};
  int rank_points = 200;
  Interpolation recovery_interpolation = Interpolation::CubicBSpline;
  double noise_sigma = 0.0;
  int min_frequencies = 100;

  // [detmap]
  double detmap_half_width = 0.1;
  int detmap_resolution = 21;

  // [decompose]
  std::vector<Index> levels = {16, 24, 32};
  std::string method = "auto";  // auto | krylov | direct
  bool kernel_checks = true;
  int kernel_fields = 100;

  // [certify]
  int n_min = 4, n_max = 8;
  Index samples = 1000000;
  int refine_starts = 16;

  // [gauge]
  bool gauge_recovery = true;

  // [tolerance]
  double tol_gauge_kernel = 2e-2;
  double tol_slice = 5e-2, slice_factor_lo = 3.0, slice_factor_hi = 5.0;
  double tol_det = 1e-12;
  double tol_recovery = 1e-10;
  double tol_e2e_median = 0.10, tol_e2e_max = 0.25;
  double order_lo = 1.7, order_hi = 2.3;
  double tol_diagnostics = 1e-8;
  double tol_ellipticity = 1e-9;
  double tol_kernel = 1e-8, tol_energy = 1e-8, tol_adjoint = 1e-10;
  double gauge_factor = 2.0;

  std::string text;  // configuration text as given
};

/// Values supplied outside the file; they take precedence over file keys.
struct ConfigOverrides {
  std::optional<std::string> command;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
};

/// Parses, validates and fills defaults. Keys that the selected command does
/// not use are rejected.
ExperimentConfig parse_config(const std::string& text, const ConfigOverrides& overrides = {});

}  // namespace minkray

#endif  // MINKRAY_CONFIG_HPP
