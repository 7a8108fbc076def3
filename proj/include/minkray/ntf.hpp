#ifndef MINKRAY_NTF_HPP
#define MINKRAY_NTF_HPP

#include <string>

#include "minkray/fields.hpp"
#include "minkray/fourier.hpp"
#include "minkray/freq_solver.hpp"
#include "minkray/lightray.hpp"

namespace minkray {

/// NTF v1: one JSON header line, then the payload as little-endian doubles
/// (f64le) or interleaved re/im pairs (c128le), component-major and row-major
/// within each component.
///
/// Header keys: version, kind, n, shape, spacing, origin, components, order,
/// dtype; slabs add direction, basis, anchor, covers_support and
/// required_half_extent; detmaps add half_width and resolution.
class FormatError : public Error {
 public:
  FormatError(const std::string& key, const std::string& what)
      : Error("ntf: " + (key.empty() ? what : "header key '" + key + "': " + what)), key_(key) {}
  /// Offending header key, empty for payload errors.
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

void write_field(const std::string& path, const ScalarField& f);
void write_field(const std::string& path, const VectorField& f);
void write_field(const std::string& path, const SymTensorField& f);
void write_field(const std::string& path, const SpectralField& f);
void write_field(const std::string& path, const Slab& s);
void write_field(const std::string& path, const DeterminantMap& m);

ScalarField read_scalar(const std::string& path);
VectorField read_vector(const std::string& path);
SymTensorField read_tensor(const std::string& path);
SpectralField read_spectral(const std::string& path);
Slab read_slab(const std::string& path);
DeterminantMap read_detmap(const std::string& path);

/// The "kind" entry of a file's header.
std::string read_kind(const std::string& path);

}  // namespace minkray

#endif  // MINKRAY_NTF_HPP
