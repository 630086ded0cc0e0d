#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nlperim/gridset.hpp"
#include "nlperim/kernels.hpp"

namespace nlp::io {

using json = nlohmann::json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// Hash of the canonical (key-sorted, compact) serialization.
std::string config_hash(const json& config);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Shortest round-trip decimal form.
std::string format_double(double v);

// -- masks --------------------------------------------------------------------

/// Geometry used when a file does not carry it; the lattice is centred on the
/// origin when `origin` is empty.
struct MaskGeometry {
    std::optional<double> h;
    std::optional<Point3> origin;
};

/// Reads a PGM (d = 2, row 0 at the top, value > 127 occupied), a raw byte
/// volume with a ".json" sidecar (d = 3), or run-length text (d = 1), chosen by
/// extension. Geometry stored in the file wins over `fallback`.
GridSet read_mask(const std::filesystem::path& path, const MaskGeometry& fallback = {});
void write_mask(const std::filesystem::path& path, const GridSet& set, const std::string& hash);

std::string mask_to_pgm(const GridSet& set, const std::string& hash);
GridSet mask_from_pgm(const std::string& bytes, const MaskGeometry& fallback = {});
std::string mask_to_rle(const GridSet& set, const std::string& hash);
GridSet mask_from_rle(const std::string& text, const MaskGeometry& fallback = {});

/// 8-bit image of a 2D scalar array (row 0 at the top).
std::string gray_pgm(const Lattice& lat, const std::vector<std::uint8_t>& pixels, const std::string& hash);
/// Component labels as distinct gray levels (0 = background).
std::string labels_pgm(const Lattice& lat, const std::vector<int>& labels, std::size_t count, const std::string& hash);
/// Magnitude of a field scaled to [0, 255].
std::string magnitude_pgm(const GridField& field, const std::string& hash);

// -- fields -----------------------------------------------------------------

/// Scalar 2D field as a value matrix (row 0 at the top, '#' comments may carry
/// "h=" and "origin=x,y"); one row of values for d = 1.
GridField field_from_csv(const std::string& text, const MaskGeometry& fallback = {}, int dim = 2);
GridField read_field(const std::filesystem::path& path, const MaskGeometry& fallback = {}, int dim = 2);

// -- tables -----------------------------------------------------------------

class Csv {
public:
    Csv(const std::string& hash, std::vector<std::string> columns);
    Csv& row(const std::vector<double>& values);
    Csv& row(const std::vector<std::string>& cells);
    std::string str() const { return text_; }

private:
    std::size_t ncols_;
    std::string text_;
};

// -- kernels ----------------------------------------------------------------

/// {"family": "fractional" | "truncated_fractional" | "bump" | "tabulated",
///  "dim", "alpha", "eps", "a", "s", "radii", "values", "rescale",
///  "normalization": "none" | "unit_mass" | "mass_d", "sigma", "gamma", "nu", "eta"}.
KernelSpec kernel_from_json(const json& j, int default_dim = 2);
json kernel_to_json(const KernelSpec& spec);
KernelSpec read_kernel(const std::filesystem::path& path, int default_dim = 2);

}  // namespace nlp::io
