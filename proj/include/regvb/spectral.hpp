#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "regvb/corpus.hpp"
#include "regvb/depmat.hpp"

namespace regvb {

/// H x W_px x B reflectance cube, band index fastest.
struct HyperCube {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> bands;        ///< wavelengths in nm, strictly increasing
  std::vector<double> reflectance;  ///< height * width * bands.size()

  HyperCube() = default;
  HyperCube(std::size_t h, std::size_t w, std::vector<double> wavelengths, double fill = 0.0);

  std::size_t num_bands() const noexcept { return bands.size(); }
  std::size_t num_pixels() const noexcept { return height * width; }

  std::span<double> pixel(std::size_t y, std::size_t x) {
    return {reflectance.data() + (y * width + x) * bands.size(), bands.size()};
  }
  std::span<const double> pixel(std::size_t y, std::size_t x) const {
    return {reflectance.data() + (y * width + x) * bands.size(), bands.size()};
  }

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct PixelMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<char> keep;  ///< row-major, nonzero = keep

  static PixelMask all(std::size_t h, std::size_t w) { return {h, w, std::vector<char>(h * w, 1)}; }
  bool kept(std::size_t y, std::size_t x) const { return keep[y * width + x] != 0; }
};

struct SpectralWordSpec {
  std::size_t Wl = 69;  ///< retained band count
  std::size_t R = 50;   ///< reflectance bins per band
  double band_lo = 470.0;
  double band_hi = 750.0;
  double reflectance_lo = 0.0;
  double reflectance_hi = 1.2;

  std::size_t vocab_size() const noexcept { return Wl * R; }
  WordId word_id(std::size_t band, std::size_t bin) const noexcept { return static_cast<WordId>(band * R + bin); }
};

enum class Binning {
  kEqualWidth,         ///< equal-width bins over [reflectance_lo, reflectance_hi], shared by all bands
  kPerBandEqualWidth,  ///< equal-width bins over each band's observed range
  kPerBandQuantile,    ///< per-band bins holding equal shares of the kept pixels
};

/// Maps (band, reflectance) to a bin in [0, R).
class ReflectanceBinner {
 public:
  explicit ReflectanceBinner(const SpectralWordSpec& spec);

  /// Data-driven binning; edges come from the kept pixels of `cube`.
  static ReflectanceBinner fit(const SpectralWordSpec& spec, Binning mode, const HyperCube& cube,
                               const PixelMask& mask);

  std::uint32_t bin(std::size_t band, double reflectance) const;

 private:
  std::size_t R_;
  std::vector<double> lo_, hi_;              // equal-width ranges per band
  std::vector<std::vector<double>> edges_;   // interior quantile edges per band (quantile mode)
};

/// Divide every pixel spectrum by the white-reference spectrum.
HyperCube normalize_reflectance(const HyperCube& cube, std::span<const double> white_reference);

/// Keep bands with lo_nm <= wavelength <= hi_nm.
HyperCube crop_bands(const HyperCube& cube, double lo_nm, double hi_nm);

/// Per-band mean over non-overlapping block x block tiles; partial tiles are dropped.
HyperCube aggregate_blocks(const HyperCube& cube, std::size_t block);

/// A tile survives aggregation only when every pixel in it is kept.
PixelMask aggregate_mask(const PixelMask& mask, std::size_t block);

/// Vocabulary terms "<wavelength>nm:r<bin>" in word-id order.
Vocabulary spectral_vocabulary(const SpectralWordSpec& spec, std::span<const double> wavelengths);

/// One document per kept pixel (row-major), one word per band.
Corpus discretize(const HyperCube& cube, const SpectralWordSpec& spec, const PixelMask& mask);
Corpus discretize(const HyperCube& cube, const SpectralWordSpec& spec, const PixelMask& mask,
                  const ReflectanceBinner& binner);

struct SpectralWindow {
  /// Pair adjacent bands only when their bins differ by at most one.
  bool require_adjacent_bins = true;
};

/// Co-occurrences between the words of adjacent bands within each signature.
CooccurrenceCounts spectral_cooccurrences(const Corpus& signatures, const SpectralWordSpec& spec,
                                          SpectralWindow window = {});

// Cube file: magic "HSC1", u32 H, W_px, B, B float64 wavelengths, then
// H*W_px*B float32 reflectances, band fastest; all little-endian.
HyperCube read_cube(std::istream& in);
HyperCube load_cube(const std::filesystem::path& path);
void write_cube(std::ostream& out, const HyperCube& cube);
void save_cube(const HyperCube& cube, const std::filesystem::path& path);

// Plain PBM ("P1") grid; 1 marks a kept pixel.
PixelMask read_mask(std::istream& in);
PixelMask load_mask(const std::filesystem::path& path);
void write_mask(std::ostream& out, const PixelMask& mask);

std::vector<double> load_reference(const std::filesystem::path& path);

}  // namespace regvb
