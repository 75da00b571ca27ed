#include "regvb/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace regvb {

HyperCube::HyperCube(std::size_t h, std::size_t w, std::vector<double> wavelengths, double fill)
    : height(h), width(w), bands(std::move(wavelengths)), reflectance(h * w * bands.size(), fill) {}

void HyperCube::validate() const {
  if (bands.empty()) throw std::invalid_argument("HyperCube: no bands");
  for (std::size_t b = 1; b < bands.size(); ++b) {
    if (!(bands[b] > bands[b - 1])) throw std::invalid_argument("HyperCube: wavelengths must be strictly increasing");
  }
  if (reflectance.size() != height * width * bands.size()) throw std::invalid_argument("HyperCube: size mismatch");
  for (double r : reflectance) {
    if (!std::isfinite(r) || r < 0.0) throw std::invalid_argument("HyperCube: reflectance must be finite and >= 0");
  }
}

ReflectanceBinner::ReflectanceBinner(const SpectralWordSpec& spec)
    : R_(spec.R), lo_(spec.Wl, spec.reflectance_lo), hi_(spec.Wl, spec.reflectance_hi) {
  if (spec.R == 0) throw std::invalid_argument("ReflectanceBinner: R must be >= 1");
  if (!(spec.reflectance_hi > spec.reflectance_lo)) {
    throw std::invalid_argument("ReflectanceBinner: empty reflectance range");
  }
}

ReflectanceBinner ReflectanceBinner::fit(const SpectralWordSpec& spec, Binning mode, const HyperCube& cube,
                                         const PixelMask& mask) {
  ReflectanceBinner binner(spec);
  if (mode == Binning::kEqualWidth) return binner;
  if (cube.num_bands() != spec.Wl) throw std::invalid_argument("ReflectanceBinner: band count differs from spec");
  if (mask.height != cube.height || mask.width != cube.width) {
    throw std::invalid_argument("ReflectanceBinner: mask size differs from cube");
  }
  std::vector<std::vector<double>> values(spec.Wl);
  for (std::size_t y = 0; y < cube.height; ++y) {
    for (std::size_t x = 0; x < cube.width; ++x) {
      if (!mask.kept(y, x)) continue;
      auto px = cube.pixel(y, x);
      for (std::size_t b = 0; b < spec.Wl; ++b) values[b].push_back(px[b]);
    }
  }
  for (std::size_t b = 0; b < spec.Wl; ++b) {
    auto& v = values[b];
    if (v.empty()) throw std::invalid_argument("ReflectanceBinner: no kept pixels to fit bins on");
    std::sort(v.begin(), v.end());
    if (mode == Binning::kPerBandEqualWidth) {
      binner.lo_[b] = v.front();
      binner.hi_[b] = v.back() > v.front() ? v.back() : v.front() + 1.0;
    } else {
      binner.edges_.resize(spec.Wl);
      for (std::size_t q = 1; q < spec.R; ++q) binner.edges_[b].push_back(v[q * v.size() / spec.R]);
    }
  }
  return binner;
}

std::uint32_t ReflectanceBinner::bin(std::size_t band, double reflectance) const {
  if (!edges_.empty()) {
    const auto& e = edges_.at(band);
    return static_cast<std::uint32_t>(std::upper_bound(e.begin(), e.end(), reflectance) - e.begin());
  }
  const double pos = std::floor((reflectance - lo_.at(band)) / (hi_[band] - lo_[band]) * static_cast<double>(R_));
  if (!(pos > 0.0)) return 0;
  return static_cast<std::uint32_t>(std::min(pos, static_cast<double>(R_ - 1)));
}

HyperCube normalize_reflectance(const HyperCube& cube, std::span<const double> white_reference) {
  if (white_reference.size() != cube.num_bands()) {
    throw std::invalid_argument("normalize_reflectance: reference has " + std::to_string(white_reference.size()) +
                                " values for " + std::to_string(cube.num_bands()) + " bands");
  }
  for (double r : white_reference) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("normalize_reflectance: reference must be positive");
  }
  HyperCube out = cube;
  const std::size_t B = cube.num_bands();
  for (std::size_t i = 0; i < out.reflectance.size(); ++i) out.reflectance[i] /= white_reference[i % B];
  return out;
}

HyperCube crop_bands(const HyperCube& cube, double lo_nm, double hi_nm) {
  if (!(lo_nm < hi_nm)) throw std::invalid_argument("crop_bands: need lo < hi");
  std::vector<std::size_t> keep;
  for (std::size_t b = 0; b < cube.num_bands(); ++b) {
    if (cube.bands[b] >= lo_nm && cube.bands[b] <= hi_nm) keep.push_back(b);
  }
  if (keep.empty()) throw std::invalid_argument("crop_bands: no band inside the requested range");
  std::vector<double> wl;
  for (auto b : keep) wl.push_back(cube.bands[b]);
  HyperCube out(cube.height, cube.width, std::move(wl));
  for (std::size_t y = 0; y < cube.height; ++y) {
    for (std::size_t x = 0; x < cube.width; ++x) {
      auto src = cube.pixel(y, x);
      auto dst = out.pixel(y, x);
      for (std::size_t i = 0; i < keep.size(); ++i) dst[i] = src[keep[i]];
    }
  }
  return out;
}

HyperCube aggregate_blocks(const HyperCube& cube, std::size_t block) {
  if (block == 0) throw std::invalid_argument("aggregate_blocks: block must be >= 1");
  HyperCube out(cube.height / block, cube.width / block, cube.bands);
  const std::size_t B = cube.num_bands();
  const double inv = 1.0 / static_cast<double>(block * block);
  for (std::size_t ty = 0; ty < out.height; ++ty) {
    for (std::size_t tx = 0; tx < out.width; ++tx) {
      auto dst = out.pixel(ty, tx);
      for (std::size_t y = ty * block; y < (ty + 1) * block; ++y) {
        for (std::size_t x = tx * block; x < (tx + 1) * block; ++x) {
          auto src = cube.pixel(y, x);
          for (std::size_t b = 0; b < B; ++b) dst[b] += src[b];
        }
      }
      for (double& v : dst) v *= inv;
    }
  }
  return out;
}

PixelMask aggregate_mask(const PixelMask& mask, std::size_t block) {
  if (block == 0) throw std::invalid_argument("aggregate_mask: block must be >= 1");
  PixelMask out{mask.height / block, mask.width / block, {}};
  out.keep.assign(out.height * out.width, 1);
  for (std::size_t ty = 0; ty < out.height; ++ty) {
    for (std::size_t tx = 0; tx < out.width; ++tx) {
      for (std::size_t y = ty * block; y < (ty + 1) * block; ++y) {
        for (std::size_t x = tx * block; x < (tx + 1) * block; ++x) {
          if (!mask.kept(y, x)) out.keep[ty * out.width + tx] = 0;
        }
      }
    }
  }
  return out;
}

Vocabulary spectral_vocabulary(const SpectralWordSpec& spec, std::span<const double> wavelengths) {
  if (wavelengths.size() != spec.Wl) throw std::invalid_argument("spectral_vocabulary: band count differs from spec");
  std::vector<std::string> terms;
  terms.reserve(spec.vocab_size());
  for (std::size_t b = 0; b < spec.Wl; ++b) {
    std::ostringstream nm;
    nm << wavelengths[b];
    for (std::size_t r = 0; r < spec.R; ++r) terms.push_back(nm.str() + "nm:r" + std::to_string(r));
  }
  return Vocabulary(std::move(terms));
}

Corpus discretize(const HyperCube& cube, const SpectralWordSpec& spec, const PixelMask& mask) {
  return discretize(cube, spec, mask, ReflectanceBinner(spec));
}

Corpus discretize(const HyperCube& cube, const SpectralWordSpec& spec, const PixelMask& mask,
                  const ReflectanceBinner& binner) {
  if (mask.height != cube.height || mask.width != cube.width || mask.keep.size() != cube.num_pixels()) {
    throw std::invalid_argument("discretize: mask is " + std::to_string(mask.height) + "x" +
                                std::to_string(mask.width) + " but cube is " + std::to_string(cube.height) + "x" +
                                std::to_string(cube.width));
  }
  if (cube.num_bands() != spec.Wl) {
    throw std::invalid_argument("discretize: cube has " + std::to_string(cube.num_bands()) +
                                " bands but spec expects " + std::to_string(spec.Wl));
  }
  std::vector<SparseDocument> docs;
  for (std::size_t y = 0; y < cube.height; ++y) {
    for (std::size_t x = 0; x < cube.width; ++x) {
      if (!mask.kept(y, x)) continue;
      auto px = cube.pixel(y, x);
      std::vector<WordCount> words(spec.Wl);
      for (std::size_t b = 0; b < spec.Wl; ++b) words[b] = {spec.word_id(b, binner.bin(b, px[b])), 1};
      docs.emplace_back(std::move(words));
    }
  }
  return Corpus(std::move(docs), spectral_vocabulary(spec, cube.bands));
}

CooccurrenceCounts spectral_cooccurrences(const Corpus& signatures, const SpectralWordSpec& spec,
                                          SpectralWindow window) {
  if (signatures.vocab_size() != spec.vocab_size()) {
    throw std::invalid_argument("spectral_cooccurrences: vocabulary size differs from Wl * R");
  }
  CooccurrenceAccumulator acc(spec.vocab_size());
  for (const auto& doc : signatures.docs()) {
    auto e = doc.entries();
    for (std::size_t p = 0; p < e.size(); ++p) {
      if (p > 0 && e[p].id / spec.R == e[p - 1].id / spec.R) {
        throw std::invalid_argument("spectral_cooccurrences: signature holds two words for one band");
      }
    }
    for (std::size_t p = 1; p < e.size(); ++p) {
      const auto band_a = e[p - 1].id / spec.R, band_b = e[p].id / spec.R;
      if (band_b != band_a + 1) continue;
      const long bin_a = e[p - 1].id % spec.R, bin_b = e[p].id % spec.R;
      if (window.require_adjacent_bins && std::abs(bin_a - bin_b) > 1) continue;
      acc.add_event(e[p - 1].id, e[p].id, std::uint64_t{e[p - 1].count} * e[p].count);
    }
  }
  return acc.finish();
}

namespace {

template <typename T>
T from_le(const char* bytes) {
  T v;
  std::memcpy(&v, bytes, sizeof v);
  if constexpr (std::endian::native == std::endian::big) {
    auto* p = reinterpret_cast<unsigned char*>(&v);
    std::reverse(p, p + sizeof v);
  }
  return v;
}

template <typename T>
void put_le(std::ostream& out, T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto* p = reinterpret_cast<unsigned char*>(&v);
    std::reverse(p, p + sizeof v);
  }
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get_le(std::istream& in, const char* what) {
  char buf[sizeof(T)];
  if (!in.read(buf, sizeof buf)) throw ParseError(std::string("cube file truncated in ") + what, 0);
  return from_le<T>(buf);
}

}  // namespace

HyperCube read_cube(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "HSC1", 4) != 0) throw ParseError("cube file: bad magic", 0);
  const auto h = get_le<std::uint32_t>(in, "header");
  const auto w = get_le<std::uint32_t>(in, "header");
  const auto b = get_le<std::uint32_t>(in, "header");
  std::vector<double> wl(b);
  for (auto& v : wl) v = get_le<double>(in, "wavelengths");
  HyperCube cube(h, w, std::move(wl));
  for (auto& r : cube.reflectance) r = get_le<float>(in, "reflectances");
  cube.validate();
  return cube;
}

HyperCube load_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cube file " + path.string());
  return read_cube(in);
}

void write_cube(std::ostream& out, const HyperCube& cube) {
  out.write("HSC1", 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cube.height));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cube.width));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cube.num_bands()));
  for (double v : cube.bands) put_le<double>(out, v);
  for (double r : cube.reflectance) put_le<float>(out, static_cast<float>(r));
}

void save_cube(const HyperCube& cube, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write cube file " + path.string());
  write_cube(out, cube);
}

PixelMask read_mask(std::istream& in) {
  std::string token;
  auto next_token = [&]() {
    token.clear();
    char c;
    while (in.get(c)) {
      if (c == '#') {
        std::string skip;
        std::getline(in, skip);
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        if (!token.empty()) return true;
        continue;
      }
      token += c;
    }
    return !token.empty();
  };
  if (!next_token() || token != "P1") throw ParseError("mask file: expected P1 header", 0);
  PixelMask mask;
  if (!next_token()) throw ParseError("mask file: missing width", 0);
  mask.width = std::stoul(token);
  if (!next_token()) throw ParseError("mask file: missing height", 0);
  mask.height = std::stoul(token);
  mask.keep.reserve(mask.width * mask.height);
  char c;
  while (mask.keep.size() < mask.width * mask.height && in.get(c)) {
    if (c == '0' || c == '1') {
      mask.keep.push_back(c == '1');
    } else if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      throw ParseError(std::string("mask file: unexpected character '") + c + "'", 0);
    }
  }
  if (mask.keep.size() != mask.width * mask.height) throw ParseError("mask file: too few pixels", 0);
  return mask;
}

PixelMask load_mask(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mask file " + path.string());
  return read_mask(in);
}

void write_mask(std::ostream& out, const PixelMask& mask) {
  out << "P1\n" << mask.width << ' ' << mask.height << '\n';
  for (std::size_t y = 0; y < mask.height; ++y) {
    for (std::size_t x = 0; x < mask.width; ++x) out << (x ? " " : "") << (mask.kept(y, x) ? '1' : '0');
    out << '\n';
  }
}

std::vector<double> load_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file " + path.string());
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) throw ParseError("expected a number", lineno);
    values.push_back(v);
  }
  return values;
}

}  // namespace regvb
