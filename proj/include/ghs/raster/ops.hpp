#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/nn/tensor.hpp"
#include "ghs/raster/grid.hpp"

namespace ghs::raster {

struct RescaledGrid {
  RasterGrid grid;  // f32, values in [0,1], nodata cells hold 0
  ValidityMask valid;
};

/// value / divisor clamped to [0,1]. Nodata pixels become 0 in every band
/// and are flagged invalid in the mask.
inline RescaledGrid rescale_reflectance(const RasterGrid& in, double divisor) {
  if (!(divisor > 0.0)) {
    throw ConfigError("rescale divisor must be positive, got " + std::to_string(divisor));
  }
  RescaledGrid out{in.like(in.width, in.height, in.bands, DType::f32), validity_of(in)};
  out.grid.nodata = 0.0;
  for (std::size_t b = 0; b < in.bands; ++b)
    for (std::size_t r = 0; r < in.height; ++r)
      for (std::size_t c = 0; c < in.width; ++c) {
        float v = 0.0f;
        if (out.valid(r, c)) {
          v = static_cast<float>(std::clamp(static_cast<double>(in.at(b, r, c)) / divisor, 0.0, 1.0));
        }
        out.grid.at(b, r, c) = v;
      }
  return out;
}

/// Grows the grid by `margin` on every side; the border is filled with
/// `value` and the origin shifts so that georeference is preserved.
inline RasterGrid pad_constant(const RasterGrid& in, std::size_t margin, float value) {
  RasterGrid out = in.like(in.width + 2 * margin, in.height + 2 * margin, in.bands, in.dtype);
  out.origin_x = in.origin_x - static_cast<double>(margin) * in.pixel_size;
  out.origin_y = in.origin_y + static_cast<double>(margin) * in.pixel_size;
  std::fill(out.data.begin(), out.data.end(), value);
  for (std::size_t b = 0; b < in.bands; ++b)
    for (std::size_t r = 0; r < in.height; ++r)
      std::copy_n(&in.data[in.index(b, r, 0)], in.width, &out.data[out.index(b, r + margin, margin)]);
  return out;
}

struct Patch {
  std::size_t row = 0;  // center, in unpadded coordinates
  std::size_t col = 0;
  nn::Tensor3<float> values;  // size×size×bands
};

/// Sliding size×size window over a grid already padded by size/2 on every
/// side. Yields one patch per original pixel in row-major center order.
class PatchStream {
 public:
  PatchStream(const RasterGrid& padded, std::size_t size = 5) : grid_(padded), size_(size) {
    if (size_ % 2 == 0 || size_ == 0) throw ShapeError("patch size must be odd");
    const std::size_t need = size_ - 1;
    if (padded.height < size_ || padded.width < size_) {
      throw ShapeError("grid " + std::to_string(padded.height) + "x" +
                       std::to_string(padded.width) + " too small for " +
                       std::to_string(size_) + "x" + std::to_string(size_) + " patches");
    }
    rows_ = padded.height - need;
    cols_ = padded.width - need;
  }

  std::size_t count() const { return rows_ * cols_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::optional<Patch> next() {
    if (pos_ >= count()) return std::nullopt;
    Patch p = at(pos_ / cols_, pos_ % cols_);
    ++pos_;
    return p;
  }

  Patch at(std::size_t row, std::size_t col) const {
    Patch p{row, col, nn::Tensor3<float>(size_, size_, grid_.bands)};
    for (std::size_t i = 0; i < size_; ++i)
      for (std::size_t j = 0; j < size_; ++j)
        for (std::size_t b = 0; b < grid_.bands; ++b) p.values(i, j, b) = grid_.at(b, row + i, col + j);
    return p;
  }

 private:
  const RasterGrid& grid_;
  std::size_t size_;
  std::size_t rows_ = 0, cols_ = 0, pos_ = 0;
};

inline std::vector<Patch> iter_patches(const RasterGrid& padded, std::size_t size = 5) {
  PatchStream s(padded, size);
  std::vector<Patch> out;
  out.reserve(s.count());
  while (auto p = s.next()) out.push_back(std::move(*p));
  return out;
}

/// round(p·100) for valid cells, 255 for nodata.
inline RasterGrid quantize_probability(const RasterGrid& prob, const ValidityMask& valid) {
  if (prob.bands != 1 || valid.width != prob.width || valid.height != prob.height) {
    throw ShapeError("quantize_probability expects a single-band grid matching its mask");
  }
  RasterGrid out = prob.like(prob.width, prob.height, 1, DType::u8);
  out.nodata = 255.0;
  for (std::size_t r = 0; r < prob.height; ++r)
    for (std::size_t c = 0; c < prob.width; ++c) {
      if (!valid(r, c)) {
        out.at(0, r, c) = 255.0f;
        continue;
      }
      const float p = prob.at(0, r, c);
      if (!(p >= 0.0f && p <= 1.0f)) {
        throw NumericError("probability " + std::to_string(p) + " outside [0,1] at row " +
                           std::to_string(r) + ", col " + std::to_string(c));
      }
      out.at(0, r, c) = static_cast<float>(std::lround(static_cast<double>(p) * 100.0));
    }
  return out;
}

/// Inverse of quantize_probability: value/100 and a validity mask.
inline std::pair<RasterGrid, ValidityMask> dequantize_probability(const RasterGrid& q) {
  RasterGrid out = q.like(q.width, q.height, 1, DType::f32);
  out.nodata = -1.0;
  ValidityMask m(q.width, q.height);
  for (std::size_t r = 0; r < q.height; ++r)
    for (std::size_t c = 0; c < q.width; ++c) {
      const float v = q.at(0, r, c);
      const bool ok = v != 255.0f;
      m.set(r, c, ok);
      out.at(0, r, c) = ok ? v / 100.0f : -1.0f;
    }
  return {out, m};
}

}  // namespace ghs::raster
