#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "ghs/error.hpp"
#include "ghs/raster/grid.hpp"

namespace ghs::sampling {

inline constexpr float kLabelNodata = 255.0f;

/// One candidate training layer: 1 = built-up, 0 = not, nodata = unknown.
/// Priority 1 is the most trusted source.
struct LabelSource {
  raster::RasterGrid raster;
  int priority = 1;
  std::string name;
};

/// Per pixel, takes the value of the highest-priority source that has data
/// there. Output is u8 with nodata 255.
inline raster::RasterGrid composite_labels(const std::vector<LabelSource>& sources) {
  if (sources.empty()) throw ShapeError("composite_labels needs at least one source");
  std::vector<const LabelSource*> order;
  for (const auto& s : sources) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](auto* a, auto* b) { return a->priority < b->priority; });

  const auto& first = order.front()->raster;
  for (const auto* s : order) {
    if (s->raster.width != first.width || s->raster.height != first.height ||
        s->raster.bands != 1) {
      throw ShapeError("label source '" + s->name + "' is not a single-band " +
                       std::to_string(first.width) + "x" + std::to_string(first.height) + " grid");
    }
  }
  auto out = first.like(first.width, first.height, 1, raster::DType::u8);
  out.nodata = kLabelNodata;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    float v = kLabelNodata;
    for (const auto* s : order) {
      const float x = s->raster.data[i];
      if (!s->raster.is_nodata(x)) {
        v = x;
        break;
      }
    }
    if (v != kLabelNodata && v != 0.0f && v != 1.0f) {
      throw ShapeError("label value " + std::to_string(v) + " is not 0, 1 or nodata");
    }
    out.data[i] = v;
  }
  return out;
}

}  // namespace ghs::sampling
