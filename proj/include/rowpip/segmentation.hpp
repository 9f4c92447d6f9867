#pragma once

#include "rowpip/geo_raster.hpp"

namespace rowpip {

struct SegmentationConfig {
    // Vegetation iff ExGI is strictly greater than this. 0.08 fits early-season
    // imagery; 0.07 worked better on post-harvest scenes.
    double threshold = 0.08;
    // ExGI assigned where R+G+B == 0 (pure black / nodata background).
    double zero_sum_value = 0.0;

    void validate() const {
        if (!(threshold > -2.0 && threshold < 2.0)) {
            throw ConfigError("segmentation: threshold must lie in (-2, 2)");
        }
    }
};

// Excess green index of one pixel, computed on band-sum-normalized reals:
// 2g - r - b with r+g+b = 1. Range is [-1, 2].
inline double exgi_value(double r, double g, double b, double zero_sum_value = 0.0) {
    const double s = r + g + b;
    if (s == 0.0) return zero_sum_value;
    return (2.0 * g - r - b) / s;
}

// Per-pixel ExGI of a 3-band 8-bit raster; output shares the input transform.
ValueRaster exgi(const GeoRaster& rgb, const SegmentationConfig& cfg = {});

// Threshold binarization: 1 iff value > threshold. A NaN sample is a data
// error naming its (row,col).
BinaryMask binarize(const ValueRaster& e, const SegmentationConfig& cfg = {});

}  // namespace rowpip
