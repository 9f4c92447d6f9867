#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "rowpip/error.hpp"

namespace rowpip {

// North-up affine georeferencing. (origin_x, origin_y) is the world position
// of the raster's top-left corner; world Y decreases as the row index grows.
// Pixel coordinates address pixel CENTERS: (col,row)=(0,0) maps to the center
// of the top-left pixel, half a pixel in and down from the origin corner.
struct GeoTransform {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double pixel_size_x = 1.0;  // meters per pixel, eastward
    double pixel_size_y = 1.0;  // meters per pixel, applied southward
    std::string crs_label;

    void validate() const {
        if (!(pixel_size_x > 0.0) || !std::isfinite(pixel_size_x) ||
            !(pixel_size_y > 0.0) || !std::isfinite(pixel_size_y)) {
            throw DataError("geotransform: pixel sizes must be finite and > 0");
        }
    }
};

inline std::pair<double, double> pixel_to_world(const GeoTransform& t, double col, double row) {
    return {t.origin_x + (col + 0.5) * t.pixel_size_x,
            t.origin_y - (row + 0.5) * t.pixel_size_y};
}

inline std::pair<double, double> world_to_pixel(const GeoTransform& t, double x, double y) {
    return {(x - t.origin_x) / t.pixel_size_x - 0.5,
            (t.origin_y - y) / t.pixel_size_y - 0.5};
}

}  // namespace rowpip
