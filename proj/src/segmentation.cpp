#include "rowpip/segmentation.hpp"

#include <cmath>
#include <string>

namespace rowpip {

ValueRaster exgi(const GeoRaster& rgb, const SegmentationConfig& cfg) {
    cfg.validate();
    if (rgb.bands() != 3) {
        throw DataError("excess green index needs a 3-band raster, got " +
                        std::to_string(rgb.bands()) + " band(s)");
    }
    ValueRaster out(rgb.width(), rgb.height(), rgb.transform());
    for (int y = 0; y < rgb.height(); ++y) {
        const std::uint8_t* src = rgb.row_ptr(y);
        double* dst = out.row_ptr(y);
        for (int x = 0; x < rgb.width(); ++x) {
            dst[x] = exgi_value(src[3 * x], src[3 * x + 1], src[3 * x + 2],
                                cfg.zero_sum_value);
        }
    }
    return out;
}

BinaryMask binarize(const ValueRaster& e, const SegmentationConfig& cfg) {
    cfg.validate();
    BinaryMask out(e.width(), e.height(), 1, e.transform());
    for (int y = 0; y < e.height(); ++y) {
        const double* src = e.row_ptr(y);
        std::uint8_t* dst = out.row_ptr(y);
        for (int x = 0; x < e.width(); ++x) {
            const double v = src[x];
            if (std::isnan(v)) {
                throw DataError("index raster has NaN at row " + std::to_string(y) +
                                ", col " + std::to_string(x));
            }
            dst[x] = v > cfg.threshold ? 1 : 0;
        }
    }
    return out;
}

}  // namespace rowpip
