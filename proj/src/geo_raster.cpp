#include "rowpip/geo_raster.hpp"

namespace rowpip {

BinaryMask to_binary_mask(const GeoRaster& r) {
    if (r.bands() != 1) throw DataError("binary mask: input must have 1 band");
    BinaryMask out(r.width(), r.height(), 1, r.transform());
    const std::uint8_t* src = r.data();
    std::uint8_t* dst = out.data();
    const std::size_t n = r.sample_count();
    if (r.nodata()) {
        const std::uint8_t nd = *r.nodata();
        for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] != 0 && src[i] != nd) ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] != 0 ? 1 : 0;
    }
    return out;
}

void validate_binary_mask(const BinaryMask& m) {
    if (m.bands() != 1) throw DataError("binary mask: must have 1 band");
    const std::uint8_t* p = m.data();
    const std::size_t n = m.sample_count();
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] > 1) {
            throw DataError("binary mask: sample " + std::to_string(p[i]) +
                            " at flat index " + std::to_string(i) + " is not 0 or 1");
        }
    }
}

double mask_area(const BinaryMask& m) {
    if (m.bands() != 1) throw DataError("mask_area: mask must have 1 band");
    const std::uint8_t* p = m.data();
    const std::size_t n = m.sample_count();
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += p[i] != 0;
    return static_cast<double>(count) * m.transform().pixel_size_x * m.transform().pixel_size_y;
}

}  // namespace rowpip
