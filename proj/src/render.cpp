#include "rowpip/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rowpip/raster_io.hpp"

namespace rowpip {
namespace {

constexpr std::uint8_t kSoil[3] = {92, 64, 51};
constexpr std::uint8_t kVegetation[3] = {58, 160, 58};
constexpr std::uint8_t kWeed[3] = {200, 48, 40};
constexpr std::uint8_t kWhite[3] = {255, 255, 255};

void put_pixel(GeoRaster& img, int row, int col, const std::uint8_t rgb[3]) {
    if (row < 0 || row >= img.height() || col < 0 || col >= img.width()) return;
    std::uint8_t* p = img.row_ptr(row) + 3 * static_cast<std::size_t>(col);
    p[0] = rgb[0];
    p[1] = rgb[1];
    p[2] = rgb[2];
}

void fill_rect(GeoRaster& img, int row_lo, int row_hi, int col_lo, int col_hi,
               const std::uint8_t rgb[3]) {
    row_lo = std::max(row_lo, 0);
    col_lo = std::max(col_lo, 0);
    row_hi = std::min(row_hi, img.height());
    col_hi = std::min(col_hi, img.width());
    for (int r = row_lo; r < row_hi; ++r) {
        std::uint8_t* p = img.row_ptr(r) + 3 * static_cast<std::size_t>(col_lo);
        for (int c = col_lo; c < col_hi; ++c) {
            *p++ = rgb[0];
            *p++ = rgb[1];
            *p++ = rgb[2];
        }
    }
}

}  // namespace

void render_mask_png(const BinaryMask& mask, const std::string& path, bool weed_style) {
    if (mask.bands() != 1) throw DataError("render: expected a 1-band mask");
    GeoRaster img(mask.width(), mask.height(), 3, mask.transform());
    const std::uint8_t* on = weed_style ? kWeed : kVegetation;
    for (int y = 0; y < mask.height(); ++y) {
        const std::uint8_t* src = mask.row_ptr(y);
        std::uint8_t* dst = img.row_ptr(y);
        for (int x = 0; x < mask.width(); ++x) {
            const std::uint8_t* rgb = src[x] ? on : kSoil;
            dst[0] = rgb[0];
            dst[1] = rgb[1];
            dst[2] = rgb[2];
            dst += 3;
        }
    }
    write_png_image(img, path);
}

void render_prescription_png(const std::vector<PrescriptionMap>& maps, const std::string& path,
                             double pixels_per_meter) {
    if (!(pixels_per_meter > 0.0)) throw ConfigError("render: pixels_per_meter must be > 0");
    Rect bounds{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
    std::size_t cell_count = 0;
    for (const PrescriptionMap& map : maps) {
        for (const RxCell& c : map.cells) {
            bounds.min_x = std::min(bounds.min_x, c.rect.min_x);
            bounds.min_y = std::min(bounds.min_y, c.rect.min_y);
            bounds.max_x = std::max(bounds.max_x, c.rect.max_x);
            bounds.max_y = std::max(bounds.max_y, c.rect.max_y);
            ++cell_count;
        }
    }
    if (cell_count == 0) throw DataError("render: no prescription cells to draw");

    const int width =
        std::max(1, static_cast<int>(std::ceil(bounds.width() * pixels_per_meter - 1e-9)));
    const int height =
        std::max(1, static_cast<int>(std::ceil(bounds.height() * pixels_per_meter - 1e-9)));
    GeoTransform t;
    t.origin_x = bounds.min_x;
    t.origin_y = bounds.max_y;
    t.pixel_size_x = 1.0 / pixels_per_meter;
    t.pixel_size_y = 1.0 / pixels_per_meter;
    GeoRaster img(width, height, 3, t, 255);

    // Cell corners snap to shared pixel boundaries so neighboring cells
    // rasterize without seams, whatever the draw order.
    auto col_of = [&](double x) {
        return static_cast<int>(std::lround((x - bounds.min_x) * pixels_per_meter));
    };
    auto row_of = [&](double y) {
        return static_cast<int>(std::lround((bounds.max_y - y) * pixels_per_meter));
    };

    for (const PrescriptionMap& map : maps) {
        for (const RxCell& c : map.cells) {
            if (c.rate > 0.0) {
                fill_rect(img, row_of(c.rect.max_y), row_of(c.rect.min_y), col_of(c.rect.min_x),
                          col_of(c.rect.max_x), kVegetation);
            } else {
                fill_rect(img, row_of(c.rect.max_y), row_of(c.rect.min_y), col_of(c.rect.min_x),
                          col_of(c.rect.max_x), kWhite);
            }
        }
    }
    for (const PrescriptionMap& map : maps) {
        for (const RxCell& c : map.cells) {
            if (c.rate > 0.0) continue;
            const int r0 = row_of(c.rect.max_y);
            const int r1 = row_of(c.rect.min_y);
            const int c0 = col_of(c.rect.min_x);
            const int c1 = col_of(c.rect.max_x);
            for (int col = c0; col < c1; ++col) {
                put_pixel(img, r0, col, kWeed);
                put_pixel(img, r1 - 1, col, kWeed);
            }
            for (int row = r0; row < r1; ++row) {
                put_pixel(img, row, c0, kWeed);
                put_pixel(img, row, c1 - 1, kWeed);
            }
        }
    }
    write_png_image(img, path);
}

}  // namespace rowpip
