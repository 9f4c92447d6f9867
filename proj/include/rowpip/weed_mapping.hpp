#pragma once

#include <string>
#include <vector>

#include "rowpip/geojson.hpp"
#include "rowpip/geo_raster.hpp"
#include "rowpip/row_detection.hpp"

namespace rowpip {

struct BufferConfig {
    double half_width_m = 0.0889;  // 3.5 in on each side of the row line

    void validate() const {
        if (!(half_width_m > 0.0)) throw ConfigError("buffer: half_width_m must be > 0");
    }
};

enum class TriggerRule { any_overlap, fully_within };

struct GridConfig {
    double cell_width_m = 0.509;   // nozzle spacing, 1.67 ft
    double cell_length_m = 3.048;  // 10 ft along travel
    double spray_rate = 15.0;      // gal/ac
    double no_spray_rate = 0.0;
    TriggerRule trigger_rule = TriggerRule::any_overlap;

    void validate() const {
        if (!(cell_width_m > 0.0) || !(cell_length_m > 0.0)) {
            throw ConfigError("grid: cell dimensions must be > 0");
        }
        if (!(spray_rate > no_spray_rate) || no_spray_rate < 0.0) {
            throw ConfigError("grid: require spray_rate > no_spray_rate >= 0");
        }
    }
};

struct RxCell {
    int i = 0;  // column index (along cell_width_m / world X)
    int j = 0;  // row index (along cell_length_m / world Y)
    Rect rect;  // clipped at the plot boundary
    double rate = 0.0;
};

struct PrescriptionMap {
    std::string plot_id;
    std::vector<RxCell> cells;
};

struct WeedComponent {
    int label = 0;
    std::vector<std::pair<int, int>> pixels;  // (row, col), row-major discovery order
    int min_row = 0, min_col = 0, max_row = 0, max_col = 0;
    double area_m2 = 0.0;
};

// Dilates each detected segment's peak scanline to round(half_width_m /
// pixel_size) pixels per side across the segment span. This replaces the
// stamped +-3 px drawing band; a computed half-width below one pixel is a
// configuration error. Bands are clipped at raster edges.
BinaryMask buffer_rows(const std::vector<RowSegment>& segments, RowOrientation orientation,
                       int width, int height, const GeoTransform& transform,
                       const BufferConfig& cfg);

inline BinaryMask buffer_rows(const RowDetectionResult& rows, RowOrientation orientation,
                              const BufferConfig& cfg) {
    return buffer_rows(rows.segments, orientation, rows.line_mask.width(),
                       rows.line_mask.height(), rows.line_mask.transform(), cfg);
}

// out = veg AND NOT row_buffer, per pixel. Grids must match.
BinaryMask weed_mask(const BinaryMask& veg, const BinaryMask& row_buffer);

// 8-connected labeling; components come back sorted by their first pixel in
// row-major order, so the labeling is schedule-independent.
std::vector<WeedComponent> connected_components(const BinaryMask& m);

// Cells anchored at the plot's minimum corner, stepping +X by cell_width_m
// and +Y by cell_length_m; the final row/column is clipped to the plot.
std::vector<RxCell> build_grid(const Rect& plot, const GridConfig& cfg);

// Pixel membership uses the pixel-center point; a center exactly on a shared
// cell edge belongs to the cell with the larger index.
// any_overlap: a cell sprays iff at least one weed pixel center lies in it.
// fully_within: a cell sprays iff some component has ALL its pixel centers in
// that one cell; note the deliberate flaw that a weed straddling a cell edge
// triggers nothing.
PrescriptionMap assign_rates(std::vector<RxCell> cells, const BinaryMask& weeds,
                             const std::vector<WeedComponent>& components,
                             const GridConfig& cfg, const std::string& plot_id = {});

double no_spray_area(const PrescriptionMap& rx);
double spray_area(const PrescriptionMap& rx);

// GeoJSON round-trip for prescription maps: one rectangle feature per cell
// with properties {"rate","i","j","plot"}.
std::vector<GeoFeature> prescription_features(const PrescriptionMap& rx);
std::vector<PrescriptionMap> prescriptions_from_features(const std::vector<GeoFeature>& features);

}  // namespace rowpip
