#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "rowpip/geo_raster.hpp"

namespace rowpip {

enum class RowOrientation { horizontal, vertical };

struct TileSpec {
    int tile_width = 3000;
    int tile_height = 2000;

    void validate() const {
        if (tile_width < 1 || tile_height < 1) {
            throw ConfigError("tiling: tile dimensions must be >= 1");
        }
    }
};

// One tile of the mask grid, scanned left-to-right then top-to-bottom.
struct TileView {
    int index_col = 0;  // tile grid column
    int index_row = 0;  // tile grid row
    int x0 = 0;         // pixel offset of the tile in the full raster
    int y0 = 0;
    int width = 0;      // edge tiles are partial, never padded
    int height = 0;
};

std::vector<TileView> tile_grid(const BinaryMask& mask, const TileSpec& spec);

// Per-scanline sums across one tile. For horizontal rows values[y] sums the
// tile's row y; for vertical rows values[x] sums column x.
struct RowProfile {
    std::vector<std::uint32_t> values;
    RowOrientation orientation = RowOrientation::horizontal;
};

RowProfile projection_profile(const BinaryMask& mask, const TileView& tile,
                              RowOrientation orientation);

struct PeakParams {
    // Nominal distance between crop rows on the ground; yields the default
    // peak suppression distance of half a row spacing.
    double row_spacing_m = 0.762;
    // 0 = derive as round(0.5 * row_spacing_m / pixel_size); 1 disables
    // suppression entirely (lets a curved row produce double peaks).
    int min_distance_px = 0;
    double min_height_frac = 0.10;  // of the tile profile maximum
    std::uint32_t min_height_abs = 1;
    int line_half_width_px = 3;

    void validate() const {
        if (min_distance_px < 0) throw ConfigError("peaks: min_distance_px must be >= 0");
        if (min_height_frac < 0.0 || min_height_frac > 1.0) {
            throw ConfigError("peaks: min_height_frac must lie in [0, 1]");
        }
        if (line_half_width_px < 0) throw ConfigError("peaks: line_half_width_px must be >= 0");
        if (!(row_spacing_m > 0.0)) throw ConfigError("peaks: row_spacing_m must be > 0");
    }

    int resolved_min_distance(double cross_row_pixel_size_m) const {
        if (min_distance_px > 0) return min_distance_px;
        int d = static_cast<int>(std::lround(0.5 * row_spacing_m / cross_row_pixel_size_m));
        return d < 1 ? 1 : d;
    }
};

// Strict local maxima of the profile (a plateau counts once, at the floor of
// its midpoint; boundary samples have no outer neighbor and never qualify),
// kept if value >= max(min_height_abs, min_height_frac * profile max), then
// greedily thinned highest-first so survivors are >= min_distance apart.
// Ties break toward the lower index. Result is sorted ascending.
std::vector<int> find_peaks(const RowProfile& profile, const PeakParams& params,
                            int min_distance_px);

// One detected corn-row line segment, spanning its tile along the row axis.
struct RowSegment {
    int tile_col_index = 0;
    int tile_row_index = 0;
    int peak_px = 0;                      // cross-row pixel coordinate, full-raster frame
    std::pair<int, int> span_px{0, 0};    // [start, end) along the row axis, full-raster frame
    std::pair<double, double> world_a{0, 0};  // world endpoints at the centers of the
    std::pair<double, double> world_b{0, 0};  // first and last covered pixels
};

struct RowDetectionResult {
    std::vector<RowSegment> segments;
    BinaryMask line_mask;  // same grid as the input; 1 under every drawn line band
};

// Stamps a +-line_half_width_px band around each peak (clipped to the tile)
// and builds the per-peak segments. `line_mask` rows are OR-written so
// overlapping bands union cleanly.
void draw_segments(const std::vector<int>& peaks, const TileView& tile,
                   RowOrientation orientation, const PeakParams& params,
                   const GeoTransform& transform, BinaryMask& line_mask,
                   std::vector<RowSegment>& segments);

// The full detector: tile -> profile -> peaks -> stamped lines. Tiles are
// independent work units; `threads` <= 0 picks a default (see parallel.hpp).
// Output is deterministic regardless of schedule: segments are ordered by
// tile index, and tile writes into line_mask never overlap.
RowDetectionResult detect_rows(const BinaryMask& mask, const TileSpec& spec,
                               const PeakParams& params, RowOrientation orientation,
                               int threads = 0);

}  // namespace rowpip
