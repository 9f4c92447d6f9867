#include "rowpip/row_detection.hpp"

#include <algorithm>
#include <cstring>

#include "rowpip/parallel.hpp"

namespace rowpip {

std::vector<TileView> tile_grid(const BinaryMask& mask, const TileSpec& spec) {
    spec.validate();
    std::vector<TileView> tiles;
    const int across = (mask.width() + spec.tile_width - 1) / spec.tile_width;
    const int down = (mask.height() + spec.tile_height - 1) / spec.tile_height;
    tiles.reserve(static_cast<std::size_t>(across) * down);
    for (int tr = 0; tr < down; ++tr) {
        for (int tc = 0; tc < across; ++tc) {
            TileView t;
            t.index_col = tc;
            t.index_row = tr;
            t.x0 = tc * spec.tile_width;
            t.y0 = tr * spec.tile_height;
            t.width = std::min(spec.tile_width, mask.width() - t.x0);
            t.height = std::min(spec.tile_height, mask.height() - t.y0);
            tiles.push_back(t);
        }
    }
    return tiles;
}

RowProfile projection_profile(const BinaryMask& mask, const TileView& tile,
                              RowOrientation orientation) {
    RowProfile profile;
    profile.orientation = orientation;
    if (orientation == RowOrientation::horizontal) {
        profile.values.assign(static_cast<std::size_t>(tile.height), 0);
        for (int y = 0; y < tile.height; ++y) {
            const std::uint8_t* row = mask.row_ptr(tile.y0 + y) + tile.x0;
            std::uint32_t sum = 0;
            for (int x = 0; x < tile.width; ++x) sum += row[x];
            profile.values[static_cast<std::size_t>(y)] = sum;
        }
    } else {
        profile.values.assign(static_cast<std::size_t>(tile.width), 0);
        std::uint32_t* acc = profile.values.data();
        for (int y = 0; y < tile.height; ++y) {
            const std::uint8_t* row = mask.row_ptr(tile.y0 + y) + tile.x0;
            for (int x = 0; x < tile.width; ++x) acc[x] += row[x];
        }
    }
    return profile;
}

std::vector<int> find_peaks(const RowProfile& profile, const PeakParams& params,
                            int min_distance_px) {
    params.validate();
    if (min_distance_px < 1) {
        throw ConfigError("peaks: resolved min distance must be >= 1");
    }
    const auto& v = profile.values;
    const int n = static_cast<int>(v.size());
    if (n < 3) return {};

    // Strict local maxima; a plateau yields one peak at the floor of its
    // midpoint. The first and last samples have no outer neighbor and are
    // never peaks.
    std::vector<int> candidates;
    int i = 1;
    while (i < n - 1) {
        if (v[i] > v[i - 1]) {
            int ahead = i + 1;
            while (ahead < n - 1 && v[ahead] == v[i]) ++ahead;
            if (v[ahead] < v[i]) {
                candidates.push_back((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
            i = ahead;
            continue;
        }
        ++i;
    }

    const std::uint32_t profile_max = *std::max_element(v.begin(), v.end());
    const double floor_height =
        std::max(static_cast<double>(params.min_height_abs),
                 params.min_height_frac * static_cast<double>(profile_max));
    candidates.erase(std::remove_if(candidates.begin(), candidates.end(),
                                    [&](int p) {
                                        return static_cast<double>(v[static_cast<std::size_t>(p)]) <
                                               floor_height;
                                    }),
                     candidates.end());

    // Greedy suppression: highest first (ties to the lower index), dropping
    // any candidate closer than min_distance_px to a kept peak.
    std::vector<std::size_t> order(candidates.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto va = v[static_cast<std::size_t>(candidates[a])];
        const auto vb = v[static_cast<std::size_t>(candidates[b])];
        if (va != vb) return va > vb;
        return candidates[a] < candidates[b];
    });
    std::vector<char> keep(candidates.size(), 1);
    for (std::size_t k : order) {
        if (!keep[k]) continue;
        // candidates are in ascending position; sweep both directions
        for (std::size_t j = k; j-- > 0;) {
            if (candidates[k] - candidates[j] >= min_distance_px) break;
            keep[j] = 0;
        }
        for (std::size_t j = k + 1; j < candidates.size(); ++j) {
            if (candidates[j] - candidates[k] >= min_distance_px) break;
            keep[j] = 0;
        }
    }
    std::vector<int> peaks;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (keep[k]) peaks.push_back(candidates[k]);
    }
    return peaks;
}

void draw_segments(const std::vector<int>& peaks, const TileView& tile,
                   RowOrientation orientation, const PeakParams& params,
                   const GeoTransform& transform, BinaryMask& line_mask,
                   std::vector<RowSegment>& segments) {
    const int h = params.line_half_width_px;
    for (int p : peaks) {
        RowSegment seg;
        seg.tile_col_index = tile.index_col;
        seg.tile_row_index = tile.index_row;
        if (orientation == RowOrientation::horizontal) {
            seg.peak_px = tile.y0 + p;
            seg.span_px = {tile.x0, tile.x0 + tile.width};
            seg.world_a = pixel_to_world(transform, tile.x0, seg.peak_px);
            seg.world_b = pixel_to_world(transform, tile.x0 + tile.width - 1, seg.peak_px);
            const int band_lo = std::max(0, p - h);
            const int band_hi = std::min(tile.height - 1, p + h);
            for (int yy = band_lo; yy <= band_hi; ++yy) {
                std::memset(line_mask.row_ptr(tile.y0 + yy) + tile.x0, 1,
                            static_cast<std::size_t>(tile.width));
            }
        } else {
            seg.peak_px = tile.x0 + p;
            seg.span_px = {tile.y0, tile.y0 + tile.height};
            seg.world_a = pixel_to_world(transform, seg.peak_px, tile.y0);
            seg.world_b = pixel_to_world(transform, seg.peak_px, tile.y0 + tile.height - 1);
            const int band_lo = std::max(0, p - h);
            const int band_hi = std::min(tile.width - 1, p + h);
            for (int yy = 0; yy < tile.height; ++yy) {
                std::memset(line_mask.row_ptr(tile.y0 + yy) + tile.x0 + band_lo, 1,
                            static_cast<std::size_t>(band_hi - band_lo + 1));
            }
        }
        segments.push_back(seg);
    }
}

RowDetectionResult detect_rows(const BinaryMask& mask, const TileSpec& spec,
                               const PeakParams& params, RowOrientation orientation,
                               int threads) {
    params.validate();
    const double cross_pixel = orientation == RowOrientation::horizontal
                                   ? mask.transform().pixel_size_y
                                   : mask.transform().pixel_size_x;
    const int min_distance = params.resolved_min_distance(cross_pixel);

    RowDetectionResult result;
    result.line_mask = BinaryMask(mask.width(), mask.height(), 1, mask.transform());

    const auto tiles = tile_grid(mask, spec);
    std::vector<std::vector<RowSegment>> per_tile(tiles.size());
    parallel_for(tiles.size(), threads, [&](std::size_t t) {
        const TileView& tile = tiles[t];
        const RowProfile profile = projection_profile(mask, tile, orientation);
        const std::vector<int> peaks = find_peaks(profile, params, min_distance);
        draw_segments(peaks, tile, orientation, params, mask.transform(),
                      result.line_mask, per_tile[t]);
    });
    for (auto& segs : per_tile) {
        result.segments.insert(result.segments.end(), segs.begin(), segs.end());
    }
    return result;
}

}  // namespace rowpip
