#include "rowpip/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace rowpip {

DetectionReport precision_accuracy(long long tp, long long tn, long long fp, long long fn) {
    if (tp < 0 || tn < 0 || fp < 0 || fn < 0) {
        throw DataError("detection metrics: negative counts");
    }
    DetectionReport rep;
    rep.tp = tp;
    rep.tn = tn;
    rep.fp = fp;
    rep.fn = fn;
    const long long pred_pos = tp + fp;
    const long long total = tp + fn + tn + fp;
    if (pred_pos == 0) {
        throw DataError("detection metrics: precision is undefined with no positive predictions");
    }
    if (total == 0) {
        throw DataError("detection metrics: accuracy is undefined with no observations");
    }
    rep.precision = static_cast<double>(tp) / static_cast<double>(pred_pos);
    rep.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    return rep;
}

namespace {

// Cross-axis position of a truth polyline at along-axis position `a`,
// linearly interpolated (clamped at the ends).
double cross_at(const RowPolyline& line, double a, bool horizontal) {
    auto along_of = [horizontal](const std::pair<double, double>& p) {
        return horizontal ? p.first : p.second;
    };
    auto cross_of = [horizontal](const std::pair<double, double>& p) {
        return horizontal ? p.second : p.first;
    };
    if (a <= along_of(line.front())) return cross_of(line.front());
    if (a >= along_of(line.back())) return cross_of(line.back());
    std::size_t lo = 0, hi = line.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (along_of(line[mid]) <= a) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double a0 = along_of(line[lo]);
    const double a1 = along_of(line[hi]);
    const double c0 = cross_of(line[lo]);
    const double c1 = cross_of(line[hi]);
    if (a1 == a0) return c0;
    return c0 + (c1 - c0) * (a - a0) / (a1 - a0);
}

struct TruthSpan {
    std::vector<double> cross;  // per along-pixel centerline position
};

}  // namespace

MatchCounts match_segments(const std::vector<RowSegment>& detected,
                           const std::vector<RowPolyline>& truth_rows,
                           int raster_width, int raster_height, const TileSpec& spec,
                           RowOrientation orientation, int tol_px) {
    spec.validate();
    if (tol_px < 0) throw ConfigError("matching: tol_px must be >= 0");
    const bool horizontal = orientation == RowOrientation::horizontal;
    const int along_extent = horizontal ? raster_width : raster_height;
    const int cross_extent = horizontal ? raster_height : raster_width;
    const int tile_along = horizontal ? spec.tile_width : spec.tile_height;
    const int tile_cross = horizontal ? spec.tile_height : spec.tile_width;
    const int tiles_along = (along_extent + tile_along - 1) / tile_along;
    const int tiles_cross = (cross_extent + tile_cross - 1) / tile_cross;

    // Slice every truth row into per-tile spans: the run of along-pixels
    // whose centerline point falls inside that tile.
    std::map<std::pair<int, int>, std::vector<TruthSpan>> spans;  // (tile_along, tile_cross)
    for (const RowPolyline& line : truth_rows) {
        if (line.size() < 2) throw DataError("matching: truth row needs >= 2 points");
        for (int ta = 0; ta < tiles_along; ++ta) {
            const int a_lo = ta * tile_along;
            const int a_hi = std::min(along_extent, a_lo + tile_along);
            std::map<int, TruthSpan> by_cross_tile;
            for (int a = a_lo; a < a_hi; ++a) {
                const double c = cross_at(line, a + 0.5, horizontal);
                const int tc = static_cast<int>(std::floor(c / tile_cross));
                if (tc < 0 || tc >= tiles_cross) continue;
                by_cross_tile[tc].cross.push_back(c);
            }
            for (auto& [tc, span] : by_cross_tile) {
                spans[{ta, tc}].push_back(std::move(span));
            }
        }
    }

    std::map<std::pair<int, int>, std::vector<int>> det_by_tile;  // segment cross positions
    for (const RowSegment& seg : detected) {
        const int ta = horizontal ? seg.tile_col_index : seg.tile_row_index;
        const int tc = horizontal ? seg.tile_row_index : seg.tile_col_index;
        det_by_tile[{ta, tc}].push_back(seg.peak_px);
    }

    MatchCounts counts;
    std::set<std::pair<int, int>> tiles;
    for (const auto& [key, _] : spans) tiles.insert(key);
    for (const auto& [key, _] : det_by_tile) tiles.insert(key);

    for (const auto& key : tiles) {
        const auto span_it = spans.find(key);
        const auto det_it = det_by_tile.find(key);
        const std::vector<TruthSpan>* tile_spans =
            span_it == spans.end() ? nullptr : &span_it->second;
        const std::vector<int>* tile_dets =
            det_it == det_by_tile.end() ? nullptr : &det_it->second;
        const std::size_t n_spans = tile_spans ? tile_spans->size() : 0;
        const std::size_t n_dets = tile_dets ? tile_dets->size() : 0;

        // Qualifying pairs: the peak tracks the centerline within tol_px over
        // at least half of the span. Pairs match greedily, closest mean
        // distance first, one segment per span.
        struct Pair {
            double mean_dist;
            std::size_t span, det;
        };
        std::vector<Pair> pairs;
        for (std::size_t s = 0; s < n_spans; ++s) {
            const std::vector<double>& cross = (*tile_spans)[s].cross;
            for (std::size_t d = 0; d < n_dets; ++d) {
                // Peak at pixel index p is the line through pixel centers, at
                // continuous cross coordinate p + 0.5.
                const double peak = (*tile_dets)[d] + 0.5;
                std::size_t close = 0;
                double dist_sum = 0.0;
                for (double c : cross) {
                    const double diff = std::abs(peak - c);
                    dist_sum += diff;
                    if (diff <= tol_px) ++close;
                }
                if (2 * close >= cross.size() && !cross.empty()) {
                    pairs.push_back({dist_sum / cross.size(), s, d});
                }
            }
        }
        std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
            if (a.mean_dist != b.mean_dist) return a.mean_dist < b.mean_dist;
            if (a.span != b.span) return a.span < b.span;
            return a.det < b.det;
        });
        std::vector<char> span_used(n_spans, 0), det_used(n_dets, 0);
        for (const Pair& pr : pairs) {
            if (span_used[pr.span] || det_used[pr.det]) continue;
            span_used[pr.span] = det_used[pr.det] = 1;
            ++counts.tp;
        }
        for (std::size_t s = 0; s < n_spans; ++s) counts.fn += !span_used[s];
        for (std::size_t d = 0; d < n_dets; ++d) counts.fp += !det_used[d];
    }
    return counts;
}

ApplicationReport application_accuracy(double expected_m2, double measured_m2) {
    if (!(expected_m2 > 0.0)) {
        throw DataError("application accuracy: expected no-spray area must be > 0");
    }
    ApplicationReport rep;
    rep.expected_no_spray_m2 = expected_m2;
    rep.measured_no_spray_m2 = measured_m2;
    rep.accuracy_pct = measured_m2 / expected_m2 * 100.0;
    rep.relative_error = (measured_m2 - expected_m2) / expected_m2;
    return rep;
}

ApplicationReport application_report(const std::vector<ApplicationRow>& rows) {
    if (rows.empty()) throw DataError("application accuracy: no plots given");
    double expected = 0.0, measured = 0.0;
    ApplicationReport rep;
    rep.per_plot = rows;
    for (ApplicationRow& row : rep.per_plot) {
        if (!(row.expected_no_spray_m2 > 0.0)) {
            throw DataError("application accuracy: plot \"" + row.plot_id +
                            "\" has zero expected no-spray area");
        }
        row.sprayed_pct = row.sprayed_in_no_spray_m2 / row.expected_no_spray_m2 * 100.0;
        expected += row.expected_no_spray_m2;
        measured += row.measured_no_spray_m2;
    }
    const ApplicationReport totals = application_accuracy(expected, measured);
    rep.expected_no_spray_m2 = totals.expected_no_spray_m2;
    rep.measured_no_spray_m2 = totals.measured_no_spray_m2;
    rep.accuracy_pct = totals.accuracy_pct;
    rep.relative_error = totals.relative_error;
    return rep;
}

AreaLossReport area_loss(const std::vector<PlotArea>& a, const std::vector<PlotArea>& b) {
    std::map<std::string, double> b_by_id;
    for (const PlotArea& pb : b) {
        if (!b_by_id.emplace(pb.plot_id, pb.no_spray_m2).second) {
            throw DataError("area loss: duplicate plot id \"" + pb.plot_id + "\"");
        }
    }
    std::set<std::string> a_ids;
    std::string only_a, only_b;
    for (const PlotArea& pa : a) {
        if (!a_ids.insert(pa.plot_id).second) {
            throw DataError("area loss: duplicate plot id \"" + pa.plot_id + "\"");
        }
        if (!b_by_id.count(pa.plot_id)) only_a += (only_a.empty() ? "" : ", ") + pa.plot_id;
    }
    for (const PlotArea& pb : b) {
        if (!a_ids.count(pb.plot_id)) only_b += (only_b.empty() ? "" : ", ") + pb.plot_id;
    }
    if (!only_a.empty() || !only_b.empty()) {
        std::string msg = "area loss: plot id sets differ";
        if (!only_a.empty()) msg += "; only in first: " + only_a;
        if (!only_b.empty()) msg += "; only in second: " + only_b;
        throw DataError(msg);
    }
    if (a.empty()) throw DataError("area loss: no plots given");

    AreaLossReport rep;
    double sum_a = 0.0, sum_b = 0.0;
    for (const PlotArea& pa : a) {
        AreaLossRow row;
        row.plot_id = pa.plot_id;
        row.a_m2 = pa.no_spray_m2;
        row.b_m2 = b_by_id[pa.plot_id];
        row.loss_m2 = row.a_m2 - row.b_m2;
        if (!(row.a_m2 > 0.0)) {
            throw DataError("area loss: plot \"" + row.plot_id + "\" has zero baseline area");
        }
        row.loss_pct = row.loss_m2 / row.a_m2 * 100.0;
        sum_a += row.a_m2;
        sum_b += row.b_m2;
        rep.per_plot.push_back(row);
    }
    rep.total.plot_id = "TOTAL";
    rep.total.a_m2 = sum_a;
    rep.total.b_m2 = sum_b;
    rep.total.loss_m2 = sum_a - sum_b;
    rep.total.loss_pct = (sum_a - sum_b) / sum_a * 100.0;
    return rep;
}

namespace {

double mask_area_in(const BinaryMask& m, const Rect& region) {
    const GeoTransform& t = m.transform();
    // Padded pixel window, then the exact center-in-rect test per pixel.
    int row_lo = static_cast<int>(std::floor((t.origin_y - region.max_y) / t.pixel_size_y)) - 1;
    int row_hi = static_cast<int>(std::ceil((t.origin_y - region.min_y) / t.pixel_size_y)) + 1;
    int col_lo = static_cast<int>(std::floor((region.min_x - t.origin_x) / t.pixel_size_x)) - 1;
    int col_hi = static_cast<int>(std::ceil((region.max_x - t.origin_x) / t.pixel_size_x)) + 1;
    row_lo = std::max(0, row_lo);
    col_lo = std::max(0, col_lo);
    row_hi = std::min(m.height(), row_hi);
    col_hi = std::min(m.width(), col_hi);
    long long count = 0;
    for (int row = row_lo; row < row_hi; ++row) {
        const double wy = t.origin_y - (row + 0.5) * t.pixel_size_y;
        if (wy < region.min_y || wy >= region.max_y) continue;
        const std::uint8_t* line = m.row_ptr(row);
        for (int col = col_lo; col < col_hi; ++col) {
            if (!line[col]) continue;
            const double wx = t.origin_x + (col + 0.5) * t.pixel_size_x;
            if (wx >= region.min_x && wx < region.max_x) ++count;
        }
    }
    return static_cast<double>(count) * t.pixel_size_x * t.pixel_size_y;
}

}  // namespace

EffectivenessReport effectiveness(const BinaryMask& weeds_post, const std::vector<PlotDef>& plots,
                                  const std::string& treatment_a,
                                  const std::string& treatment_b) {
    if (treatment_a == treatment_b) {
        throw ConfigError("effectiveness: the two treatments must differ");
    }
    EffectivenessReport rep;
    rep.treatment_a = treatment_a;
    rep.treatment_b = treatment_b;
    long long count_a = 0, count_b = 0;
    for (const PlotDef& plot : plots) {
        if (plot.treatment != treatment_a && plot.treatment != treatment_b) {
            throw DataError("effectiveness: plot \"" + plot.id + "\" has treatment \"" +
                            plot.treatment + "\", expected \"" + treatment_a + "\" or \"" +
                            treatment_b + "\"");
        }
        EffectivenessRow row;
        row.plot_id = plot.id;
        row.treatment = plot.treatment;
        row.weed_area_m2 = mask_area_in(weeds_post, plot.rect);
        if (plot.treatment == treatment_a) {
            rep.sum_a_m2 += row.weed_area_m2;
            ++count_a;
        } else {
            rep.sum_b_m2 += row.weed_area_m2;
            ++count_b;
        }
        rep.per_plot.push_back(std::move(row));
    }
    if (count_a == 0 || count_b == 0) {
        throw DataError("effectiveness: each treatment needs at least one plot");
    }
    rep.ratio = effectiveness_ratio(rep.sum_a_m2, rep.sum_b_m2);
    return rep;
}

double effectiveness_ratio(double sum_a_m2, double sum_b_m2) {
    if (!(sum_b_m2 > 0.0)) {
        throw DataError("effectiveness ratio: the reference treatment area must be > 0");
    }
    return sum_a_m2 / sum_b_m2;
}

}  // namespace rowpip
