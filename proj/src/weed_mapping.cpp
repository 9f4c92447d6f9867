#include "rowpip/weed_mapping.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

namespace rowpip {

BinaryMask buffer_rows(const std::vector<RowSegment>& segments, RowOrientation orientation,
                       int width, int height, const GeoTransform& transform,
                       const BufferConfig& cfg) {
    cfg.validate();
    const double cross_pixel = orientation == RowOrientation::horizontal
                                   ? transform.pixel_size_y
                                   : transform.pixel_size_x;
    const int half_px = static_cast<int>(std::lround(cfg.half_width_m / cross_pixel));
    if (half_px < 1) {
        throw ConfigError("buffer: half_width_m of " + std::to_string(cfg.half_width_m) +
                          " m is under one pixel at this resolution");
    }
    BinaryMask out(width, height, 1, transform);
    for (const RowSegment& seg : segments) {
        const int band_lo = std::max(0, seg.peak_px - half_px);
        const int band_hi = std::min(
            (orientation == RowOrientation::horizontal ? height : width) - 1,
            seg.peak_px + half_px);
        const int span_lo = std::max(0, seg.span_px.first);
        const int span_hi = std::min(
            orientation == RowOrientation::horizontal ? width : height, seg.span_px.second);
        if (span_hi <= span_lo) continue;
        if (orientation == RowOrientation::horizontal) {
            for (int y = band_lo; y <= band_hi; ++y) {
                std::memset(out.row_ptr(y) + span_lo, 1,
                            static_cast<std::size_t>(span_hi - span_lo));
            }
        } else {
            for (int y = span_lo; y < span_hi; ++y) {
                std::memset(out.row_ptr(y) + band_lo, 1,
                            static_cast<std::size_t>(band_hi - band_lo + 1));
            }
        }
    }
    return out;
}

BinaryMask weed_mask(const BinaryMask& veg, const BinaryMask& row_buffer) {
    if (!veg.same_grid(row_buffer)) {
        throw DataError("weed mask: vegetation and row-buffer rasters are on different grids");
    }
    BinaryMask out(veg.width(), veg.height(), 1, veg.transform());
    const std::uint8_t* v = veg.data();
    const std::uint8_t* b = row_buffer.data();
    std::uint8_t* o = out.data();
    const std::size_t n = out.sample_count();
    for (std::size_t i = 0; i < n; ++i) o[i] = static_cast<std::uint8_t>(v[i] & ~b[i] & 1u);
    return out;
}

std::vector<WeedComponent> connected_components(const BinaryMask& m) {
    const int w = m.width();
    const int h = m.height();
    std::vector<std::uint8_t> visited(static_cast<std::size_t>(w) * h, 0);
    std::vector<WeedComponent> components;
    std::vector<std::pair<int, int>> stack;

    for (int sr = 0; sr < h; ++sr) {
        const std::uint8_t* line = m.row_ptr(sr);
        for (int sc = 0; sc < w; ++sc) {
            if (!line[sc] || visited[static_cast<std::size_t>(sr) * w + sc]) continue;
            WeedComponent comp;
            comp.label = static_cast<int>(components.size()) + 1;
            comp.min_row = comp.max_row = sr;
            comp.min_col = comp.max_col = sc;
            stack.clear();
            stack.emplace_back(sr, sc);
            visited[static_cast<std::size_t>(sr) * w + sc] = 1;
            while (!stack.empty()) {
                const auto [r, c] = stack.back();
                stack.pop_back();
                comp.pixels.emplace_back(r, c);
                comp.min_row = std::min(comp.min_row, r);
                comp.max_row = std::max(comp.max_row, r);
                comp.min_col = std::min(comp.min_col, c);
                comp.max_col = std::max(comp.max_col, c);
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        if (dr == 0 && dc == 0) continue;
                        const int nr = r + dr;
                        const int nc = c + dc;
                        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
                        const std::size_t idx = static_cast<std::size_t>(nr) * w + nc;
                        if (visited[idx] || !m(nr, nc)) continue;
                        visited[idx] = 1;
                        stack.emplace_back(nr, nc);
                    }
                }
            }
            std::sort(comp.pixels.begin(), comp.pixels.end());
            comp.area_m2 = static_cast<double>(comp.pixels.size()) *
                           m.transform().pixel_size_x * m.transform().pixel_size_y;
            components.push_back(std::move(comp));
        }
    }
    return components;
}

std::vector<RxCell> build_grid(const Rect& plot, const GridConfig& cfg) {
    cfg.validate();
    if (!(plot.width() > 0.0) || !(plot.height() > 0.0)) {
        throw DataError("grid: plot rectangle is degenerate");
    }
    // A hair of slack so a plot measuring an exact multiple of cells does not
    // gain a sliver row from floating-point carry.
    const double cols_exact = std::ceil(plot.width() / cfg.cell_width_m - 1e-9);
    const double rows_exact = std::ceil(plot.height() / cfg.cell_length_m - 1e-9);
    if (cols_exact * rows_exact > 100e6) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "grid: plot would need %.3g cells; widen the cells or shrink the plot",
                      cols_exact * rows_exact);
        throw DataError(buf);
    }
    const int n_cols = static_cast<int>(cols_exact);
    const int n_rows = static_cast<int>(rows_exact);
    std::vector<RxCell> cells;
    cells.reserve(static_cast<std::size_t>(n_cols) * n_rows);
    for (int j = 0; j < n_rows; ++j) {
        for (int i = 0; i < n_cols; ++i) {
            RxCell cell;
            cell.i = i;
            cell.j = j;
            cell.rect.min_x = plot.min_x + i * cfg.cell_width_m;
            cell.rect.min_y = plot.min_y + j * cfg.cell_length_m;
            cell.rect.max_x = std::min(plot.max_x, cell.rect.min_x + cfg.cell_width_m);
            cell.rect.max_y = std::min(plot.max_y, cell.rect.min_y + cfg.cell_length_m);
            cell.rate = cfg.no_spray_rate;
            cells.push_back(cell);
        }
    }
    return cells;
}

namespace {

struct GridIndex {
    double min_x = 0, min_y = 0;
    int n_cols = 0, n_rows = 0;
    double cell_w = 0, cell_h = 0;
    std::vector<int> cell_index;  // (j * n_cols + i) -> index into cells, -1 if absent

    // Half-open membership: a point on a shared edge lands in the cell with
    // the larger index, and the far plot edge belongs to no cell.
    int locate(double wx, double wy) const {
        const int i = static_cast<int>(std::floor((wx - min_x) / cell_w));
        const int j = static_cast<int>(std::floor((wy - min_y) / cell_h));
        if (i < 0 || i >= n_cols || j < 0 || j >= n_rows) return -1;
        return cell_index[static_cast<std::size_t>(j) * n_cols + i];
    }
};

GridIndex index_cells(const std::vector<RxCell>& cells, const GridConfig& cfg) {
    GridIndex g;
    g.cell_w = cfg.cell_width_m;
    g.cell_h = cfg.cell_length_m;
    g.min_x = cells.front().rect.min_x;
    g.min_y = cells.front().rect.min_y;
    for (const RxCell& c : cells) {
        g.min_x = std::min(g.min_x, c.rect.min_x);
        g.min_y = std::min(g.min_y, c.rect.min_y);
        g.n_cols = std::max(g.n_cols, c.i + 1);
        g.n_rows = std::max(g.n_rows, c.j + 1);
    }
    g.cell_index.assign(static_cast<std::size_t>(g.n_cols) * g.n_rows, -1);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        g.cell_index[static_cast<std::size_t>(cells[k].j) * g.n_cols + cells[k].i] =
            static_cast<int>(k);
    }
    return g;
}

}  // namespace

PrescriptionMap assign_rates(std::vector<RxCell> cells, const BinaryMask& weeds,
                             const std::vector<WeedComponent>& components,
                             const GridConfig& cfg, const std::string& plot_id) {
    cfg.validate();
    PrescriptionMap rx;
    rx.plot_id = plot_id;
    if (cells.empty()) {
        return rx;
    }
    const GridIndex grid = index_cells(cells, cfg);
    const GeoTransform& t = weeds.transform();
    std::vector<char> spray(cells.size(), 0);

    if (cfg.trigger_rule == TriggerRule::any_overlap) {
        for (int row = 0; row < weeds.height(); ++row) {
            const std::uint8_t* line = weeds.row_ptr(row);
            for (int col = 0; col < weeds.width(); ++col) {
                if (!line[col]) continue;
                const auto [wx, wy] = pixel_to_world(t, col, row);
                const int c = grid.locate(wx, wy);
                if (c >= 0) spray[static_cast<std::size_t>(c)] = 1;
            }
        }
    } else {
        for (const WeedComponent& comp : components) {
            int common = -2;  // -2 unset, -1 split across cells or off-grid
            for (const auto& [row, col] : comp.pixels) {
                const auto [wx, wy] = pixel_to_world(t, col, row);
                const int c = grid.locate(wx, wy);
                if (c < 0) {
                    common = -1;
                    break;
                }
                if (common == -2) {
                    common = c;
                } else if (common != c) {
                    common = -1;
                    break;
                }
            }
            if (common >= 0) spray[static_cast<std::size_t>(common)] = 1;
        }
    }

    for (std::size_t k = 0; k < cells.size(); ++k) {
        cells[k].rate = spray[k] ? cfg.spray_rate : cfg.no_spray_rate;
    }
    rx.cells = std::move(cells);
    return rx;
}

double no_spray_area(const PrescriptionMap& rx) {
    double area = 0.0;
    for (const RxCell& c : rx.cells) {
        if (c.rate == 0.0) area += c.rect.area();
    }
    return area;
}

double spray_area(const PrescriptionMap& rx) {
    double area = 0.0;
    for (const RxCell& c : rx.cells) {
        if (c.rate > 0.0) area += c.rect.area();
    }
    return area;
}

std::vector<GeoFeature> prescription_features(const PrescriptionMap& rx) {
    std::vector<GeoFeature> features;
    features.reserve(rx.cells.size());
    for (const RxCell& c : rx.cells) {
        nlohmann::json props{{"rate", c.rate}, {"i", c.i}, {"j", c.j}, {"plot", rx.plot_id}};
        features.push_back(rect_feature(c.rect, std::move(props)));
    }
    return features;
}

std::vector<PrescriptionMap> prescriptions_from_features(
    const std::vector<GeoFeature>& features) {
    std::vector<PrescriptionMap> maps;
    std::map<std::string, std::size_t> by_plot;
    for (const GeoFeature& f : features) {
        if (f.geometry_type != "Polygon") {
            throw DataError("prescription map: every feature must be a polygon cell");
        }
        RxCell cell;
        if (!f.properties.contains("rate") || !f.properties["rate"].is_number()) {
            throw DataError("prescription map: cell feature is missing a numeric \"rate\"");
        }
        cell.rate = f.properties["rate"].get<double>();
        cell.i = f.properties.value("i", 0);
        cell.j = f.properties.value("j", 0);
        cell.rect = feature_bounds(f);
        const std::string plot = f.properties.value("plot", std::string());
        auto it = by_plot.find(plot);
        if (it == by_plot.end()) {
            it = by_plot.emplace(plot, maps.size()).first;
            maps.push_back(PrescriptionMap{plot, {}});
        }
        maps[it->second].cells.push_back(cell);
    }
    return maps;
}

}  // namespace rowpip
