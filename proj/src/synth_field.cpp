#include "rowpip/synth_field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "json.hpp"
#include "rowpip/rng.hpp"

namespace rowpip {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Extra cross-axis pixels beyond the buffer band that weeds must clear: up to
// 3 px of detection error on the peak position, plus slack for rounding.
constexpr double kWeedClearanceMarginPx = 6.0;

// Required free gap between weed disc rims so 8-connected labeling can never
// merge two weeds into one component.
constexpr double kWeedSeparationPx = 3.0;

struct Axes {
    // along = the direction rows run, cross = perpendicular
    int along_extent = 0;
    int cross_extent = 0;
    bool horizontal = true;

    // (along, cross) -> (x_px, y_px)
    std::pair<double, double> to_xy(double along, double cross) const {
        return horizontal ? std::make_pair(along, cross) : std::make_pair(cross, along);
    }
};

Axes make_axes(const FieldRecipe& r) {
    Axes a;
    a.horizontal = r.row_orientation == RowOrientation::horizontal;
    a.along_extent = a.horizontal ? r.width_px : r.height_px;
    a.cross_extent = a.horizontal ? r.height_px : r.width_px;
    return a;
}

// Smooth lateral drift from 0 at the field start to curvature_px at the end.
double drift_at(double along, double along_extent, double curvature_px) {
    if (curvature_px == 0.0) return 0.0;
    const double t = along / along_extent;
    return curvature_px * 0.5 * (1.0 - std::cos(kPi * t));
}

// Fills every pixel whose center lies inside or on the disc.
void stamp_disc(BinaryMask& mask, double cx, double cy, double radius,
                std::vector<std::pair<int, int>>* pixels_out) {
    const int col_lo = std::max(0, static_cast<int>(std::floor(cx - radius - 1.0)));
    const int col_hi = std::min(mask.width() - 1, static_cast<int>(std::ceil(cx + radius + 1.0)));
    const int row_lo = std::max(0, static_cast<int>(std::floor(cy - radius - 1.0)));
    const int row_hi = std::min(mask.height() - 1, static_cast<int>(std::ceil(cy + radius + 1.0)));
    const double r2 = radius * radius;
    for (int row = row_lo; row <= row_hi; ++row) {
        const double dy = (row + 0.5) - cy;
        std::uint8_t* line = mask.row_ptr(row);
        for (int col = col_lo; col <= col_hi; ++col) {
            const double dx = (col + 0.5) - cx;
            if (dx * dx + dy * dy <= r2) {
                line[col] = 1;
                if (pixels_out) pixels_out->emplace_back(row, col);
            }
        }
    }
}

std::vector<std::pair<int, int>> disc_pixels(double cx, double cy, double radius) {
    std::vector<std::pair<int, int>> px;
    const int col_lo = static_cast<int>(std::floor(cx - radius - 1.0));
    const int col_hi = static_cast<int>(std::ceil(cx + radius + 1.0));
    const int row_lo = static_cast<int>(std::floor(cy - radius - 1.0));
    const int row_hi = static_cast<int>(std::ceil(cy + radius + 1.0));
    const double r2 = radius * radius;
    for (int row = row_lo; row <= row_hi; ++row) {
        const double dy = (row + 0.5) - cy;
        for (int col = col_lo; col <= col_hi; ++col) {
            const double dx = (col + 0.5) - cx;
            if (dx * dx + dy * dy <= r2) px.emplace_back(row, col);
        }
    }
    return px;
}

}  // namespace

void FieldRecipe::validate() const {
    if (width_px < 1 || height_px < 1) throw ConfigError("recipe: field dimensions must be >= 1");
    if (!(pixel_size_m > 0.0)) throw ConfigError("recipe: pixel_size_m must be > 0");
    if (!(row_spacing_m > 0.0)) throw ConfigError("recipe: row_spacing_m must be > 0");
    if (!(plant_diameter_min_m > 0.0) || plant_diameter_max_m < plant_diameter_min_m) {
        throw ConfigError("recipe: need 0 < plant_diameter_min_m <= plant_diameter_max_m");
    }
    if (row_spacing_m < 2.0 * plant_diameter_max_m) {
        throw ConfigError("recipe: row_spacing_m must be >= 2 * plant_diameter_max_m");
    }
    if (!(plant_step_m > 0.0)) throw ConfigError("recipe: plant_step_m must be > 0");
    if (plant_dropout_prob < 0.0 || plant_dropout_prob >= 1.0) {
        throw ConfigError("recipe: plant_dropout_prob must lie in [0, 1)");
    }
    if (row_curvature_px < 0.0) throw ConfigError("recipe: row_curvature_px must be >= 0");
    if (weed_count < 0) throw ConfigError("recipe: weed_count must be >= 0");
    if (weed_count > 0 &&
        (!(weed_diameter_min_m > 0.0) || weed_diameter_max_m < weed_diameter_min_m)) {
        throw ConfigError("recipe: need 0 < weed_diameter_min_m <= weed_diameter_max_m");
    }
    if (buffer_clearance_m < 0.0) throw ConfigError("recipe: buffer_clearance_m must be >= 0");
}

GeoTransform FieldRecipe::transform() const {
    GeoTransform t;
    t.pixel_size_x = pixel_size_m;
    t.pixel_size_y = pixel_size_m;
    t.origin_x = origin_x;
    t.origin_y = origin_y != 0.0 ? origin_y : height_px * pixel_size_m;
    t.crs_label = crs_label;
    return t;
}

SynthField generate(const FieldRecipe& recipe) {
    recipe.validate();
    const Axes ax = make_axes(recipe);
    Rng rng(recipe.rng_seed);

    SynthField field;
    field.mask = BinaryMask(recipe.width_px, recipe.height_px, 1, recipe.transform());

    const double spacing_px = recipe.row_spacing_m / recipe.pixel_size_m;
    const double step_px = recipe.plant_step_m / recipe.pixel_size_m;

    // Rows sit at half-spacing offsets so the first and last inter-row gaps
    // are half-width; plants march along each centerline at a fixed step.
    // RNG draw order is fixed (per plant: diameter, then dropout) so a seed
    // pins the exact field bitmap.
    std::vector<double> base_cross;
    for (double c = spacing_px * 0.5; c < ax.cross_extent; c += spacing_px) {
        base_cross.push_back(c);
    }
    constexpr double kTruthSampleStridePx = 64.0;
    for (double base : base_cross) {
        RowPolyline centerline;
        for (double a = 0.5; ; a += kTruthSampleStridePx) {
            if (a > ax.along_extent - 0.5) a = ax.along_extent - 0.5;
            const double c = base + drift_at(a, ax.along_extent, recipe.row_curvature_px);
            centerline.push_back(ax.to_xy(a, c));
            if (a >= ax.along_extent - 0.5) break;
        }
        field.truth.rows.push_back(std::move(centerline));

        for (double a = step_px * 0.5; a < ax.along_extent; a += step_px) {
            const double diameter_px =
                rng.uniform(recipe.plant_diameter_min_m, recipe.plant_diameter_max_m) /
                recipe.pixel_size_m;
            const bool dropped = rng.next_double() < recipe.plant_dropout_prob;
            if (dropped) continue;
            const double c = base + drift_at(a, ax.along_extent, recipe.row_curvature_px);
            const auto [cx, cy] = ax.to_xy(a, c);
            stamp_disc(field.mask, cx, cy, diameter_px * 0.5, nullptr);
        }
    }

    const double buffer_half_px =
        static_cast<double>(std::lround(recipe.buffer_clearance_m / recipe.pixel_size_m));
    for (int w = 0; w < recipe.weed_count; ++w) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            const double diameter_px =
                rng.uniform(recipe.weed_diameter_min_m, recipe.weed_diameter_max_m) /
                recipe.pixel_size_m;
            const double r = diameter_px * 0.5;
            const double pad = r + 2.0;
            if (2.0 * pad >= recipe.width_px || 2.0 * pad >= recipe.height_px) break;
            const double cx = rng.uniform(pad, recipe.width_px - pad);
            const double cy = rng.uniform(pad, recipe.height_px - pad);

            if (recipe.weed_clearance && !base_cross.empty()) {
                const double along = ax.horizontal ? cx : cy;
                const double cross = ax.horizontal ? cy : cx;
                double min_dist = std::numeric_limits<double>::infinity();
                for (double probe : {along - r, along, along + r}) {
                    const double a = std::clamp(probe, 0.0, double(ax.along_extent));
                    const double d = drift_at(a, ax.along_extent, recipe.row_curvature_px);
                    for (double base : base_cross) {
                        min_dist = std::min(min_dist, std::abs(cross - (base + d)));
                    }
                }
                if (min_dist < buffer_half_px + r + kWeedClearanceMarginPx) continue;
            }

            bool crowded = false;
            for (const WeedRecord& other : field.truth.weeds) {
                const double gap = std::hypot(cx - other.cx_px, cy - other.cy_px) -
                                   r - other.diameter_px * 0.5;
                if (gap < kWeedSeparationPx) {
                    crowded = true;
                    break;
                }
            }
            if (crowded) continue;

            WeedRecord rec;
            rec.cx_px = cx;
            rec.cy_px = cy;
            rec.diameter_px = diameter_px;
            stamp_disc(field.mask, cx, cy, r, &rec.pixels);
            field.truth.weeds.push_back(std::move(rec));
            placed = true;
        }
        if (!placed) {
            throw DataError("synthetic field: could not place weed " + std::to_string(w + 1) +
                            " of " + std::to_string(recipe.weed_count) +
                            " within the clearance rules; loosen the recipe");
        }
    }
    return field;
}

PrescriptionMap truth_to_rx(const GroundTruth& truth, const GeoTransform& transform,
                            const Rect& plot, const GridConfig& grid,
                            const std::string& plot_id) {
    grid.validate();
    std::vector<RxCell> cells = build_grid(plot, grid);
    std::vector<char> spray(cells.size(), 0);

    // Deliberately dumb point-in-rect scans; this is the reference the fast
    // raster path is judged against.
    auto cell_of = [&](double wx, double wy) -> int {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (cells[c].rect.contains(wx, wy)) return static_cast<int>(c);
        }
        return -1;
    };

    for (const WeedRecord& weed : truth.weeds) {
        if (grid.trigger_rule == TriggerRule::any_overlap) {
            for (const auto& [row, col] : weed.pixels) {
                const auto [wx, wy] = pixel_to_world(transform, col, row);
                const int c = cell_of(wx, wy);
                if (c >= 0) spray[static_cast<std::size_t>(c)] = 1;
            }
        } else {
            int common = -2;  // -2 unset, -1 mixed or outside
            for (const auto& [row, col] : weed.pixels) {
                const auto [wx, wy] = pixel_to_world(transform, col, row);
                const int c = cell_of(wx, wy);
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

    PrescriptionMap rx;
    rx.plot_id = plot_id;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        cells[c].rate = spray[c] ? grid.spray_rate : grid.no_spray_rate;
    }
    rx.cells = std::move(cells);
    return rx;
}

void write_truth_json(const GroundTruth& truth, const std::string& path) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& line : truth.rows) {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& [x, y] : line) pts.push_back({x, y});
        j["rows"].push_back(std::move(pts));
    }
    j["weeds"] = nlohmann::json::array();
    for (const auto& w : truth.weeds) {
        j["weeds"].push_back({{"cx", w.cx_px}, {"cy", w.cy_px}, {"d", w.diameter_px}});
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("I/O failure writing " + path);
}

GroundTruth read_truth_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + " is not valid JSON: " + e.what());
    }
    GroundTruth truth;
    try {
        for (const auto& line : j.at("rows")) {
            RowPolyline pl;
            for (const auto& pt : line) {
                pl.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
            }
            if (pl.size() < 2) throw DataError(path + ": truth row needs >= 2 points");
            truth.rows.push_back(std::move(pl));
        }
        for (const auto& jw : j.at("weeds")) {
            WeedRecord w;
            w.cx_px = jw.at("cx").get<double>();
            w.cy_px = jw.at("cy").get<double>();
            w.diameter_px = jw.at("d").get<double>();
            w.pixels = disc_pixels(w.cx_px, w.cy_px, w.diameter_px * 0.5);
            truth.weeds.push_back(std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed truth file: " + e.what());
    }
    return truth;
}

GeoRaster mask_to_rgb(const BinaryMask& mask) {
    if (mask.bands() != 1) throw DataError("mask_to_rgb expects a 1-band mask");
    GeoRaster rgb(mask.width(), mask.height(), 3, mask.transform());
    // Soil (92,64,51) has excess green ~ -0.07, vegetation (58,160,58) ~ 0.74,
    // so thresholding the painted image reproduces the mask exactly.
    for (int y = 0; y < mask.height(); ++y) {
        const std::uint8_t* src = mask.row_ptr(y);
        std::uint8_t* dst = rgb.row_ptr(y);
        for (int x = 0; x < mask.width(); ++x) {
            if (src[x]) {
                dst[3 * x] = 58;
                dst[3 * x + 1] = 160;
                dst[3 * x + 2] = 58;
            } else {
                dst[3 * x] = 92;
                dst[3 * x + 1] = 64;
                dst[3 * x + 2] = 51;
            }
        }
    }
    return rgb;
}

}  // namespace rowpip
