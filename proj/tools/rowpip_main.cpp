// rowpip: corn-row detection and site-specific spray prescription toolkit.
// Every pipeline stage is a subcommand; `pipeline` chains them end to end.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rowpip/error.hpp"
#include "rowpip/evaluation.hpp"
#include "rowpip/geojson.hpp"
#include "rowpip/geo_raster.hpp"
#include "rowpip/raster_io.hpp"
#include "rowpip/render.hpp"
#include "rowpip/row_detection.hpp"
#include "rowpip/segmentation.hpp"
#include "rowpip/spray_sim.hpp"
#include "rowpip/synth_field.hpp"
#include "rowpip/weed_mapping.hpp"

namespace {

using nlohmann::json;
using namespace rowpip;

constexpr double kMetersPerInch = 0.0254;
constexpr double kMetersPerFoot = 0.3048;
constexpr double kMpsPerMph = 0.44704;

// ---------------------------------------------------------------------------
// Small parsing helpers
// ---------------------------------------------------------------------------

std::pair<double, double> parse_pair(const std::string& text, char sep,
                                     const std::string& flag) {
    const auto at = text.find(sep);
    if (at == std::string::npos || at == 0 || at + 1 >= text.size()) {
        throw ConfigError(flag + ": expected two values separated by '" + std::string(1, sep) +
                          "', got \"" + text + "\"");
    }
    try {
        std::size_t used = 0;
        const double a = std::stod(text.substr(0, at), &used);
        if (used != at) throw std::invalid_argument("trailing");
        const std::string rest = text.substr(at + 1);
        const double b = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("trailing");
        return {a, b};
    } catch (const std::exception&) {
        throw ConfigError(flag + ": could not parse \"" + text + "\" as two numbers");
    }
}

RowOrientation parse_orientation(const std::string& s) {
    if (s == "horizontal") return RowOrientation::horizontal;
    if (s == "vertical") return RowOrientation::vertical;
    throw ConfigError("--orientation: expected horizontal or vertical, got \"" + s + "\"");
}

TriggerRule parse_rule(const std::string& s) {
    if (s == "any-overlap") return TriggerRule::any_overlap;
    if (s == "fully-within") return TriggerRule::fully_within;
    throw ConfigError("--rule: expected any-overlap or fully-within, got \"" + s + "\"");
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& known,
                         const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
        }
    }
}

json load_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ConfigError(what + ": cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + path + " is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw DataError("I/O failure writing " + path);
}

// ---------------------------------------------------------------------------
// Recipe / segment GeoJSON / plot GeoJSON codecs
// ---------------------------------------------------------------------------

FieldRecipe recipe_from_json(const json& j) {
    reject_unknown_keys(
        j,
        {"width_px", "height_px", "pixel_size_m", "row_spacing_m", "row_orientation",
         "plant_diameter_min_m", "plant_diameter_max_m", "plant_step_m", "plant_dropout_prob",
         "row_curvature_px", "weed_count", "weed_diameter_min_m", "weed_diameter_max_m",
         "weed_clearance", "buffer_clearance_m", "rng_seed", "origin_x", "origin_y", "crs_label"},
        "recipe");
    FieldRecipe r;
    try {
        r.width_px = j.value("width_px", r.width_px);
        r.height_px = j.value("height_px", r.height_px);
        r.pixel_size_m = j.value("pixel_size_m", r.pixel_size_m);
        r.row_spacing_m = j.value("row_spacing_m", r.row_spacing_m);
        if (j.contains("row_orientation")) {
            r.row_orientation = parse_orientation(j["row_orientation"].get<std::string>());
        }
        r.plant_diameter_min_m = j.value("plant_diameter_min_m", r.plant_diameter_min_m);
        r.plant_diameter_max_m = j.value("plant_diameter_max_m", r.plant_diameter_max_m);
        r.plant_step_m = j.value("plant_step_m", r.plant_step_m);
        r.plant_dropout_prob = j.value("plant_dropout_prob", r.plant_dropout_prob);
        r.row_curvature_px = j.value("row_curvature_px", r.row_curvature_px);
        r.weed_count = j.value("weed_count", r.weed_count);
        r.weed_diameter_min_m = j.value("weed_diameter_min_m", r.weed_diameter_min_m);
        r.weed_diameter_max_m = j.value("weed_diameter_max_m", r.weed_diameter_max_m);
        r.weed_clearance = j.value("weed_clearance", r.weed_clearance);
        r.buffer_clearance_m = j.value("buffer_clearance_m", r.buffer_clearance_m);
        r.rng_seed = j.value("rng_seed", r.rng_seed);
        r.origin_x = j.value("origin_x", r.origin_x);
        r.origin_y = j.value("origin_y", r.origin_y);
        r.crs_label = j.value("crs_label", r.crs_label);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("recipe: ") + e.what());
    }
    return r;
}

std::vector<GeoFeature> segments_to_features(const std::vector<RowSegment>& segments,
                                             RowOrientation orientation) {
    std::vector<GeoFeature> features;
    features.reserve(segments.size());
    const char* o = orientation == RowOrientation::horizontal ? "horizontal" : "vertical";
    for (const RowSegment& s : segments) {
        GeoFeature f;
        f.geometry_type = "LineString";
        f.coords = {s.world_a, s.world_b};
        f.properties = json{{"tile_col", s.tile_col_index}, {"tile_row", s.tile_row_index},
                            {"peak_px", s.peak_px},         {"span_start", s.span_px.first},
                            {"span_end", s.span_px.second}, {"orientation", o}};
        features.push_back(std::move(f));
    }
    return features;
}

std::pair<std::vector<RowSegment>, RowOrientation> segments_from_geojson(
    const std::string& path) {
    std::vector<RowSegment> segments;
    std::optional<RowOrientation> orientation;
    for (const GeoFeature& f : read_geojson(path)) {
        if (f.geometry_type != "LineString") {
            throw DataError(path + ": row segments must be LineString features");
        }
        RowSegment s;
        try {
            s.tile_col_index = f.properties.at("tile_col").get<int>();
            s.tile_row_index = f.properties.at("tile_row").get<int>();
            s.peak_px = f.properties.at("peak_px").get<int>();
            s.span_px = {f.properties.at("span_start").get<int>(),
                         f.properties.at("span_end").get<int>()};
            const RowOrientation o =
                parse_orientation(f.properties.at("orientation").get<std::string>());
            if (orientation && *orientation != o) {
                throw DataError(path + ": mixed segment orientations");
            }
            orientation = o;
        } catch (const json::exception& e) {
            throw DataError(path + ": segment feature is missing properties: " + e.what());
        }
        s.world_a = f.coords.front();
        s.world_b = f.coords.back();
        segments.push_back(s);
    }
    if (segments.empty()) throw DataError(path + ": no row segments found");
    return {segments, *orientation};
}

std::vector<PlotDef> plots_from_geojson(const std::string& path, bool need_treatment) {
    std::vector<PlotDef> plots;
    int anon = 0;
    for (const GeoFeature& f : read_geojson(path)) {
        if (f.geometry_type != "Polygon") {
            throw DataError(path + ": plot features must be polygons");
        }
        PlotDef p;
        p.id = f.properties.value("id", f.properties.value("plot", std::string()));
        if (p.id.empty()) p.id = "plot-" + std::to_string(++anon);
        p.treatment = f.properties.value("treatment", std::string());
        if (need_treatment && p.treatment.empty()) {
            throw DataError(path + ": plot \"" + p.id + "\" has no \"treatment\" property");
        }
        p.rect = feature_bounds(f);
        plots.push_back(std::move(p));
    }
    if (plots.empty()) throw DataError(path + ": no plot polygons found");
    return plots;
}

// ---------------------------------------------------------------------------
// Report tables (fixed layouts, aligned columns)
// ---------------------------------------------------------------------------

void print_detection_table(const std::vector<std::pair<std::string, DetectionReport>>& rows) {
    std::printf("%-10s %6s %6s %6s %6s %12s %12s\n", "Plot", "TP", "TN", "FP", "FN",
                "Precision %", "Accuracy %");
    for (const auto& [id, r] : rows) {
        std::printf("%-10s %6lld %6lld %6lld %6lld %12.2f %12.2f\n", id.c_str(), r.tp, r.tn,
                    r.fp, r.fn, r.precision * 100.0, r.accuracy * 100.0);
    }
}

void print_application_table(const ApplicationReport& rep) {
    std::printf("%-10s %14s %14s %14s %10s\n", "Plot", "Expected m2", "Measured m2",
                "Sprayed m2", "Sprayed %");
    for (const ApplicationRow& row : rep.per_plot) {
        std::printf("%-10s %14.1f %14.1f %14.1f %10.1f\n", row.plot_id.c_str(),
                    row.expected_no_spray_m2, row.measured_no_spray_m2,
                    row.sprayed_in_no_spray_m2, row.sprayed_pct);
    }
    std::printf("%-10s %14.1f %14.1f %14.1f %10.1f\n", "TOTAL", rep.expected_no_spray_m2,
                rep.measured_no_spray_m2,
                rep.expected_no_spray_m2 - rep.measured_no_spray_m2,
                (rep.expected_no_spray_m2 - rep.measured_no_spray_m2) /
                    rep.expected_no_spray_m2 * 100.0);
    std::printf("accuracy: %.1f%%   relative error: %.3f\n", rep.accuracy_pct,
                rep.relative_error);
}

void print_area_loss_table(const AreaLossReport& rep) {
    std::printf("%-10s %14s %14s %12s %8s\n", "Plot", "Original m2", "Modified m2", "Loss m2",
                "Loss %");
    for (const AreaLossRow& row : rep.per_plot) {
        std::printf("%-10s %14.1f %14.1f %12.1f %8.1f\n", row.plot_id.c_str(), row.a_m2,
                    row.b_m2, row.loss_m2, row.loss_pct);
    }
    const AreaLossRow& t = rep.total;
    std::printf("%-10s %14.1f %14.1f %12.1f %8.1f\n", t.plot_id.c_str(), t.a_m2, t.b_m2,
                t.loss_m2, t.loss_pct);
}

void print_effectiveness_table(const EffectivenessReport& rep) {
    std::printf("%-10s %-10s %14s\n", "Plot", "Treatment", "Weed area m2");
    for (const EffectivenessRow& row : rep.per_plot) {
        std::printf("%-10s %-10s %14.2f\n", row.plot_id.c_str(), row.treatment.c_str(),
                    row.weed_area_m2);
    }
    std::printf("sum(%s) = %.2f m2   sum(%s) = %.2f m2   ratio = %.2f\n",
                rep.treatment_a.c_str(), rep.sum_a_m2, rep.treatment_b.c_str(), rep.sum_b_m2,
                rep.ratio);
}

void maybe_write_json(const std::string& path, const json& j) {
    if (path.empty()) return;
    write_text_file(path, j.dump(2) + "\n");
}

json application_report_json(const ApplicationReport& rep) {
    json per = json::array();
    for (const ApplicationRow& r : rep.per_plot) {
        per.push_back({{"plot", r.plot_id},
                       {"expected_no_spray_m2", r.expected_no_spray_m2},
                       {"measured_no_spray_m2", r.measured_no_spray_m2},
                       {"sprayed_in_no_spray_m2", r.sprayed_in_no_spray_m2},
                       {"sprayed_pct", r.sprayed_pct}});
    }
    return json{{"per_plot", per},
                {"expected_no_spray_m2", rep.expected_no_spray_m2},
                {"measured_no_spray_m2", rep.measured_no_spray_m2},
                {"accuracy_pct", rep.accuracy_pct},
                {"relative_error", rep.relative_error}};
}

// ---------------------------------------------------------------------------
// Shared stage runners (used by both the subcommands and `pipeline`)
// ---------------------------------------------------------------------------

BinaryMask load_mask(const std::string& path) {
    GeoRaster r = read_raster(path);
    if (r.bands() != 1) throw DataError(path + ": expected a 1-band mask raster");
    return to_binary_mask(r);
}

// Rebuilds per-plot prescriptions for a weed mask: one PrescriptionMap per
// plot polygon.
std::vector<PrescriptionMap> prescribe_all(const BinaryMask& weeds,
                                           const std::vector<PlotDef>& plots,
                                           const GridConfig& grid) {
    const std::vector<WeedComponent> components = connected_components(weeds);
    std::vector<PrescriptionMap> maps;
    maps.reserve(plots.size());
    for (const PlotDef& plot : plots) {
        maps.push_back(assign_rates(build_grid(plot.rect, grid), weeds, components, grid,
                                    plot.id));
    }
    return maps;
}

std::vector<GeoFeature> all_prescription_features(const std::vector<PrescriptionMap>& maps) {
    std::vector<GeoFeature> features;
    for (const PrescriptionMap& m : maps) {
        auto fs = prescription_features(m);
        features.insert(features.end(), std::make_move_iterator(fs.begin()),
                        std::make_move_iterator(fs.end()));
    }
    return features;
}

Rect cells_bounds(const PrescriptionMap& rx) {
    if (rx.cells.empty()) throw DataError("prescription map has no cells");
    Rect b = rx.cells.front().rect;
    for (const RxCell& c : rx.cells) {
        b.min_x = std::min(b.min_x, c.rect.min_x);
        b.min_y = std::min(b.min_y, c.rect.min_y);
        b.max_x = std::max(b.max_x, c.rect.max_x);
        b.max_y = std::max(b.max_y, c.rect.max_y);
    }
    return b;
}

ApplicationReport application_from_maps(const std::vector<PrescriptionMap>& maps,
                                        const AsAppliedMap& applied) {
    std::vector<ApplicationRow> rows;
    for (const PrescriptionMap& rx : maps) {
        ApplicationRow row;
        row.plot_id = rx.plot_id;
        row.expected_no_spray_m2 = no_spray_area(rx);
        row.measured_no_spray_m2 = as_applied_no_spray_area_in(applied, cells_bounds(rx));
        row.sprayed_in_no_spray_m2 = row.expected_no_spray_m2 - row.measured_no_spray_m2;
        rows.push_back(std::move(row));
    }
    return application_report(rows);
}

// ---------------------------------------------------------------------------
// Subcommand configuration structs
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string recipe_path, out_mask, out_truth, out_rgb;
    std::optional<std::uint64_t> seed;
};

struct SegmentArgs {
    std::string input, output;
    double threshold = 0.08;
};

struct DetectArgs {
    std::string mask, tile = "3000x2000", orientation = "horizontal";
    std::string output_lines, output_segments;
    double row_spacing_m = 0.762;
    int min_distance_px = 0;
    int threads = 0;
};

struct WeedmapArgs {
    std::string veg, rows, output;
    double buffer_in = 3.5;
};

struct PrescribeArgs {
    std::string weeds, plot, output;
    std::string cell_ft = "1.67x10", rule = "any-overlap", rates = "15,0";
};

struct SimulateArgs {
    std::string rx, output, log;
    double speed_mph = 6.5, hz = 10.0, delay_s = 0.0;
    std::optional<double> off_delay_s;
    double boom_ft = 136.6, nozzle_ft = 1.67;
    double default_rate = 15.0, pixel_m = 0.03, position_sigma_m = 0.0;
    std::uint64_t seed = 0;
};

TileSpec parse_tile(const std::string& text) {
    const auto [w, h] = parse_pair(text, 'x', "--tile");
    TileSpec spec;
    spec.tile_width = static_cast<int>(w);
    spec.tile_height = static_cast<int>(h);
    if (w != spec.tile_width || h != spec.tile_height) {
        throw ConfigError("--tile: dimensions must be integers");
    }
    spec.validate();
    return spec;
}

SprayerSpec sprayer_from_args(const SimulateArgs& a) {
    SprayerSpec spec;
    spec.boom_width_m = a.boom_ft * kMetersPerFoot;
    spec.nozzle_spacing_m = a.nozzle_ft * kMetersPerFoot;
    spec.speed_mps = a.speed_mph * kMpsPerMph;
    spec.control_rate_hz = a.hz;
    spec.actuation_delay_s = a.delay_s;
    spec.off_delay_s = a.off_delay_s;
    spec.default_rate = a.default_rate;
    spec.position_sigma_m = a.position_sigma_m;
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------
// Subcommand bodies
// ---------------------------------------------------------------------------

void run_synth(const SynthArgs& a) {
    FieldRecipe recipe;
    if (!a.recipe_path.empty()) {
        recipe = recipe_from_json(load_json_file(a.recipe_path, "--recipe"));
    }
    if (a.seed) recipe.rng_seed = *a.seed;
    const SynthField field = generate(recipe);
    if (!a.out_mask.empty()) write_raster(field.mask, a.out_mask);
    if (!a.out_truth.empty()) write_truth_json(field.truth, a.out_truth);
    if (!a.out_rgb.empty()) write_raster(mask_to_rgb(field.mask), a.out_rgb);
    std::printf("synth: %dx%d px, %zu rows, %zu weeds, seed %llu\n", recipe.width_px,
                recipe.height_px, field.truth.rows.size(), field.truth.weeds.size(),
                static_cast<unsigned long long>(recipe.rng_seed));
}

void run_segment(const SegmentArgs& a) {
    SegmentationConfig cfg;
    cfg.threshold = a.threshold;
    cfg.validate();
    const GeoRaster rgb = read_raster(a.input);
    const BinaryMask mask = binarize(exgi(rgb, cfg), cfg);
    write_raster(mask, a.output);
    std::printf("segment: %d x %d, vegetation area %.2f m2\n", mask.width(), mask.height(),
                mask_area(mask));
}

RowDetectionResult run_detect(const BinaryMask& mask, const DetectArgs& a,
                              RowOrientation orientation, const TileSpec& tile) {
    PeakParams params;
    params.row_spacing_m = a.row_spacing_m;
    params.min_distance_px = a.min_distance_px;
    return detect_rows(mask, tile, params, orientation, a.threads);
}

void run_detect_cli(const DetectArgs& a) {
    const BinaryMask mask = load_mask(a.mask);
    const TileSpec tile = parse_tile(a.tile);
    const RowOrientation orientation = parse_orientation(a.orientation);
    const RowDetectionResult result = run_detect(mask, a, orientation, tile);
    if (!a.output_lines.empty()) write_raster(result.line_mask, a.output_lines);
    if (!a.output_segments.empty()) {
        write_geojson(segments_to_features(result.segments, orientation), a.output_segments);
    }
    std::printf("detect-rows: %zu segments across %d x %d px\n", result.segments.size(),
                mask.width(), mask.height());
}

BinaryMask run_weedmap(const BinaryMask& veg, const std::vector<RowSegment>& segments,
                       RowOrientation orientation, double buffer_in) {
    BufferConfig cfg;
    cfg.half_width_m = buffer_in * kMetersPerInch;
    const BinaryMask buffer = buffer_rows(segments, orientation, veg.width(), veg.height(),
                                          veg.transform(), cfg);
    return weed_mask(veg, buffer);
}

void run_weedmap_cli(const WeedmapArgs& a) {
    const BinaryMask veg = load_mask(a.veg);
    const auto [segments, orientation] = segments_from_geojson(a.rows);
    const BinaryMask weeds = run_weedmap(veg, segments, orientation, a.buffer_in);
    write_raster(weeds, a.output);
    std::printf("weedmap: weed area %.2f m2 from vegetation area %.2f m2\n", mask_area(weeds),
                mask_area(veg));
}

GridConfig grid_from_args(const std::string& cell_ft, const std::string& rule,
                          const std::string& rates) {
    GridConfig grid;
    const auto [w_ft, l_ft] = parse_pair(cell_ft, 'x', "--cell-ft");
    grid.cell_width_m = w_ft * kMetersPerFoot;
    grid.cell_length_m = l_ft * kMetersPerFoot;
    grid.trigger_rule = parse_rule(rule);
    const auto [spray, no_spray] = parse_pair(rates, ',', "--rates");
    grid.spray_rate = spray;
    grid.no_spray_rate = no_spray;
    grid.validate();
    return grid;
}

void run_prescribe_cli(const PrescribeArgs& a) {
    const BinaryMask weeds = load_mask(a.weeds);
    const std::vector<PlotDef> plots = plots_from_geojson(a.plot, false);
    const GridConfig grid = grid_from_args(a.cell_ft, a.rule, a.rates);
    const std::vector<PrescriptionMap> maps = prescribe_all(weeds, plots, grid);
    write_geojson(all_prescription_features(maps), a.output);
    std::size_t sprayed = 0, total = 0;
    for (const PrescriptionMap& m : maps) {
        total += m.cells.size();
        for (const RxCell& c : m.cells) sprayed += c.rate > 0.0;
    }
    std::printf("prescribe: %zu of %zu cells spray across %zu plot(s)\n", sprayed, total,
                maps.size());
}

void run_simulate_cli(const SimulateArgs& a) {
    const std::vector<PrescriptionMap> maps = prescriptions_from_features(read_geojson(a.rx));
    if (maps.empty()) throw DataError(a.rx + ": no prescription cells found");
    const SprayerSpec spec = sprayer_from_args(a);
    Rect field = cells_bounds(maps.front());
    for (const PrescriptionMap& m : maps) {
        const Rect b = cells_bounds(m);
        field.min_x = std::min(field.min_x, b.min_x);
        field.min_y = std::min(field.min_y, b.min_y);
        field.max_x = std::max(field.max_x, b.max_x);
        field.max_y = std::max(field.max_y, b.max_y);
    }
    SimRasterSpec raster_spec;
    raster_spec.pixel_size_m = a.pixel_m;
    const AsAppliedMap applied =
        simulate(maps, spec, plan_passes(field, spec), raster_spec, a.seed);
    for (const std::string& w : applied.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    if (!a.output.empty()) write_raster(applied.raster, a.output);
    if (!a.log.empty()) write_tick_log_csv(applied.ticks, a.log);
    const ApplicationReport rep = application_from_maps(maps, applied);
    std::printf("simulate: no-spray %.1f m2 expected, %.1f m2 as applied (%.1f%%)\n",
                rep.expected_no_spray_m2, rep.measured_no_spray_m2, rep.accuracy_pct);
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

struct PipelineConfig {
    int threads = 0;
    std::string output_dir = "out";
    std::string input_raster;  // exclusive with recipe
    std::optional<FieldRecipe> recipe;
    SegmentationConfig segmentation;
    TileSpec tiling;
    PeakParams peaks;
    RowOrientation orientation = RowOrientation::horizontal;
    BufferConfig buffer;
    GridConfig grid;
    SprayerSpec sprayer;
    SimRasterSpec sim_raster;
    std::vector<PlotDef> plots;  // empty = one plot spanning the raster
};

PipelineConfig pipeline_config_from_json(const json& j) {
    reject_unknown_keys(j,
                        {"threads", "output_dir", "input", "segmentation", "tiling", "peaks",
                         "orientation", "buffer", "grid", "sprayer", "sim_raster", "plots"},
                        "config");
    PipelineConfig cfg;
    try {
        cfg.threads = j.value("threads", 0);
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        if (!j.contains("input")) throw ConfigError("config: missing \"input\"");
        const json& in = j["input"];
        reject_unknown_keys(in, {"raster", "recipe", "seed"}, "config.input");
        if (in.contains("raster") == in.contains("recipe")) {
            throw ConfigError("config.input: give exactly one of \"raster\" or \"recipe\"");
        }
        if (in.contains("raster")) {
            cfg.input_raster = in["raster"].get<std::string>();
        } else {
            cfg.recipe = recipe_from_json(in["recipe"]);
            if (in.contains("seed")) cfg.recipe->rng_seed = in["seed"].get<std::uint64_t>();
        }
        if (j.contains("segmentation")) {
            const json& s = j["segmentation"];
            reject_unknown_keys(s, {"threshold", "zero_sum_value"}, "config.segmentation");
            cfg.segmentation.threshold = s.value("threshold", cfg.segmentation.threshold);
            cfg.segmentation.zero_sum_value =
                s.value("zero_sum_value", cfg.segmentation.zero_sum_value);
        }
        if (j.contains("tiling")) {
            const json& s = j["tiling"];
            reject_unknown_keys(s, {"tile_width", "tile_height"}, "config.tiling");
            cfg.tiling.tile_width = s.value("tile_width", cfg.tiling.tile_width);
            cfg.tiling.tile_height = s.value("tile_height", cfg.tiling.tile_height);
        }
        if (j.contains("peaks")) {
            const json& s = j["peaks"];
            reject_unknown_keys(s,
                                {"row_spacing_m", "min_distance_px", "min_height_frac",
                                 "min_height_abs", "line_half_width_px"},
                                "config.peaks");
            cfg.peaks.row_spacing_m = s.value("row_spacing_m", cfg.peaks.row_spacing_m);
            cfg.peaks.min_distance_px = s.value("min_distance_px", cfg.peaks.min_distance_px);
            cfg.peaks.min_height_frac = s.value("min_height_frac", cfg.peaks.min_height_frac);
            cfg.peaks.min_height_abs = s.value("min_height_abs", cfg.peaks.min_height_abs);
            cfg.peaks.line_half_width_px =
                s.value("line_half_width_px", cfg.peaks.line_half_width_px);
        }
        if (j.contains("orientation")) {
            cfg.orientation = parse_orientation(j["orientation"].get<std::string>());
        }
        if (j.contains("buffer")) {
            const json& s = j["buffer"];
            reject_unknown_keys(s, {"half_width_m", "half_width_in"}, "config.buffer");
            if (s.contains("half_width_m") && s.contains("half_width_in")) {
                throw ConfigError("config.buffer: give half_width_m or half_width_in, not both");
            }
            if (s.contains("half_width_in")) {
                cfg.buffer.half_width_m = s["half_width_in"].get<double>() * kMetersPerInch;
            } else {
                cfg.buffer.half_width_m = s.value("half_width_m", cfg.buffer.half_width_m);
            }
        }
        if (j.contains("grid")) {
            const json& s = j["grid"];
            reject_unknown_keys(
                s, {"cell_width_m", "cell_length_m", "spray_rate", "no_spray_rate", "rule"},
                "config.grid");
            cfg.grid.cell_width_m = s.value("cell_width_m", cfg.grid.cell_width_m);
            cfg.grid.cell_length_m = s.value("cell_length_m", cfg.grid.cell_length_m);
            cfg.grid.spray_rate = s.value("spray_rate", cfg.grid.spray_rate);
            cfg.grid.no_spray_rate = s.value("no_spray_rate", cfg.grid.no_spray_rate);
            if (s.contains("rule")) cfg.grid.trigger_rule = parse_rule(s["rule"]);
        }
        if (j.contains("sprayer")) {
            const json& s = j["sprayer"];
            reject_unknown_keys(s,
                                {"boom_width_m", "nozzle_spacing_m", "nozzle_count",
                                 "speed_mps", "control_rate_hz", "actuation_delay_s",
                                 "off_delay_s", "default_rate", "position_sigma_m"},
                                "config.sprayer");
            cfg.sprayer.boom_width_m = s.value("boom_width_m", cfg.sprayer.boom_width_m);
            cfg.sprayer.nozzle_spacing_m =
                s.value("nozzle_spacing_m", cfg.sprayer.nozzle_spacing_m);
            cfg.sprayer.nozzle_count = s.value("nozzle_count", cfg.sprayer.nozzle_count);
            cfg.sprayer.speed_mps = s.value("speed_mps", cfg.sprayer.speed_mps);
            cfg.sprayer.control_rate_hz =
                s.value("control_rate_hz", cfg.sprayer.control_rate_hz);
            cfg.sprayer.actuation_delay_s =
                s.value("actuation_delay_s", cfg.sprayer.actuation_delay_s);
            if (s.contains("off_delay_s")) {
                cfg.sprayer.off_delay_s = s["off_delay_s"].get<double>();
            }
            cfg.sprayer.default_rate = s.value("default_rate", cfg.sprayer.default_rate);
            cfg.sprayer.position_sigma_m =
                s.value("position_sigma_m", cfg.sprayer.position_sigma_m);
        }
        if (j.contains("sim_raster")) {
            const json& s = j["sim_raster"];
            reject_unknown_keys(s, {"pixel_size_m"}, "config.sim_raster");
            cfg.sim_raster.pixel_size_m = s.value("pixel_size_m", cfg.sim_raster.pixel_size_m);
        }
        if (j.contains("plots")) {
            for (const json& p : j["plots"]) {
                reject_unknown_keys(p, {"id", "treatment", "rect"}, "config.plots[]");
                PlotDef def;
                def.id = p.at("id").get<std::string>();
                def.treatment = p.value("treatment", std::string());
                const auto& r = p.at("rect");
                if (!r.is_array() || r.size() != 4) {
                    throw ConfigError("config.plots[]: rect must be [min_x,min_y,max_x,max_y]");
                }
                def.rect = Rect{r[0].get<double>(), r[1].get<double>(), r[2].get<double>(),
                                r[3].get<double>()};
                cfg.plots.push_back(std::move(def));
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.segmentation.validate();
    cfg.tiling.validate();
    cfg.peaks.validate();
    cfg.buffer.validate();
    cfg.grid.validate();
    cfg.sprayer.validate();
    return cfg;
}

// Tracks the artifacts a stage writes. If the stage aborts, whatever it
// managed to put on disk gets a .partial suffix so downstream tooling never
// mistakes it for a complete output.
class StageOutputs {
public:
    std::string path(const std::string& final_path) {
        written_.push_back(final_path);
        return final_path;
    }
    void mark_partial() const {
        for (const std::string& p : written_) {
            std::error_code ec;
            if (std::filesystem::exists(p, ec)) {
                std::filesystem::rename(p, p + ".partial", ec);
            }
        }
    }

private:
    std::vector<std::string> written_;
};

template <typename Fn>
void run_stage(const std::string& name, Fn&& body) {
    StageOutputs out;
    try {
        body(out);
    } catch (...) {
        out.mark_partial();
        std::fprintf(stderr, "pipeline: stage %s failed\n", name.c_str());
        throw;
    }
}

void run_pipeline(const PipelineConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    auto art = [&](const char* name) { return (fs::path(cfg.output_dir) / name).string(); };

    GeoRaster input_rgb;
    std::optional<GroundTruth> truth;
    run_stage("input", [&](StageOutputs& out) {
        if (cfg.recipe) {
            const SynthField field = generate(*cfg.recipe);
            truth = field.truth;
            input_rgb = mask_to_rgb(field.mask);
            write_truth_json(field.truth, out.path(art("00_truth.json")));
            write_raster(input_rgb, out.path(art("01_input.tif")));
        } else {
            input_rgb = read_raster(cfg.input_raster);
            if (input_rgb.bands() != 3) {
                throw DataError(cfg.input_raster + ": pipeline input must be a 3-band raster");
            }
        }
    });

    BinaryMask veg;
    run_stage("segment", [&](StageOutputs& out) {
        veg = binarize(exgi(input_rgb, cfg.segmentation), cfg.segmentation);
        write_raster(veg, out.path(art("02_veg_mask.tif")));
        render_mask_png(veg, out.path(art("02_veg_mask.png")));
    });

    RowDetectionResult rows;
    run_stage("detect-rows", [&](StageOutputs& out) {
        rows = detect_rows(veg, cfg.tiling, cfg.peaks, cfg.orientation, cfg.threads);
        write_raster(rows.line_mask, out.path(art("03_row_lines.tif")));
        write_geojson(segments_to_features(rows.segments, cfg.orientation),
                      out.path(art("03_row_segments.geojson")));
    });

    BinaryMask weeds;
    run_stage("weedmap", [&](StageOutputs& out) {
        weeds = weed_mask(veg, buffer_rows(rows, cfg.orientation, cfg.buffer));
        write_raster(weeds, out.path(art("04_weed_mask.tif")));
        render_mask_png(weeds, out.path(art("04_weed_mask.png")), true);
    });

    std::vector<PlotDef> plots = cfg.plots;
    if (plots.empty()) {
        const GeoTransform& t = veg.transform();
        PlotDef def;
        def.id = "plot-1";
        def.rect = Rect{t.origin_x, t.origin_y - veg.height() * t.pixel_size_y,
                        t.origin_x + veg.width() * t.pixel_size_x, t.origin_y};
        plots.push_back(std::move(def));
    }

    std::vector<PrescriptionMap> maps;
    run_stage("prescribe", [&](StageOutputs& out) {
        maps = prescribe_all(weeds, plots, cfg.grid);
        write_geojson(all_prescription_features(maps), out.path(art("05_rx.geojson")));
        render_prescription_png(maps, out.path(art("05_rx.png")));
    });

    AsAppliedMap applied;
    run_stage("simulate", [&](StageOutputs& out) {
        Rect field = plots.front().rect;
        for (const PlotDef& p : plots) {
            field.min_x = std::min(field.min_x, p.rect.min_x);
            field.min_y = std::min(field.min_y, p.rect.min_y);
            field.max_x = std::max(field.max_x, p.rect.max_x);
            field.max_y = std::max(field.max_y, p.rect.max_y);
        }
        applied = simulate(maps, cfg.sprayer, plan_passes(field, cfg.sprayer), cfg.sim_raster);
        for (const std::string& w : applied.warnings) {
            std::fprintf(stderr, "warning: %s\n", w.c_str());
        }
        write_raster(applied.raster, out.path(art("06_as_applied.tif")));
        write_tick_log_csv(applied.ticks, out.path(art("06_ticks.csv")));
    });

    run_stage("evaluate", [&](StageOutputs& out) {
        json report;
        if (truth) {
            const MatchCounts counts =
                match_segments(rows.segments, truth->rows, veg.width(), veg.height(),
                               cfg.tiling, cfg.orientation);
            const DetectionReport det =
                precision_accuracy(counts.tp, 0, counts.fp, counts.fn);
            report["detection"] = {{"tp", det.tp},
                                   {"tn", det.tn},
                                   {"fp", det.fp},
                                   {"fn", det.fn},
                                   {"precision", det.precision},
                                   {"accuracy", det.accuracy}};
            print_detection_table({{"ALL", det}});

            const GridConfig& g = cfg.grid;
            std::size_t mismatches = 0, sprayed = 0;
            for (std::size_t p = 0; p < plots.size(); ++p) {
                const PrescriptionMap oracle = truth_to_rx(*truth, veg.transform(),
                                                           plots[p].rect, g, plots[p].id);
                for (std::size_t c = 0; c < maps[p].cells.size(); ++c) {
                    mismatches += maps[p].cells[c].rate != oracle.cells[c].rate;
                    sprayed += maps[p].cells[c].rate > 0.0;
                }
            }
            report["rx_oracle"] = {{"sprayed_cells", sprayed}, {"mismatches", mismatches}};
            std::printf("rx cells vs weed-record oracle: %zu sprayed, %zu mismatch(es)\n",
                        sprayed, mismatches);
        }

        const ApplicationReport app = application_from_maps(maps, applied);
        report["application"] = application_report_json(app);
        print_application_table(app);
        write_text_file(out.path(art("07_report.json")), report.dump(2) + "\n");
    });

    std::printf("pipeline: artifacts in %s\n", cfg.output_dir.c_str());
}

}  // namespace

// ---------------------------------------------------------------------------
// main
// ---------------------------------------------------------------------------

int main(int argc, char** argv) {
    CLI::App app{"corn-row detection and site-specific spray prescription toolkit"};
    app.require_subcommand(1);

    SynthArgs synth;
    std::uint64_t synth_seed = 0;
    auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic field with ground truth");
    cmd_synth->add_option("--recipe", synth.recipe_path, "field recipe JSON");
    auto* seed_opt = cmd_synth->add_option("--seed", synth_seed, "override the recipe RNG seed");
    cmd_synth->add_option("--out-mask", synth.out_mask, "output vegetation mask raster");
    cmd_synth->add_option("--out-truth", synth.out_truth, "output ground-truth JSON");
    cmd_synth->add_option("--out-rgb", synth.out_rgb, "optional painted RGB raster");

    SegmentArgs seg;
    auto* cmd_segment = app.add_subcommand("segment", "excess-green-index vegetation mask");
    cmd_segment->add_option("--input", seg.input, "input RGB raster")->required();
    cmd_segment->add_option("--threshold", seg.threshold, "index threshold (default 0.08)");
    cmd_segment->add_option("--output", seg.output, "output binary mask")->required();

    DetectArgs det;
    auto* cmd_detect = app.add_subcommand("detect-rows", "projection-profile crop row detector");
    cmd_detect->add_option("--mask", det.mask, "vegetation mask raster")->required();
    cmd_detect->add_option("--tile", det.tile, "tile size WxH (default 3000x2000)");
    cmd_detect->add_option("--orientation", det.orientation, "horizontal or vertical");
    cmd_detect->add_option("--row-spacing-m", det.row_spacing_m, "nominal crop row spacing");
    cmd_detect->add_option("--min-distance-px", det.min_distance_px,
                           "peak separation; 0 = derive from spacing, 1 = none");
    cmd_detect->add_option("--output-lines", det.output_lines, "detected-line raster");
    cmd_detect->add_option("--output-segments", det.output_segments, "segment GeoJSON");
    cmd_detect->add_option("--threads", det.threads, "worker threads (0 = auto)");

    WeedmapArgs wm;
    auto* cmd_weedmap = app.add_subcommand("weedmap", "vegetation minus buffered crop rows");
    cmd_weedmap->add_option("--veg", wm.veg, "vegetation mask raster")->required();
    cmd_weedmap->add_option("--rows", wm.rows, "row segment GeoJSON")->required();
    cmd_weedmap->add_option("--buffer-in", wm.buffer_in, "row buffer half-width, inches");
    cmd_weedmap->add_option("--output", wm.output, "output weed mask")->required();

    PrescribeArgs rx;
    auto* cmd_prescribe = app.add_subcommand("prescribe", "gridded spray prescription");
    cmd_prescribe->add_option("--weeds", rx.weeds, "weed mask raster")->required();
    cmd_prescribe->add_option("--plot", rx.plot, "plot polygon GeoJSON")->required();
    cmd_prescribe->add_option("--cell-ft", rx.cell_ft, "cell size WxL in feet");
    cmd_prescribe->add_option("--rule", rx.rule, "any-overlap or fully-within");
    cmd_prescribe->add_option("--rates", rx.rates, "spray,no-spray rates");
    cmd_prescribe->add_option("--output", rx.output, "prescription GeoJSON")->required();

    SimulateArgs sim;
    auto* cmd_simulate = app.add_subcommand("simulate", "boom sprayer pass simulation");
    cmd_simulate->add_option("--rx", sim.rx, "prescription GeoJSON")->required();
    cmd_simulate->add_option("--speed-mph", sim.speed_mph, "ground speed");
    cmd_simulate->add_option("--hz", sim.hz, "control tick rate");
    cmd_simulate->add_option("--delay-s", sim.delay_s, "valve actuation delay");
    double off_delay_tmp = 0.0;
    auto* off_opt = cmd_simulate->add_option("--off-delay-s", off_delay_tmp,
                                             "separate on->off delay override");
    cmd_simulate->add_option("--boom-ft", sim.boom_ft, "boom width, feet");
    cmd_simulate->add_option("--nozzle-ft", sim.nozzle_ft, "nozzle spacing, feet");
    cmd_simulate->add_option("--default-rate", sim.default_rate, "rate outside the map");
    cmd_simulate->add_option("--pixel-m", sim.pixel_m, "as-applied raster pixel size");
    cmd_simulate->add_option("--position-sigma-m", sim.position_sigma_m,
                             "Gaussian position error");
    cmd_simulate->add_option("--seed", sim.seed, "noise seed");
    cmd_simulate->add_option("--output", sim.output, "as-applied raster");
    cmd_simulate->add_option("--log", sim.log, "tick log CSV");

    auto* cmd_eval = app.add_subcommand("evaluate", "metric reports");
    cmd_eval->require_subcommand(1);
    std::string eval_json;

    long long ev_tp = -1, ev_tn = 0, ev_fp = -1, ev_fn = -1;
    std::string ev_segments, ev_truth, ev_mask, ev_tile = "3000x2000",
                ev_orientation = "horizontal";
    int ev_tol = 3;
    auto* cmd_ev_det = cmd_eval->add_subcommand("detection", "TP/FP/FN precision and accuracy");
    cmd_ev_det->add_option("--tp", ev_tp, "true positives");
    cmd_ev_det->add_option("--tn", ev_tn, "true negatives (structurally 0)");
    cmd_ev_det->add_option("--fp", ev_fp, "false positives");
    cmd_ev_det->add_option("--fn", ev_fn, "false negatives");
    cmd_ev_det->add_option("--segments", ev_segments, "detected segment GeoJSON");
    cmd_ev_det->add_option("--truth", ev_truth, "ground-truth JSON");
    cmd_ev_det->add_option("--mask", ev_mask, "raster the segments came from");
    cmd_ev_det->add_option("--tile", ev_tile, "tile size used for detection");
    cmd_ev_det->add_option("--orientation", ev_orientation, "row orientation");
    cmd_ev_det->add_option("--tol-px", ev_tol, "match tolerance in pixels");
    cmd_ev_det->add_option("--json", eval_json, "also write the JSON report here");

    double ev_expected = -1.0, ev_measured = -1.0;
    std::string ev_rx, ev_applied;
    auto* cmd_ev_app = cmd_eval->add_subcommand("application", "expected vs as-applied no-spray");
    cmd_ev_app->add_option("--expected", ev_expected, "expected no-spray area, m2");
    cmd_ev_app->add_option("--measured", ev_measured, "measured no-spray area, m2");
    cmd_ev_app->add_option("--rx", ev_rx, "prescription GeoJSON");
    cmd_ev_app->add_option("--applied", ev_applied, "as-applied raster");
    cmd_ev_app->add_option("--json", eval_json, "also write the JSON report here");

    std::string ev_a, ev_b, ev_totals;
    auto* cmd_ev_loss = cmd_eval->add_subcommand("area-loss", "no-spray loss between revisions");
    cmd_ev_loss->add_option("--a", ev_a, "original prescription GeoJSON");
    cmd_ev_loss->add_option("--b", ev_b, "modified prescription GeoJSON");
    cmd_ev_loss->add_option("--totals", ev_totals, "raw totals a,b in m2");
    cmd_ev_loss->add_option("--json", eval_json, "also write the JSON report here");

    std::string ev_weeds, ev_plots, ev_sums, ev_ta = "SSWC", ev_tb = "NO-SSWC";
    auto* cmd_ev_eff = cmd_eval->add_subcommand("effectiveness", "weed area ratio by treatment");
    cmd_ev_eff->add_option("--weeds", ev_weeds, "post-treatment weed mask");
    cmd_ev_eff->add_option("--plots", ev_plots, "plot GeoJSON with treatment properties");
    cmd_ev_eff->add_option("--sums", ev_sums, "raw per-treatment sums a,b in m2");
    cmd_ev_eff->add_option("--treatment-a", ev_ta, "numerator treatment label");
    cmd_ev_eff->add_option("--treatment-b", ev_tb, "denominator treatment label");
    cmd_ev_eff->add_option("--json", eval_json, "also write the JSON report here");

    std::string pipe_config, pipe_output_dir, pipe_input;
    int pipe_threads = -1;
    auto* cmd_pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    cmd_pipeline->add_option("--config", pipe_config, "pipeline config JSON")->required();
    cmd_pipeline->add_option("--output-dir", pipe_output_dir, "override config output_dir");
    cmd_pipeline->add_option("--input", pipe_input, "override config input raster");
    cmd_pipeline->add_option("--threads", pipe_threads, "override config thread count");

    std::string rend_mask, rend_rx, rend_out;
    bool rend_weed_style = false;
    double rend_ppm = 10.0;
    auto* cmd_render = app.add_subcommand("render", "PNG renderings for inspection");
    cmd_render->add_option("--mask", rend_mask, "binary mask raster");
    cmd_render->add_option("--rx", rend_rx, "prescription GeoJSON");
    cmd_render->add_flag("--weed-style", rend_weed_style, "paint mask 1-pixels red");
    cmd_render->add_option("--ppm", rend_ppm, "prescription pixels per meter");
    cmd_render->add_option("--output", rend_out, "output PNG")->required();

    try {
        app.parse(argc, argv);

        if (*cmd_synth) {
            if (!seed_opt->empty()) synth.seed = synth_seed;
            run_synth(synth);
        } else if (*cmd_segment) {
            run_segment(seg);
        } else if (*cmd_detect) {
            run_detect_cli(det);
        } else if (*cmd_weedmap) {
            run_weedmap_cli(wm);
        } else if (*cmd_prescribe) {
            run_prescribe_cli(rx);
        } else if (*cmd_simulate) {
            if (!off_opt->empty()) sim.off_delay_s = off_delay_tmp;
            run_simulate_cli(sim);
        } else if (*cmd_ev_det) {
            DetectionReport rep;
            if (!ev_segments.empty()) {
                if (ev_truth.empty() || ev_mask.empty()) {
                    throw ConfigError("evaluate detection: --segments needs --truth and --mask");
                }
                const auto [segments, seg_orient] = segments_from_geojson(ev_segments);
                (void)seg_orient;
                const GeoRaster mask = read_raster(ev_mask);
                const MatchCounts counts = match_segments(
                    segments, read_truth_json(ev_truth).rows, mask.width(), mask.height(),
                    parse_tile(ev_tile), parse_orientation(ev_orientation), ev_tol);
                rep = precision_accuracy(counts.tp, 0, counts.fp, counts.fn);
            } else {
                if (ev_tp < 0 || ev_fp < 0 || ev_fn < 0) {
                    throw ConfigError(
                        "evaluate detection: give --tp/--fp/--fn or --segments/--truth/--mask");
                }
                rep = precision_accuracy(ev_tp, ev_tn, ev_fp, ev_fn);
            }
            print_detection_table({{"ALL", rep}});
            maybe_write_json(eval_json, json{{"tp", rep.tp},
                                             {"tn", rep.tn},
                                             {"fp", rep.fp},
                                             {"fn", rep.fn},
                                             {"precision", rep.precision},
                                             {"accuracy", rep.accuracy}});
        } else if (*cmd_ev_app) {
            ApplicationReport rep;
            if (!ev_rx.empty()) {
                if (ev_applied.empty()) {
                    throw ConfigError("evaluate application: --rx needs --applied");
                }
                const auto maps = prescriptions_from_features(read_geojson(ev_rx));
                AsAppliedMap applied;
                applied.raster = read_raster(ev_applied);
                rep = application_from_maps(maps, applied);
            } else {
                if (ev_expected < 0.0 || ev_measured < 0.0) {
                    throw ConfigError(
                        "evaluate application: give --expected/--measured or --rx/--applied");
                }
                ApplicationRow row;
                row.plot_id = "ALL";
                row.expected_no_spray_m2 = ev_expected;
                row.measured_no_spray_m2 = ev_measured;
                row.sprayed_in_no_spray_m2 = ev_expected - ev_measured;
                rep = application_report({row});
            }
            print_application_table(rep);
            maybe_write_json(eval_json, application_report_json(rep));
        } else if (*cmd_ev_loss) {
            std::vector<PlotArea> a, b;
            if (!ev_totals.empty()) {
                const auto [ta, tb] = parse_pair(ev_totals, ',', "--totals");
                a.push_back({"TOTAL", ta});
                b.push_back({"TOTAL", tb});
            } else {
                if (ev_a.empty() || ev_b.empty()) {
                    throw ConfigError("evaluate area-loss: give --a and --b, or --totals");
                }
                for (const auto& m : prescriptions_from_features(read_geojson(ev_a))) {
                    a.push_back({m.plot_id, no_spray_area(m)});
                }
                for (const auto& m : prescriptions_from_features(read_geojson(ev_b))) {
                    b.push_back({m.plot_id, no_spray_area(m)});
                }
            }
            const AreaLossReport rep = area_loss(a, b);
            print_area_loss_table(rep);
            json per = json::array();
            for (const AreaLossRow& r : rep.per_plot) {
                per.push_back({{"plot", r.plot_id},
                               {"a_m2", r.a_m2},
                               {"b_m2", r.b_m2},
                               {"loss_m2", r.loss_m2},
                               {"loss_pct", r.loss_pct}});
            }
            maybe_write_json(eval_json, json{{"per_plot", per},
                                             {"total",
                                              {{"a_m2", rep.total.a_m2},
                                               {"b_m2", rep.total.b_m2},
                                               {"loss_m2", rep.total.loss_m2},
                                               {"loss_pct", rep.total.loss_pct}}}});
        } else if (*cmd_ev_eff) {
            if (!ev_sums.empty()) {
                const auto [sa, sb] = parse_pair(ev_sums, ',', "--sums");
                const double ratio = effectiveness_ratio(sa, sb);
                std::printf("sum(%s) = %.2f m2   sum(%s) = %.2f m2   ratio = %.2f\n",
                            ev_ta.c_str(), sa, ev_tb.c_str(), sb, ratio);
                maybe_write_json(eval_json,
                                 json{{"sum_a_m2", sa}, {"sum_b_m2", sb}, {"ratio", ratio}});
            } else {
                if (ev_weeds.empty() || ev_plots.empty()) {
                    throw ConfigError(
                        "evaluate effectiveness: give --weeds and --plots, or --sums");
                }
                const EffectivenessReport rep =
                    effectiveness(load_mask(ev_weeds), plots_from_geojson(ev_plots, true),
                                  ev_ta, ev_tb);
                print_effectiveness_table(rep);
                json per = json::array();
                for (const EffectivenessRow& r : rep.per_plot) {
                    per.push_back({{"plot", r.plot_id},
                                   {"treatment", r.treatment},
                                   {"weed_area_m2", r.weed_area_m2}});
                }
                maybe_write_json(eval_json, json{{"per_plot", per},
                                                 {"sum_a_m2", rep.sum_a_m2},
                                                 {"sum_b_m2", rep.sum_b_m2},
                                                 {"ratio", rep.ratio}});
            }
        } else if (*cmd_pipeline) {
            PipelineConfig cfg =
                pipeline_config_from_json(load_json_file(pipe_config, "--config"));
            if (!pipe_output_dir.empty()) cfg.output_dir = pipe_output_dir;
            if (!pipe_input.empty()) {
                cfg.input_raster = pipe_input;
                cfg.recipe.reset();
            }
            if (pipe_threads >= 0) cfg.threads = pipe_threads;
            run_pipeline(cfg);
        } else if (*cmd_render) {
            if (rend_mask.empty() == rend_rx.empty()) {
                throw ConfigError("render: give exactly one of --mask or --rx");
            }
            if (!rend_mask.empty()) {
                render_mask_png(load_mask(rend_mask), rend_out, rend_weed_style);
            } else {
                render_prescription_png(prescriptions_from_features(read_geojson(rend_rx)),
                                        rend_out, rend_ppm);
            }
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        switch (e.kind()) {
            case ErrorKind::config: return 2;
            case ErrorKind::data: return 3;
            case ErrorKind::internal: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 4;
    }
}
