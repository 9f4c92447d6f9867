#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rowpip/evaluation.hpp"
#include "rowpip/geo_raster.hpp"
#include "rowpip/weed_mapping.hpp"

namespace rowpip {

// Deterministic synthetic corn field: the ground-truth oracle behind the
// detection and mapping test suites. Same seed, same bits, any platform.
struct FieldRecipe {
    int width_px = 3000;
    int height_px = 2000;
    double pixel_size_m = 0.0063;
    double row_spacing_m = 0.762;
    RowOrientation row_orientation = RowOrientation::horizontal;
    double plant_diameter_min_m = 0.05;
    double plant_diameter_max_m = 0.15;
    double plant_step_m = 0.178;     // along-row seed spacing
    double plant_dropout_prob = 0.0;
    double row_curvature_px = 0.0;   // max lateral drift over the field
    int weed_count = 0;
    double weed_diameter_min_m = 0.06;
    double weed_diameter_max_m = 0.20;
    // Keep weeds clear of the row-buffer band (plus a safety margin) so the
    // buffered removal never clips weed pixels.
    bool weed_clearance = true;
    double buffer_clearance_m = 0.0889;
    std::uint64_t rng_seed = 0;
    double origin_x = 0.0;
    double origin_y = 0.0;  // 0 = derive as height_px * pixel_size_m
    std::string crs_label = "local-meters";

    void validate() const;
    GeoTransform transform() const;
};

struct WeedRecord {
    double cx_px = 0.0;  // disc center, pixel coordinates
    double cy_px = 0.0;
    double diameter_px = 0.0;
    std::vector<std::pair<int, int>> pixels;  // (row,col) centers inside the disc
};

struct GroundTruth {
    std::vector<RowPolyline> rows;  // per-row centerline, pixel coords
    std::vector<WeedRecord> weeds;
};

struct SynthField {
    BinaryMask mask;
    GroundTruth truth;
};

// Plants are filled discs stepped along each row centerline (dropout removes
// individual plants; curvature bends the centerline as a smooth half-cosine
// drift). Weeds are discs at uniform random inter-row positions. Placement
// that cannot satisfy the clearance rules within bounded retries is a
// generation error.
SynthField generate(const FieldRecipe& recipe);

// Brute-force prescription straight from the weed records, bypassing the
// raster pipeline entirely; the independent oracle for assign_rates.
PrescriptionMap truth_to_rx(const GroundTruth& truth, const GeoTransform& transform,
                            const Rect& plot, const GridConfig& grid,
                            const std::string& plot_id = {});

// Truth JSON: {"rows":[[[x,y],...],...], "weeds":[{"cx","cy","d"},...]},
// pixel units throughout. Weed pixel sets are re-derived on load by the same
// center-inside-circle test the generator uses.
void write_truth_json(const GroundTruth& truth, const std::string& path);
GroundTruth read_truth_json(const std::string& path);

// Paints an RGB image from a mask (vegetation green on soil brown) so the
// full pipeline, segmentation included, can run on synthetic fields.
GeoRaster mask_to_rgb(const BinaryMask& mask);

}  // namespace rowpip
