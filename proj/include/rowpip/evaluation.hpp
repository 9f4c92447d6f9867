#pragma once

#include <string>
#include <vector>

#include "rowpip/geojson.hpp"
#include "rowpip/geo_raster.hpp"
#include "rowpip/row_detection.hpp"

namespace rowpip {

struct DetectionReport {
    long long tp = 0, tn = 0, fp = 0, fn = 0;
    double precision = 0.0;
    double accuracy = 0.0;
};

// precision = tp/(tp+fp); accuracy = (tp+tn)/(tp+fn+tn+fp). TN stays in the
// formula for fidelity even though this pipeline never predicts background.
// A zero denominator raises a DataError rather than yielding 0 or NaN.
DetectionReport precision_accuracy(long long tp, long long tn, long long fp, long long fn);

// A truth corn row as a pixel-space polyline (vertices in full-raster pixel
// coordinates, ordered along the row axis).
using RowPolyline = std::vector<std::pair<double, double>>;

// Mechanized stand-in for a visual TP/FP/FN count of row lines. Truth rows are
// split into per-tile spans; a detected segment matches a span when its peak
// lies within tol_px of the truth centerline over at least half the span.
// Each span takes at most one segment (closest first); leftover detections
// are FPs (double lines), leftover spans FNs (missed rows).
struct MatchCounts {
    long long tp = 0, fp = 0, fn = 0;
};
MatchCounts match_segments(const std::vector<RowSegment>& detected,
                           const std::vector<RowPolyline>& truth_rows,
                           int raster_width, int raster_height, const TileSpec& spec,
                           RowOrientation orientation, int tol_px = 3);

struct ApplicationRow {
    std::string plot_id;
    double expected_no_spray_m2 = 0.0;  // from the Rx map
    double measured_no_spray_m2 = 0.0;  // from the as-applied map
    double sprayed_in_no_spray_m2 = 0.0;
    double sprayed_pct = 0.0;
};

struct ApplicationReport {
    double expected_no_spray_m2 = 0.0;
    double measured_no_spray_m2 = 0.0;
    double accuracy_pct = 0.0;
    double relative_error = 0.0;
    std::vector<ApplicationRow> per_plot;
};

// accuracy_pct = measured/expected * 100; relative_error = (measured -
// expected)/expected. expected <= 0 is a domain error.
ApplicationReport application_accuracy(double expected_m2, double measured_m2);

ApplicationReport application_report(const std::vector<ApplicationRow>& rows);

struct AreaLossRow {
    std::string plot_id;
    double a_m2 = 0.0;     // original no-spray area
    double b_m2 = 0.0;     // modified no-spray area
    double loss_m2 = 0.0;  // a - b
    double loss_pct = 0.0;
};

struct AreaLossReport {
    std::vector<AreaLossRow> per_plot;
    AreaLossRow total;
};

struct PlotArea {
    std::string plot_id;
    double no_spray_m2 = 0.0;
};

// Per-plot and total no-spray area loss between two prescription revisions.
// Plot id sets must match; the error lists any unmatched ids.
AreaLossReport area_loss(const std::vector<PlotArea>& a, const std::vector<PlotArea>& b);

struct PlotDef {
    std::string id;
    std::string treatment;
    Rect rect;
};

struct EffectivenessRow {
    std::string plot_id;
    std::string treatment;
    double weed_area_m2 = 0.0;
};

struct EffectivenessReport {
    std::vector<EffectivenessRow> per_plot;
    std::string treatment_a, treatment_b;
    double sum_a_m2 = 0.0, sum_b_m2 = 0.0;
    double ratio = 0.0;  // sum_a / sum_b
};

// Weed area per plot (mask pixels whose centers fall in the plot rectangle),
// summed per treatment; ratio of treatment_a over treatment_b. Exactly two
// treatments must be present and each needs at least one plot.
EffectivenessReport effectiveness(const BinaryMask& weeds_post, const std::vector<PlotDef>& plots,
                                  const std::string& treatment_a = "SSWC",
                                  const std::string& treatment_b = "NO-SSWC");

double effectiveness_ratio(double sum_a_m2, double sum_b_m2);

}  // namespace rowpip
