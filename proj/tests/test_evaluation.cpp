#include <string>
#include <vector>

#include "doctest.h"
#include "rowpip/evaluation.hpp"

using namespace rowpip;

namespace {

RowSegment seg(int tile_col, int tile_row, int peak) {
    RowSegment s;
    s.tile_col_index = tile_col;
    s.tile_row_index = tile_row;
    s.peak_px = peak;
    return s;
}

// Straight horizontal truth row across the full raster width.
RowPolyline flat_row(double cross, double width) {
    return {{0.0, cross}, {width - 1.0, cross}};
}

}  // namespace

TEST_CASE("precision and accuracy from confusion counts") {
    const DetectionReport r = precision_accuracy(2313, 0, 15, 8);
    CHECK(r.precision == doctest::Approx(0.993557).epsilon(1e-5));
    CHECK(r.accuracy == doctest::Approx(0.990154).epsilon(1e-5));
    CHECK(r.tp == 2313);
    CHECK(r.fp == 15);
    CHECK(r.fn == 8);

    // Six field plots, frozen by hand from the counts.
    struct Case {
        long long tp, fp, fn;
        double precision, accuracy;
    };
    const Case cases[] = {
        {392, 3, 1, 0.992405, 0.989899}, {382, 1, 3, 0.997389, 0.989637},
        {386, 4, 0, 0.989744, 0.989744}, {385, 2, 1, 0.994832, 0.992268},
        {384, 4, 2, 0.989691, 0.984615}, {384, 1, 1, 0.997403, 0.994819},
    };
    for (const Case& c : cases) {
        const DetectionReport p = precision_accuracy(c.tp, 0, c.fp, c.fn);
        CHECK(p.precision == doctest::Approx(c.precision).epsilon(1e-5));
        CHECK(p.accuracy == doctest::Approx(c.accuracy).epsilon(1e-5));
    }

    const DetectionReport mixed = precision_accuracy(2, 5, 1, 3);
    CHECK(mixed.precision == doctest::Approx(2.0 / 3.0));
    CHECK(mixed.accuracy == doctest::Approx(7.0 / 11.0));
    CHECK_THROWS_AS(precision_accuracy(0, 5, 0, 3), DataError);  // no positive predictions
    CHECK_THROWS_AS(precision_accuracy(0, 0, 0, 0), DataError);
    CHECK_THROWS_AS(precision_accuracy(-1, 0, 1, 0), DataError);
}

TEST_CASE("segment matching: exact rows count as true positives per tile") {
    const TileSpec tiles{100, 80};
    // 100 px wide, 160 px tall: one tile column, two tile rows.
    const std::vector<RowPolyline> truth = {flat_row(20.5, 100), flat_row(100.5, 100)};
    const std::vector<RowSegment> det = {seg(0, 0, 20), seg(0, 1, 100)};
    const MatchCounts m =
        match_segments(det, truth, 100, 160, tiles, RowOrientation::horizontal);
    CHECK(m.tp == 2);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
}

TEST_CASE("segment matching: misses, extras, and double lines") {
    const TileSpec tiles{100, 80};
    const std::vector<RowPolyline> truth = {flat_row(20.5, 100), flat_row(50.5, 100)};

    // One truth row missed entirely.
    MatchCounts m = match_segments({seg(0, 0, 20)}, truth, 100, 80, tiles,
                                   RowOrientation::horizontal);
    CHECK(m.tp == 1);
    CHECK(m.fn == 1);
    CHECK(m.fp == 0);

    // A double line: two detections near one truth row; the closer one wins.
    m = match_segments({seg(0, 0, 20), seg(0, 0, 23), seg(0, 0, 50)}, truth, 100, 80,
                       tiles, RowOrientation::horizontal);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 0);

    // Detection in a tile with no truth at all.
    m = match_segments({seg(0, 0, 20), seg(0, 0, 50), seg(0, 1, 90)}, truth, 100, 160,
                       tiles, RowOrientation::horizontal);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
}

TEST_CASE("segment matching: the 3 px tolerance is inclusive") {
    const TileSpec tiles{100, 80};
    const std::vector<RowPolyline> truth = {flat_row(20.5, 100)};

    MatchCounts m = match_segments({seg(0, 0, 23)}, truth, 100, 80, tiles,
                                   RowOrientation::horizontal);
    CHECK(m.tp == 1);  // |23.5 - 20.5| = 3 exactly

    m = match_segments({seg(0, 0, 24)}, truth, 100, 80, tiles,
                       RowOrientation::horizontal);
    CHECK(m.tp == 0);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
}

TEST_CASE("segment matching: the peak must track at least half the span") {
    const TileSpec tiles{100, 80};
    // Truth sits at cross 40.5 for the first 60 columns, then jumps far away.
    const std::vector<RowPolyline> mostly = {
        {{0.0, 40.5}, {59.0, 40.5}, {60.0, 10.5}, {99.0, 10.5}}};
    MatchCounts m = match_segments({seg(0, 0, 40)}, mostly, 100, 80, tiles,
                                   RowOrientation::horizontal);
    CHECK(m.tp == 1);

    // Same shape but the near stretch covers under half the span.
    const std::vector<RowPolyline> barely = {
        {{0.0, 40.5}, {39.0, 40.5}, {40.0, 10.5}, {99.0, 10.5}}};
    m = match_segments({seg(0, 0, 40)}, barely, 100, 80, tiles,
                       RowOrientation::horizontal);
    CHECK(m.tp == 0);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
}

TEST_CASE("segment matching: a full-width row needs a hit in every tile column") {
    const TileSpec tiles{100, 80};
    const std::vector<RowPolyline> truth = {flat_row(20.5, 200)};
    const MatchCounts m = match_segments({seg(0, 0, 20)}, truth, 200, 80, tiles,
                                         RowOrientation::horizontal);
    CHECK(m.tp == 1);
    CHECK(m.fn == 1);  // the span in the second tile column went undetected
}

TEST_CASE("segment matching: vertical orientation swaps the axes") {
    const TileSpec tiles{80, 100};
    // Vertical rows: along = y, cross = x. One row at x = 20.5 over 100 rows.
    const std::vector<RowPolyline> truth = {{{20.5, 0.0}, {20.5, 99.0}}};
    const MatchCounts m = match_segments({seg(0, 0, 20)}, truth, 80, 100, tiles,
                                         RowOrientation::vertical);
    CHECK(m.tp == 1);
    CHECK(m.fp == 0);
    CHECK(m.fn == 0);
}

TEST_CASE("segment matching: input validation") {
    const TileSpec tiles{100, 80};
    CHECK_THROWS_AS(match_segments({}, {{{0.0, 1.0}}}, 100, 80, tiles,
                                   RowOrientation::horizontal),
                    DataError);  // single-point truth row
    CHECK_THROWS_AS(match_segments({}, {}, 100, 80, tiles,
                                   RowOrientation::horizontal, -1),
                    ConfigError);
}

TEST_CASE("application accuracy from expected and measured totals") {
    const ApplicationReport r = application_accuracy(10098.1, 7919.5);
    CHECK(r.accuracy_pct == doctest::Approx(78.4256).epsilon(1e-4));
    CHECK(r.relative_error == doctest::Approx(-0.215744).epsilon(1e-4));
    CHECK(r.expected_no_spray_m2 == 10098.1);
    CHECK(r.measured_no_spray_m2 == 7919.5);

    CHECK(application_accuracy(100.0, 100.0).accuracy_pct == doctest::Approx(100.0));
    CHECK_THROWS_AS(application_accuracy(0.0, 5.0), DataError);
    CHECK_THROWS_AS(application_accuracy(-1.0, 5.0), DataError);
}

TEST_CASE("application report aggregates plots and fills sprayed percentages") {
    std::vector<ApplicationRow> rows(6);
    const char* ids[] = {"P1", "P2", "P3", "P4", "P5", "P6"};
    const double expected[] = {1822.3, 2648.9, 1591.2, 1182.3, 1688.9, 1164.5};
    const double measured[] = {1600.1, 2209.1, 1146.1, 841.8, 1280.7, 841.8};
    const double pct[] = {12.2, 16.6, 28.0, 28.8, 24.2, 27.7};
    for (int i = 0; i < 6; ++i) {
        rows[i].plot_id = ids[i];
        rows[i].expected_no_spray_m2 = expected[i];
        rows[i].measured_no_spray_m2 = measured[i];
        rows[i].sprayed_in_no_spray_m2 = expected[i] - measured[i];
    }

    const ApplicationReport rep = application_report(rows);
    REQUIRE(rep.per_plot.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(rep.per_plot[i].plot_id == ids[i]);
        CHECK(rep.per_plot[i].sprayed_pct == doctest::Approx(pct[i]).epsilon(0.005));
    }
    CHECK(rep.expected_no_spray_m2 == doctest::Approx(10098.1));
    CHECK(rep.measured_no_spray_m2 == doctest::Approx(7919.6));
    CHECK(rep.accuracy_pct == doctest::Approx(78.4266).epsilon(1e-4));
    CHECK(rep.relative_error == doctest::Approx(-0.215734).epsilon(1e-4));

    rows[2].expected_no_spray_m2 = 0.0;
    CHECK_THROWS_WITH_AS(application_report(rows),
                         "application accuracy: plot \"P3\" has zero expected no-spray area",
                         DataError);
    CHECK_THROWS_AS(application_report({}), DataError);
}

TEST_CASE("area loss compares two prescription revisions per plot") {
    const char* ids[] = {"P1", "P2", "P3", "P4", "P5", "P6"};
    const double a_vals[] = {2598.6, 3316.9, 2302.3, 1739.2, 2241.8, 1757.8};
    const double b_vals[] = {1600.1, 2209.1, 1146.1, 841.8, 1280.7, 841.8};
    const double loss[] = {998.5, 1107.8, 1156.2, 897.4, 961.1, 916.0};
    const double loss_pct[] = {38.4, 33.4, 50.2, 51.6, 42.9, 52.1};

    std::vector<PlotArea> a, b;
    for (int i = 0; i < 6; ++i) {
        a.push_back({ids[i], a_vals[i]});
        b.push_back({ids[i], b_vals[i]});
    }

    const AreaLossReport rep = area_loss(a, b);
    REQUIRE(rep.per_plot.size() == 6);
    for (int i = 0; i < 6; ++i) {
        CHECK(rep.per_plot[i].plot_id == ids[i]);
        CHECK(rep.per_plot[i].loss_m2 == doctest::Approx(loss[i]).epsilon(1e-3));
        CHECK(rep.per_plot[i].loss_pct == doctest::Approx(loss_pct[i]).epsilon(0.002));
    }
    CHECK(rep.total.plot_id == "TOTAL");
    CHECK(rep.total.a_m2 == doctest::Approx(13956.6));
    CHECK(rep.total.b_m2 == doctest::Approx(7919.6));
    CHECK(rep.total.loss_m2 == doctest::Approx(6037.0));
    CHECK(rep.total.loss_pct == doctest::Approx(43.2556).epsilon(1e-4));
}

TEST_CASE("area loss rejects mismatched or degenerate plot sets") {
    const std::vector<PlotArea> a = {{"P1", 10.0}, {"P2", 20.0}};
    const std::vector<PlotArea> b = {{"P1", 5.0}, {"P2", 15.0}};

    CHECK_THROWS_AS(area_loss({{"P1", 10.0}, {"P1", 11.0}}, b), DataError);
    CHECK_THROWS_AS(area_loss(a, {{"P1", 5.0}, {"P1", 6.0}}), DataError);
    CHECK_THROWS_AS(area_loss({}, {}), DataError);
    CHECK_THROWS_AS(area_loss({{"P1", 0.0}}, {{"P1", 0.0}}), DataError);  // zero baseline

    // Mismatched sets name the offending ids in both directions.
    try {
        area_loss(a, {{"P1", 5.0}, {"P9", 15.0}});
        FAIL("expected a DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("only in first: P2") != std::string::npos);
        CHECK(msg.find("only in second: P9") != std::string::npos);
    }
}

TEST_CASE("effectiveness sums weed area per treatment from the mask") {
    GeoTransform t;
    t.origin_x = 0.0;
    t.origin_y = 4.0;
    t.pixel_size_x = 0.1;
    t.pixel_size_y = 0.1;
    BinaryMask mask(40, 40, 1, t, 0);

    // Treated plots hold 8 weed pixels, untreated 4; 0.01 m2 per pixel.
    const std::pair<int, int> treated[] = {{25, 5}, {30, 10}, {35, 15}, {21, 1},
                                           {39, 19}, {5, 5}, {10, 10}, {15, 15}};
    const std::pair<int, int> untreated[] = {{25, 25}, {30, 30}, {5, 25}, {10, 30}};
    for (auto [r, c] : treated) mask(r, c) = 1;
    for (auto [r, c] : untreated) mask(r, c) = 1;

    const std::vector<PlotDef> plots = {
        {"A1", "SSWC", Rect{0, 0, 2, 2}},
        {"B1", "NO-SSWC", Rect{2, 0, 4, 2}},
        {"A2", "SSWC", Rect{0, 2, 2, 4}},
        {"B2", "NO-SSWC", Rect{2, 2, 4, 4}},
    };
    const EffectivenessReport rep = effectiveness(mask, plots);
    REQUIRE(rep.per_plot.size() == 4);
    CHECK(rep.per_plot[0].weed_area_m2 == doctest::Approx(0.05));
    CHECK(rep.per_plot[1].weed_area_m2 == doctest::Approx(0.02));
    CHECK(rep.per_plot[2].weed_area_m2 == doctest::Approx(0.03));
    CHECK(rep.per_plot[3].weed_area_m2 == doctest::Approx(0.02));
    CHECK(rep.sum_a_m2 == doctest::Approx(0.08));
    CHECK(rep.sum_b_m2 == doctest::Approx(0.04));
    CHECK(rep.ratio == doctest::Approx(2.0));
    CHECK(rep.treatment_a == "SSWC");
    CHECK(rep.treatment_b == "NO-SSWC");

    CHECK_THROWS_AS(effectiveness(mask, plots, "SSWC", "SSWC"), ConfigError);
    const std::vector<PlotDef> unknown = {{"A1", "SSWC", Rect{0, 0, 2, 2}},
                                          {"X", "banded", Rect{2, 0, 4, 2}}};
    CHECK_THROWS_AS(effectiveness(mask, unknown), DataError);
    const std::vector<PlotDef> one_sided = {{"A1", "SSWC", Rect{0, 0, 2, 2}},
                                            {"A2", "SSWC", Rect{0, 2, 2, 4}}};
    CHECK_THROWS_AS(effectiveness(mask, one_sided), DataError);
}

TEST_CASE("effectiveness ratio") {
    CHECK(effectiveness_ratio(87.02, 25.5) == doctest::Approx(3.41255).epsilon(1e-4));
    CHECK_THROWS_AS(effectiveness_ratio(1.0, 0.0), DataError);
}
