#include <algorithm>
#include <cstring>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "rowpip/segmentation.hpp"
#include "rowpip/synth_field.hpp"
#include "rowpip/weed_mapping.hpp"
#include "test_util.hpp"

using namespace rowpip;
using testutil::TempDir;

namespace {

FieldRecipe small_recipe(std::uint64_t seed) {
    FieldRecipe r;
    r.width_px = 600;
    r.height_px = 400;
    r.rng_seed = seed;
    return r;
}

std::set<std::pair<int, int>> weed_pixel_set(const GroundTruth& truth) {
    std::set<std::pair<int, int>> s;
    for (const WeedRecord& w : truth.weeds) {
        s.insert(w.pixels.begin(), w.pixels.end());
    }
    return s;
}

}  // namespace

TEST_CASE("generation is bit-for-bit deterministic") {
    const FieldRecipe r = small_recipe(42);
    const SynthField a = generate(r);
    const SynthField b = generate(r);
    CHECK(a.mask.sample_count() == b.mask.sample_count());
    CHECK(std::memcmp(a.mask.data(), b.mask.data(), a.mask.sample_count()) == 0);
    REQUIRE(a.truth.rows.size() == b.truth.rows.size());
    CHECK(a.truth.rows == b.truth.rows);
    REQUIRE(a.truth.weeds.size() == b.truth.weeds.size());
    for (std::size_t i = 0; i < a.truth.weeds.size(); ++i) {
        CHECK(a.truth.weeds[i].cx_px == b.truth.weeds[i].cx_px);
        CHECK(a.truth.weeds[i].cy_px == b.truth.weeds[i].cy_px);
        CHECK(a.truth.weeds[i].diameter_px == b.truth.weeds[i].diameter_px);
    }
}

TEST_CASE("different seeds give different fields") {
    const SynthField a = generate(small_recipe(1));
    const SynthField b = generate(small_recipe(2));
    CHECK(std::memcmp(a.mask.data(), b.mask.data(), a.mask.sample_count()) != 0);
}

TEST_CASE("straight rows sit at half spacing plus multiples of the spacing") {
    const FieldRecipe r = small_recipe(3);
    const SynthField f = generate(r);
    const double spacing_px = r.row_spacing_m / r.pixel_size_m;  // ~120.95
    REQUIRE(f.truth.rows.size() == 3);  // 400 px tall: crosses at ~60.5, ~181.4, ~302.4
    for (std::size_t k = 0; k < f.truth.rows.size(); ++k) {
        const double want = spacing_px / 2 + static_cast<double>(k) * spacing_px;
        for (const auto& [x, y] : f.truth.rows[k]) {
            CHECK(y == doctest::Approx(want).epsilon(1e-12));
            CHECK(x >= 0.0);
            CHECK(x <= r.width_px - 0.5);
        }
        // Samples run from the first pixel center to the last.
        CHECK(f.truth.rows[k].front().first == doctest::Approx(0.5));
        CHECK(f.truth.rows[k].back().first == doctest::Approx(r.width_px - 0.5));
    }
}

TEST_CASE("curvature drifts a row by its full amplitude across the field") {
    FieldRecipe r = small_recipe(4);
    r.row_curvature_px = 8.0;
    const SynthField f = generate(r);
    const auto& row = f.truth.rows[0];
    CHECK(row.back().second - row.front().second == doctest::Approx(8.0).epsilon(1e-3));
    // Half-cosine: monotone, half the drift at the midpoint.
    for (std::size_t i = 1; i < row.size(); ++i) CHECK(row[i].second >= row[i - 1].second);
}

TEST_CASE("vertical orientation transposes the row axes") {
    FieldRecipe r = small_recipe(5);
    r.row_orientation = RowOrientation::vertical;
    const SynthField f = generate(r);
    REQUIRE(f.truth.rows.size() == 5);  // 600 px of cross extent, spacing ~121 px
    for (const auto& [x, y] : f.truth.rows[0]) {
        CHECK(x == doctest::Approx(f.truth.rows[0][0].first));
        CHECK(y >= 0.0);
    }
}

TEST_CASE("dropout removes plants") {
    FieldRecipe keep = small_recipe(6);
    FieldRecipe drop = small_recipe(6);
    drop.plant_dropout_prob = 0.6;
    const double area_keep = mask_area(generate(keep).mask);
    const double area_drop = mask_area(generate(drop).mask);
    CHECK(area_drop < area_keep * 0.7);
    CHECK(area_drop > 0.0);
}

TEST_CASE("weed discs never touch the row buffer band") {
    FieldRecipe r = small_recipe(7);
    r.weed_count = 12;
    const SynthField f = generate(r);
    REQUIRE(f.truth.weeds.size() == 12);

    // End-to-end: detect rows on the mask, buffer them, subtract; what is
    // left must be exactly the union of the weed discs.
    TileSpec spec;
    PeakParams params;
    const RowDetectionResult rows =
        detect_rows(f.mask, spec, params, RowOrientation::horizontal, 1);
    const BinaryMask buffer = buffer_rows(rows, RowOrientation::horizontal, BufferConfig{});
    const BinaryMask weeds = weed_mask(f.mask, buffer);

    std::set<std::pair<int, int>> got;
    for (int y = 0; y < weeds.height(); ++y) {
        for (int x = 0; x < weeds.width(); ++x) {
            if (weeds(y, x)) got.insert({y, x});
        }
    }
    CHECK(got == weed_pixel_set(f.truth));
}

TEST_CASE("impossible weed placement is a data error") {
    FieldRecipe r = small_recipe(8);
    r.width_px = 200;
    r.height_px = 300;
    r.weed_count = 500;
    r.weed_diameter_min_m = 0.12;
    r.weed_diameter_max_m = 0.20;
    CHECK_THROWS_AS(generate(r), DataError);
}

TEST_CASE("truth JSON round trip re-derives identical weed pixels") {
    TempDir tmp;
    FieldRecipe r = small_recipe(9);
    r.weed_count = 9;
    r.row_curvature_px = 5.0;
    const SynthField f = generate(r);
    const std::string path = tmp.file("truth.json");
    write_truth_json(f.truth, path);
    const GroundTruth back = read_truth_json(path);

    CHECK(back.rows == f.truth.rows);
    REQUIRE(back.weeds.size() == f.truth.weeds.size());
    for (std::size_t i = 0; i < back.weeds.size(); ++i) {
        CHECK(back.weeds[i].cx_px == f.truth.weeds[i].cx_px);
        CHECK(back.weeds[i].cy_px == f.truth.weeds[i].cy_px);
        CHECK(back.weeds[i].diameter_px == f.truth.weeds[i].diameter_px);
        CHECK(back.weeds[i].pixels == f.truth.weeds[i].pixels);
    }
}

TEST_CASE("painted RGB re-segments to the identical mask") {
    FieldRecipe r = small_recipe(10);
    r.weed_count = 6;
    const SynthField f = generate(r);
    const GeoRaster rgb = mask_to_rgb(f.mask);
    REQUIRE(rgb.bands() == 3);
    const BinaryMask again = binarize(exgi(rgb));
    CHECK(std::memcmp(again.data(), f.mask.data(), f.mask.sample_count()) == 0);
}

TEST_CASE("recipe geotransform puts the origin at the top-left corner") {
    FieldRecipe r = small_recipe(11);
    const GeoTransform t = r.transform();
    CHECK(t.origin_x == 0.0);
    CHECK(t.origin_y == doctest::Approx(400 * 0.0063));
    r.origin_y = 77.0;
    CHECK(r.transform().origin_y == 77.0);
}

TEST_CASE("recipe validation rejects inconsistent parameters") {
    FieldRecipe r;
    r.width_px = 0;
    CHECK_THROWS_AS(r.validate(), ConfigError);

    r = FieldRecipe{};
    r.plant_dropout_prob = 1.0;
    CHECK_THROWS_AS(r.validate(), ConfigError);

    r = FieldRecipe{};
    r.plant_diameter_max_m = 0.5;  // spacing must cover two plant diameters
    CHECK_THROWS_AS(r.validate(), ConfigError);

    r = FieldRecipe{};
    r.weed_count = 3;
    r.weed_diameter_min_m = 0.3;
    r.weed_diameter_max_m = 0.2;
    CHECK_THROWS_AS(r.validate(), ConfigError);

    r = FieldRecipe{};
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("truth_to_rx marks exactly the cells weed pixel centers fall in") {
    FieldRecipe r = small_recipe(12);
    r.weed_count = 8;
    const SynthField f = generate(r);
    const GeoTransform t = f.mask.transform();
    const Rect plot{0.0, 0.0, r.width_px * r.pixel_size_m, r.height_px * r.pixel_size_m};
    GridConfig grid;
    const PrescriptionMap rx = truth_to_rx(f.truth, t, plot, grid, "T");

    // Independent check: collect the cells containing weed pixel centers.
    std::set<std::pair<int, int>> spray_cells;
    for (const WeedRecord& w : f.truth.weeds) {
        for (const auto& [row, col] : w.pixels) {
            const auto [wx, wy] = pixel_to_world(t, col, row);
            for (const RxCell& c : rx.cells) {
                if (c.rect.contains(wx, wy)) spray_cells.insert({c.i, c.j});
            }
        }
    }
    for (const RxCell& c : rx.cells) {
        const bool should = spray_cells.count({c.i, c.j}) > 0;
        CHECK(c.rate == (should ? grid.spray_rate : grid.no_spray_rate));
    }
}
