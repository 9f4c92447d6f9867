#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rowpip/spray_sim.hpp"
#include "rowpip/weed_mapping.hpp"
#include "test_util.hpp"

using namespace rowpip;
using testutil::TempDir;

namespace {

// One plot whose cells carry caller-chosen rates; rate_of(i, j) decides.
template <typename RateFn>
PrescriptionMap rx_map(const Rect& plot, const GridConfig& grid, RateFn rate_of) {
    PrescriptionMap map;
    map.plot_id = "T";
    map.cells = build_grid(plot, grid);
    for (RxCell& c : map.cells) c.rate = rate_of(c.i, c.j);
    return map;
}

SprayerSpec small_sprayer(double boom_m, double hz = 10.0) {
    SprayerSpec s;
    s.boom_width_m = boom_m;
    s.nozzle_spacing_m = 0.509;
    s.speed_mps = 2.90576;  // 6.5 mph
    s.control_rate_hz = hz;
    return s;
}

}  // namespace

TEST_CASE("nozzle count rounds boom width over spacing") {
    SprayerSpec s;  // 41.636 m boom, 0.509 m spacing
    CHECK(s.resolved_nozzle_count() == 82);
    s.boom_width_m = 8 * 0.509;
    CHECK(s.resolved_nozzle_count() == 8);
    s.nozzle_count = 5;
    CHECK(s.resolved_nozzle_count() == 5);
}

TEST_CASE("plan_passes: serpentine passes one boom apart") {
    SprayerSpec s;  // boom 41.636
    const PassPlan two = plan_passes(Rect{0, 0, 83.3, 100}, s);
    REQUIRE(two.passes.size() == 2);  // 83.3 m is two booms within tolerance
    CHECK(two.passes[0].center_x == doctest::Approx(20.818));
    CHECK(two.passes[1].center_x == doctest::Approx(62.454));
    CHECK(two.passes[0].direction == 1);
    CHECK(two.passes[1].direction == -1);

    const PassPlan three = plan_passes(Rect{0, 0, 84.0, 100}, s);
    CHECK(three.passes.size() == 3);

    const PassPlan one = plan_passes(Rect{0, 0, 10.0, 100}, s);
    REQUIRE(one.passes.size() == 1);
    CHECK(one.passes[0].direction == 1);
}

TEST_CASE("uniform prescription paints every covered pixel at its rate") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, boom, 2 * 3.048};
    const auto rx = rx_map(plot, grid, [](int, int) { return 15.0; });
    const SprayerSpec spec = small_sprayer(boom);
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});

    CHECK(a.raster.nodata() == std::uint8_t{255});
    // The raster is ceil'd to whole pixels, so a sliver row past the field
    // edge may stay uncovered; everything nearer is painted seam-free.
    long long uncovered = 0;
    for (int y = 0; y < a.raster.height(); ++y) {
        for (int x = 0; x < a.raster.width(); ++x) {
            const std::uint8_t v = a.raster(y, x);
            if (v == 255) {
                ++uncovered;
            } else {
                CHECK(v == 15);
            }
        }
    }
    CHECK(uncovered <= a.raster.width() + a.raster.height());
    for (int y = 0; y + 1 < a.raster.height(); ++y) {
        for (int x = 0; x + 1 < a.raster.width(); ++x) {
            CHECK(a.raster(y, x) == 15);
        }
    }
    CHECK(as_applied_no_spray_area(a) == 0.0);
}

TEST_CASE("a no-spray block lands within one tick of its border") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, boom, 4 * 3.048};
    // Rows j = 1, 2 are off: y in [3.048, 9.144).
    const auto rx = rx_map(plot, grid, [](int, int j) { return j == 1 || j == 2 ? 0.0 : 15.0; });
    const double expected = boom * 2 * 3.048;

    for (double hz : {10.0, 100.0}) {
        const SprayerSpec spec = small_sprayer(boom, hz);
        const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});
        const double tick_len = spec.speed_mps / hz;
        const double measured = as_applied_no_spray_area(a);
        CHECK(std::abs(measured - expected) <= 2.0 * tick_len * boom + 0.05);
    }
}

TEST_CASE("shut-off delay pushes spray one delay-length into each no-spray block") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, boom, 4 * 3.048};
    const auto rx = rx_map(plot, grid, [](int, int j) { return j == 1 || j == 2 ? 0.0 : 15.0; });

    SprayerSpec base = small_sprayer(boom);
    const AsAppliedMap zero = simulate({rx}, base, plan_passes(plot, base), SimRasterSpec{});

    SprayerSpec lagged = base;
    lagged.off_delay_s = 0.2;  // two ticks at 10 Hz
    const AsAppliedMap slow = simulate({rx}, lagged, plan_passes(plot, lagged), SimRasterSpec{});

    const double a0 = as_applied_no_spray_area(zero);
    const double a1 = as_applied_no_spray_area(slow);
    const double want = 2 * 0.1 * base.speed_mps * boom;  // one entry edge, full swath
    CHECK(a1 < a0);
    CHECK(std::abs((a0 - a1) - want) <= 0.10 * want);
}

TEST_CASE("an opposite transition supersedes a pending delayed command") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, boom, 4 * 3.048};
    // One no-spray row: 3.048 m long, much shorter than the delay travel.
    const auto rx = rx_map(plot, grid, [](int, int j) { return j == 1 ? 0.0 : 15.0; });

    SprayerSpec spec = small_sprayer(boom);
    spec.off_delay_s = 2.0;  // 5.8 m of travel; the block ends first
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});
    CHECK(as_applied_no_spray_area(a) <= 0.5);
}

TEST_CASE("positions outside every prescription get the default rate") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    // Prescription covers only the left half of the field; all of it no-spray.
    const Rect rx_plot{0, 0, 4 * 0.509, 2 * 3.048};
    const Rect field{0, 0, boom, 2 * 3.048};
    const auto rx = rx_map(rx_plot, grid, [](int, int) { return 0.0; });
    const SprayerSpec spec = small_sprayer(boom);
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(field, spec), SimRasterSpec{});

    const double left = as_applied_no_spray_area_in(a, rx_plot);
    CHECK(left == doctest::Approx(rx_plot.area()).epsilon(0.02));
    const Rect right{4 * 0.509, 0, boom, 2 * 3.048};
    CHECK(as_applied_no_spray_area_in(a, right) == 0.0);
    // A region covering every pixel center restricts nothing.
    CHECK(as_applied_no_spray_area_in(a, Rect{-1, -1, 10, 10}) ==
          doctest::Approx(as_applied_no_spray_area(a)));
}

TEST_CASE("boom wider than its nozzle band leaves uncovered stripes") {
    GridConfig grid;
    const Rect plot{0, 0, 2.4, 2 * 3.048};
    const auto rx = rx_map(plot, grid, [](int, int) { return 15.0; });
    SprayerSpec spec = small_sprayer(1.2);  // rounds to 2 nozzles = 1.018 m of band
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});

    long long uncovered = 0;
    for (int y = 0; y < a.raster.height(); ++y) {
        for (int x = 0; x < a.raster.width(); ++x) uncovered += a.raster(y, x) == 255;
    }
    CHECK(uncovered > 0);
    // Uncovered pixels are not "no-spray zeros".
    CHECK(as_applied_no_spray_area(a) == 0.0);
}

TEST_CASE("rates that do not fit the 8-bit as-applied labels are rejected") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    grid.spray_rate = 300.0;
    const Rect plot{0, 0, boom, 3.048};
    const auto rx = rx_map(plot, grid, [](int, int) { return 300.0; });
    const SprayerSpec spec = small_sprayer(boom);
    CHECK_THROWS_AS(simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{}), DataError);
}

TEST_CASE("tick log: header, shape, and a global monotone clock") {
    TempDir tmp;
    const double boom = 2 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, 2 * boom, 3.048};  // two passes
    const auto rx = rx_map(plot, grid, [](int, int) { return 15.0; });
    const SprayerSpec spec = small_sprayer(boom);
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});

    const int nozzles = spec.resolved_nozzle_count();
    const int ticks_per_pass = static_cast<int>(
        std::ceil(plot.height() / (spec.speed_mps / spec.control_rate_hz) - 1e-9));
    REQUIRE(a.ticks.size() == static_cast<std::size_t>(2 * ticks_per_pass * nozzles));

    // Pass 1 continues the clock where pass 0 left off.
    const TickRecord& last0 = a.ticks[static_cast<std::size_t>(ticks_per_pass * nozzles) - 1];
    const TickRecord& first1 = a.ticks[static_cast<std::size_t>(ticks_per_pass * nozzles)];
    CHECK(last0.pass == 0);
    CHECK(first1.pass == 1);
    CHECK(first1.time_s > last0.time_s);
    for (std::size_t i = 1; i < a.ticks.size(); ++i) {
        CHECK(a.ticks[i].time_s >= a.ticks[i - 1].time_s);
    }

    const std::string path = tmp.file("ticks.csv");
    write_tick_log_csv(a.ticks, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "time_s,pass,nozzle,x_m,y_m,commanded_rate,applied_rate");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++lines;
    }
    CHECK(lines == a.ticks.size());
}

TEST_CASE("position noise is seed-deterministic") {
    const double boom = 8 * 0.509;
    GridConfig grid;
    const Rect plot{0, 0, boom, 4 * 3.048};
    const auto rx = rx_map(plot, grid, [](int, int j) { return j % 2 ? 0.0 : 15.0; });
    SprayerSpec spec = small_sprayer(boom);
    spec.position_sigma_m = 0.5;

    const auto a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{}, 1);
    const auto b = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{}, 1);
    const auto c = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{}, 2);
    CHECK(std::memcmp(a.raster.data(), b.raster.data(), a.raster.sample_count()) == 0);
    CHECK(std::memcmp(a.raster.data(), c.raster.data(), a.raster.sample_count()) != 0);
}

TEST_CASE("cells shorter than one tick of travel raise a warning") {
    const double boom = 2 * 0.509;
    GridConfig grid;
    grid.cell_length_m = 0.2;  // 10 Hz travel is 0.29 m
    const Rect plot{0, 0, boom, 2.0};
    const auto rx = rx_map(plot, grid, [](int, int) { return 15.0; });
    const SprayerSpec spec = small_sprayer(boom);
    const AsAppliedMap a = simulate({rx}, spec, plan_passes(plot, spec), SimRasterSpec{});
    REQUIRE(a.warnings.size() == 1);
    CHECK(a.warnings[0].find("tick travel") != std::string::npos);

    GridConfig ok;
    const auto rx2 = rx_map(plot, ok, [](int, int) { return 15.0; });
    CHECK(simulate({rx2}, spec, plan_passes(plot, spec), SimRasterSpec{}).warnings.empty());
}
