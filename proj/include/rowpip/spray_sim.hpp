#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rowpip/geo_raster.hpp"
#include "rowpip/weed_mapping.hpp"

namespace rowpip {

struct SprayerSpec {
    double boom_width_m = 41.636;    // 136.6 ft
    double nozzle_spacing_m = 0.509; // 1.67 ft
    int nozzle_count = 0;            // 0 = round(boom_width_m / nozzle_spacing_m)
    double speed_mps = 2.906;        // 6.5 mph
    double control_rate_hz = 10.0;   // GPS/command tick rate
    // Valve latency between a command and the applied rate changing.
    // actuation_delay_s covers both transition directions; off_delay_s, when
    // set, overrides it for on->off transitions only (field observations show
    // shut-off lagging more than turn-on).
    double actuation_delay_s = 0.0;
    std::optional<double> off_delay_s;
    double default_rate = 15.0;      // applied outside the Rx map, gal/ac
    double position_sigma_m = 0.0;   // optional Gaussian position error

    void validate() const {
        if (!(boom_width_m > 0) || !(nozzle_spacing_m > 0) || !(speed_mps > 0) ||
            !(control_rate_hz > 0) || !(default_rate >= 0) || position_sigma_m < 0) {
            throw ConfigError("sprayer: boom, spacing, speed, rate and hz must be positive");
        }
        if (actuation_delay_s < 0 || (off_delay_s && *off_delay_s < 0)) {
            throw ConfigError("sprayer: actuation delays must be >= 0");
        }
        if (nozzle_count < 0) throw ConfigError("sprayer: nozzle_count must be >= 0");
    }

    int resolved_nozzle_count() const {
        if (nozzle_count > 0) return nozzle_count;
        int n = static_cast<int>(std::lround(boom_width_m / nozzle_spacing_m));
        return n < 1 ? 1 : n;
    }

    double on_delay() const { return actuation_delay_s; }
    double off_delay() const { return off_delay_s ? *off_delay_s : actuation_delay_s; }
};

// Straight pass along world Y; the boom is centered on x = center_x.
// Direction +1 travels from min_y to max_y, -1 the reverse.
struct Pass {
    double center_x = 0.0;
    int direction = 1;
};

struct PassPlan {
    std::vector<Pass> passes;
    Rect field;
};

// Parallel serpentine passes spaced one boom width apart, centerlines half a
// boom in from the field edge. Coverage is allowed a few centimeters of slack
// so a field measuring an exact multiple of booms does not gain a pass.
PassPlan plan_passes(const Rect& field, const SprayerSpec& spec);

struct TickRecord {
    double time_s = 0.0;
    int pass = 0;
    int nozzle = 0;
    double x_m = 0.0;
    double y_m = 0.0;
    double commanded_rate = 0.0;
    double applied_rate = 0.0;
};

struct AsAppliedMap {
    // Applied rate label per pixel; pixels no pass covered hold the nodata
    // sentinel (255).
    GeoRaster raster;
    std::vector<TickRecord> ticks;  // append-ordered by (pass, tick, nozzle)
    std::vector<std::string> warnings;
};

// Pixel grid the simulator paints into.
struct SimRasterSpec {
    double pixel_size_m = 0.03;
    std::string crs_label;
};

// Time advances in ticks of 1/control_rate_hz. Each tick every nozzle samples
// the Rx cell under its center (default_rate outside the map), queues the
// command behind its actuation delay, and paints one swath rectangle
// (nozzle_spacing_m wide by the distance travelled that tick) at its applied
// rate. Later passes overwrite earlier ones. A tick distance longer than the
// Rx cell length records an undersampling warning (cells can be skipped).
AsAppliedMap simulate(const std::vector<PrescriptionMap>& rx, const SprayerSpec& spec,
                      const PassPlan& plan, const SimRasterSpec& raster_spec,
                      std::uint64_t noise_seed = 0);

// Area of covered pixels whose applied rate equals no_spray_label, in m².
double as_applied_no_spray_area(const AsAppliedMap& a, std::uint8_t no_spray_label = 0);

// Same, but restricted to pixels whose centers fall inside `region`.
double as_applied_no_spray_area_in(const AsAppliedMap& a, const Rect& region,
                                   std::uint8_t no_spray_label = 0);

void write_tick_log_csv(const std::vector<TickRecord>& ticks, const std::string& path);

}  // namespace rowpip
