#include "rowpip/spray_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "rowpip/rng.hpp"

namespace rowpip {
namespace {

constexpr std::uint8_t kUncovered = 255;

// Floor-indexed lookup over one prescription map's regular cell grid,
// reconstructed from the cells themselves (clipped edge cells are narrower,
// so nominal cell size is the maximum over the map).
struct RxLookup {
    double min_x = 0, min_y = 0;
    double cell_w = 0, cell_h = 0;
    int n_cols = 0, n_rows = 0;
    std::vector<const RxCell*> grid;  // j * n_cols + i, null when absent

    explicit RxLookup(const PrescriptionMap& rx) {
        if (rx.cells.empty()) return;
        min_x = std::numeric_limits<double>::infinity();
        min_y = std::numeric_limits<double>::infinity();
        for (const RxCell& c : rx.cells) {
            min_x = std::min(min_x, c.rect.min_x);
            min_y = std::min(min_y, c.rect.min_y);
            cell_w = std::max(cell_w, c.rect.width());
            cell_h = std::max(cell_h, c.rect.height());
            n_cols = std::max(n_cols, c.i + 1);
            n_rows = std::max(n_rows, c.j + 1);
        }
        grid.assign(static_cast<std::size_t>(n_cols) * n_rows, nullptr);
        for (const RxCell& c : rx.cells) {
            grid[static_cast<std::size_t>(c.j) * n_cols + c.i] = &c;
        }
    }

    const RxCell* locate(double x, double y) const {
        if (grid.empty()) return nullptr;
        const int i = static_cast<int>(std::floor((x - min_x) / cell_w));
        const int j = static_cast<int>(std::floor((y - min_y) / cell_h));
        if (i < 0 || i >= n_cols || j < 0 || j >= n_rows) return nullptr;
        const RxCell* cell = grid[static_cast<std::size_t>(j) * n_cols + i];
        // Clipped edge cells do not reach the nominal grid extent; a point in
        // the clipped-off remainder is outside the map.
        if (cell && !cell->rect.contains(x, y)) return nullptr;
        return cell;
    }
};

// One scheduled valve transition: the rate takes effect at effect_time.
struct Transition {
    double effect_time = 0.0;
    double rate = 0.0;
};

struct NozzleState {
    double applied = 0.0;
    double last_commanded = 0.0;
    std::vector<Transition> pending;  // chronological by enqueue

    void command(double rate, double now, const SprayerSpec& spec) {
        if (rate == last_commanded) return;
        const double delay = rate > last_commanded ? spec.on_delay() : spec.off_delay();
        const double effect = now + delay;
        // A newer command supersedes any queued transition that would land at
        // or after it (a fast on/off/on flicker collapses to the last state).
        while (!pending.empty() && pending.back().effect_time >= effect) pending.pop_back();
        pending.push_back({effect, rate});
        last_commanded = rate;
    }

    void settle(double now, double eps) {
        std::size_t applied_count = 0;
        for (const Transition& tr : pending) {
            if (tr.effect_time <= now + eps) {
                applied = tr.rate;
                ++applied_count;
            } else {
                break;
            }
        }
        if (applied_count) pending.erase(pending.begin(), pending.begin() + applied_count);
    }
};

std::uint8_t rate_label(double rate) {
    const long v = std::lround(rate);
    if (rate < 0.0 || v > 254) {
        throw DataError("simulate: applied rate " + std::to_string(rate) +
                        " does not fit the 8-bit as-applied raster (0..254)");
    }
    return static_cast<std::uint8_t>(v);
}

}  // namespace

PassPlan plan_passes(const Rect& field, const SprayerSpec& spec) {
    spec.validate();
    if (!(field.width() > 0.0) || !(field.height() > 0.0)) {
        throw DataError("pass plan: field rectangle is degenerate");
    }
    // 1e-3 boom widths (~4 cm) of slack: a field an exact number of booms
    // wide stays at that number despite floating-point carry.
    const int count = std::max(
        1, static_cast<int>(std::ceil(field.width() / spec.boom_width_m - 1e-3)));
    PassPlan plan;
    plan.field = field;
    plan.passes.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        Pass p;
        p.center_x = field.min_x + spec.boom_width_m * (0.5 + k);
        p.direction = (k % 2 == 0) ? 1 : -1;
        plan.passes.push_back(p);
    }
    return plan;
}

AsAppliedMap simulate(const std::vector<PrescriptionMap>& rx, const SprayerSpec& spec,
                      const PassPlan& plan, const SimRasterSpec& raster_spec,
                      std::uint64_t noise_seed) {
    spec.validate();
    if (!(raster_spec.pixel_size_m > 0.0)) {
        throw ConfigError("simulate: pixel_size_m must be > 0");
    }
    const Rect& field = plan.field;
    if (plan.passes.empty()) throw DataError("simulate: the pass plan is empty");

    const double px = raster_spec.pixel_size_m;
    const int width = std::max(1, static_cast<int>(std::ceil(field.width() / px - 1e-9)));
    const int height = std::max(1, static_cast<int>(std::ceil(field.height() / px - 1e-9)));
    GeoTransform t;
    t.origin_x = field.min_x;
    t.origin_y = field.max_y;
    t.pixel_size_x = px;
    t.pixel_size_y = px;
    t.crs_label = raster_spec.crs_label;

    AsAppliedMap out;
    out.raster = GeoRaster(width, height, 1, t, kUncovered);
    out.raster.set_nodata(kUncovered);

    std::vector<RxLookup> lookups;
    lookups.reserve(rx.size());
    double min_cell_h = std::numeric_limits<double>::infinity();
    for (const PrescriptionMap& map : rx) {
        lookups.emplace_back(map);
        if (lookups.back().cell_h > 0.0) min_cell_h = std::min(min_cell_h, lookups.back().cell_h);
    }
    auto rate_at = [&](double x, double y) {
        for (const RxLookup& l : lookups) {
            if (const RxCell* cell = l.locate(x, y)) return cell->rate;
        }
        return spec.default_rate;
    };

    const double dt = 1.0 / spec.control_rate_hz;
    const double dy = spec.speed_mps * dt;
    const double eps = dt * 1e-6;
    if (dy > min_cell_h) {
        out.warnings.push_back(
            "tick travel of " + std::to_string(dy) + " m exceeds the shortest cell length of " +
            std::to_string(min_cell_h) + " m; cells can pass between samples");
    }

    const int nozzles = spec.resolved_nozzle_count();
    const double band_min_offset = nozzles * spec.nozzle_spacing_m * 0.5;
    const int ticks_per_pass =
        std::max(1, static_cast<int>(std::ceil(field.height() / dy - 1e-9)));

    Rng rng(noise_seed);
    auto gaussian = [&rng]() {
        const double u1 = 1.0 - rng.next_double();  // (0, 1]
        const double u2 = rng.next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    };

    // Shared pixel boundaries make swaths tile exactly: nozzle j of a pass
    // owns columns [col_edge[j], col_edge[j+1]) and tick k owns the rows
    // between its two y boundaries, so no seam is painted twice or missed.
    std::vector<int> col_edges(static_cast<std::size_t>(nozzles) + 1);
    std::vector<double> nozzle_x(static_cast<std::size_t>(nozzles));

    long long tick_counter = 0;
    for (std::size_t p = 0; p < plan.passes.size(); ++p) {
        const Pass& pass = plan.passes[p];
        const double pass_min_x = pass.center_x - band_min_offset;
        for (int j = 0; j <= nozzles; ++j) {
            const double x_edge = pass_min_x + j * spec.nozzle_spacing_m;
            col_edges[static_cast<std::size_t>(j)] = std::clamp(
                static_cast<int>(std::lround((x_edge - t.origin_x) / px)), 0, width);
        }
        for (int j = 0; j < nozzles; ++j) {
            nozzle_x[static_cast<std::size_t>(j)] =
                pass_min_x + (j + 0.5) * spec.nozzle_spacing_m;
        }

        std::vector<NozzleState> states(static_cast<std::size_t>(nozzles));
        for (auto& st : states) {
            // The sprayer arrives already applying the outside-map rate.
            st.applied = spec.default_rate;
            st.last_commanded = spec.default_rate;
        }

        const double y_start = pass.direction > 0 ? field.min_y : field.max_y;
        int prev_row_edge = std::clamp(
            static_cast<int>(std::lround((t.origin_y - y_start) / px)), 0, height);

        for (int k = 0; k < ticks_per_pass; ++k) {
            const double now = tick_counter * dt;
            const double y_sample = y_start + pass.direction * k * dy;
            const double y_next = y_start + pass.direction * (k + 1) * dy;
            const int next_row_edge = std::clamp(
                static_cast<int>(std::lround((t.origin_y - y_next) / px)), 0, height);
            const int row_lo = std::min(prev_row_edge, next_row_edge);
            const int row_hi = std::max(prev_row_edge, next_row_edge);

            const double y_noise =
                spec.position_sigma_m > 0.0 ? gaussian() * spec.position_sigma_m : 0.0;
            const double x_noise =
                spec.position_sigma_m > 0.0 ? gaussian() * spec.position_sigma_m : 0.0;

            for (int j = 0; j < nozzles; ++j) {
                NozzleState& st = states[static_cast<std::size_t>(j)];
                // Position error skews where the controller thinks the nozzle
                // is; the swath itself still lands on the true path.
                const double commanded =
                    rate_at(nozzle_x[static_cast<std::size_t>(j)] + x_noise,
                            y_sample + y_noise);
                st.command(commanded, now, spec);
                st.settle(now, eps);

                const std::uint8_t label = rate_label(st.applied);
                const int col_lo = col_edges[static_cast<std::size_t>(j)];
                const int col_hi = col_edges[static_cast<std::size_t>(j) + 1];
                if (col_hi > col_lo && row_hi > row_lo) {
                    for (int r = row_lo; r < row_hi; ++r) {
                        std::memset(out.raster.row_ptr(r) + col_lo, label,
                                    static_cast<std::size_t>(col_hi - col_lo));
                    }
                }

                TickRecord rec;
                rec.time_s = now;
                rec.pass = static_cast<int>(p);
                rec.nozzle = j;
                rec.x_m = nozzle_x[static_cast<std::size_t>(j)];
                rec.y_m = y_sample;
                rec.commanded_rate = commanded;
                rec.applied_rate = st.applied;
                out.ticks.push_back(rec);
            }
            prev_row_edge = next_row_edge;
            ++tick_counter;
        }
    }
    return out;
}

double as_applied_no_spray_area(const AsAppliedMap& a, std::uint8_t no_spray_label) {
    const GeoRaster& r = a.raster;
    long long count = 0;
    const std::uint8_t* data = r.data();
    const std::size_t n = r.sample_count();
    for (std::size_t i = 0; i < n; ++i) count += data[i] == no_spray_label;
    return static_cast<double>(count) * r.transform().pixel_size_x * r.transform().pixel_size_y;
}

double as_applied_no_spray_area_in(const AsAppliedMap& a, const Rect& region,
                                   std::uint8_t no_spray_label) {
    const GeoRaster& r = a.raster;
    const GeoTransform& t = r.transform();
    long long count = 0;
    for (int row = 0; row < r.height(); ++row) {
        const double wy = t.origin_y - (row + 0.5) * t.pixel_size_y;
        if (wy < region.min_y || wy >= region.max_y) continue;
        const std::uint8_t* line = r.row_ptr(row);
        for (int col = 0; col < r.width(); ++col) {
            const double wx = t.origin_x + (col + 0.5) * t.pixel_size_x;
            if (wx < region.min_x || wx >= region.max_x) continue;
            count += line[col] == no_spray_label;
        }
    }
    return static_cast<double>(count) * t.pixel_size_x * t.pixel_size_y;
}

void write_tick_log_csv(const std::vector<TickRecord>& ticks, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "time_s,pass,nozzle,x_m,y_m,commanded_rate,applied_rate\n";
    char buf[160];
    for (const TickRecord& r : ticks) {
        std::snprintf(buf, sizeof(buf), "%.3f,%d,%d,%.4f,%.4f,%.3f,%.3f\n", r.time_s, r.pass,
                      r.nozzle, r.x_m, r.y_m, r.commanded_rate, r.applied_rate);
        out << buf;
    }
    if (!out) throw DataError("I/O failure writing " + path);
}

}  // namespace rowpip
