#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace rowpip {

// Axis-aligned rectangle in world meters.
struct Rect {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    double area() const { return width() * height(); }
    bool contains(double x, double y) const {
        return x >= min_x && x < max_x && y >= min_y && y < max_y;
    }
};

struct GeoFeature {
    // "Polygon" with a single closed ring, or "LineString".
    std::string geometry_type = "Polygon";
    std::vector<std::pair<double, double>> coords;  // ring vertices (unclosed) or line vertices
    nlohmann::json properties = nlohmann::json::object();
};

GeoFeature rect_feature(const Rect& r, nlohmann::json properties);

// RFC 7946 FeatureCollection; coordinates are written in the projected CRS
// with 6 decimal places, polygon rings closed (first vertex repeated last).
void write_geojson(const std::vector<GeoFeature>& features, const std::string& path);
std::string geojson_to_string(const std::vector<GeoFeature>& features);

std::vector<GeoFeature> read_geojson(const std::string& path);

// Bounding box of a polygon/line feature's vertices.
Rect feature_bounds(const GeoFeature& f);

}  // namespace rowpip
