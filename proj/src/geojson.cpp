#include "rowpip/geojson.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

#include "rowpip/error.hpp"

namespace rowpip {
namespace {

// Fixed 6-decimal formatting keeps coordinate output byte-stable across
// platforms (default double printing is shortest-round-trip and varies).
std::string fmt_coord(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

void append_coord_pair(std::string& out, double x, double y) {
    out += '[';
    out += fmt_coord(x);
    out += ", ";
    out += fmt_coord(y);
    out += ']';
}

void append_feature(std::string& out, const GeoFeature& f) {
    if (f.coords.empty()) throw DataError("cannot serialize a feature with no coordinates");
    out += "    {\n      \"type\": \"Feature\",\n      \"properties\": ";
    out += f.properties.dump();
    out += ",\n      \"geometry\": {\"type\": \"";
    out += f.geometry_type;
    out += "\", \"coordinates\": ";
    if (f.geometry_type == "Polygon") {
        out += "[[";
        for (std::size_t i = 0; i < f.coords.size(); ++i) {
            if (i) out += ", ";
            append_coord_pair(out, f.coords[i].first, f.coords[i].second);
        }
        out += ", ";
        append_coord_pair(out, f.coords.front().first, f.coords.front().second);
        out += "]]";
    } else if (f.geometry_type == "LineString") {
        out += '[';
        for (std::size_t i = 0; i < f.coords.size(); ++i) {
            if (i) out += ", ";
            append_coord_pair(out, f.coords[i].first, f.coords[i].second);
        }
        out += ']';
    } else {
        throw DataError("unsupported geometry type \"" + f.geometry_type + "\"");
    }
    out += "}\n    }";
}

}  // namespace

GeoFeature rect_feature(const Rect& r, nlohmann::json properties) {
    GeoFeature f;
    f.geometry_type = "Polygon";
    // counterclockwise exterior ring per RFC 7946
    f.coords = {{r.min_x, r.min_y}, {r.max_x, r.min_y}, {r.max_x, r.max_y}, {r.min_x, r.max_y}};
    f.properties = std::move(properties);
    return f;
}

std::string geojson_to_string(const std::vector<GeoFeature>& features) {
    std::string out = "{\n  \"type\": \"FeatureCollection\",\n  \"features\": [\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
        append_feature(out, features[i]);
        if (i + 1 < features.size()) out += ',';
        out += '\n';
    }
    out += "  ]\n}\n";
    return out;
}

void write_geojson(const std::vector<GeoFeature>& features, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    const std::string body = geojson_to_string(features);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw DataError("I/O failure writing " + path);
}

std::vector<GeoFeature> read_geojson(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object() || j.value("type", "") != "FeatureCollection" ||
        !j.contains("features") || !j["features"].is_array()) {
        throw DataError(path + " is not a GeoJSON FeatureCollection");
    }
    std::vector<GeoFeature> out;
    out.reserve(j["features"].size());
    for (const auto& jf : j["features"]) {
        if (!jf.is_object() || jf.value("type", "") != "Feature" || !jf.contains("geometry")) {
            throw DataError(path + ": malformed feature");
        }
        const auto& geom = jf["geometry"];
        GeoFeature f;
        f.geometry_type = geom.value("type", "");
        f.properties = jf.value("properties", nlohmann::json::object());
        if (f.properties.is_null()) f.properties = nlohmann::json::object();
        const auto& coords = geom.at("coordinates");
        try {
            if (f.geometry_type == "Polygon") {
                if (!coords.is_array() || coords.empty()) {
                    throw DataError(path + ": polygon without rings");
                }
                // exterior ring only; interior rings are not produced by this toolkit
                for (const auto& pt : coords[0]) {
                    f.coords.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
                }
                if (f.coords.size() >= 2 && f.coords.front() == f.coords.back()) {
                    f.coords.pop_back();
                }
                if (f.coords.size() < 3) throw DataError(path + ": degenerate polygon ring");
            } else if (f.geometry_type == "LineString") {
                for (const auto& pt : coords) {
                    f.coords.emplace_back(pt.at(0).get<double>(), pt.at(1).get<double>());
                }
                if (f.coords.size() < 2) throw DataError(path + ": degenerate line string");
            } else {
                throw DataError(path + ": unsupported geometry type \"" + f.geometry_type + "\"");
            }
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + ": malformed coordinates: " + e.what());
        }
        out.push_back(std::move(f));
    }
    return out;
}

Rect feature_bounds(const GeoFeature& f) {
    if (f.coords.empty()) throw DataError("feature has no coordinates");
    Rect r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& [x, y] : f.coords) {
        r.min_x = std::min(r.min_x, x);
        r.min_y = std::min(r.min_y, y);
        r.max_x = std::max(r.max_x, x);
        r.max_y = std::max(r.max_y, y);
    }
    return r;
}

}  // namespace rowpip
