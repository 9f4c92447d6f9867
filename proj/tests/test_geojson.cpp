#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "rowpip/error.hpp"
#include "rowpip/geojson.hpp"
#include "test_util.hpp"

using namespace rowpip;
using nlohmann::json;
using testutil::TempDir;

TEST_CASE("rect_feature emits a closed five-vertex ring") {
    Rect r{1.0, 2.0, 4.0, 6.0};
    const GeoFeature f = rect_feature(r, json{{"rate", 15.0}});
    const json doc = json::parse(geojson_to_string({f}));

    CHECK(doc["type"] == "FeatureCollection");
    REQUIRE(doc["features"].size() == 1);
    const json& ring = doc["features"][0]["geometry"]["coordinates"][0];
    REQUIRE(ring.size() == 5);
    CHECK(ring.front() == ring.back());
    CHECK(doc["features"][0]["properties"]["rate"] == 15.0);

    // All four corners present.
    int corners = 0;
    for (const auto& v : ring) {
        const double x = v[0], y = v[1];
        corners += (x == 1.0 || x == 4.0) && (y == 2.0 || y == 6.0);
    }
    CHECK(corners == 5);
}

TEST_CASE("coordinates print with six decimals and no negative zero") {
    Rect r{-1e-9, 0.0, 1.25, 2.5};
    const std::string s = geojson_to_string({rect_feature(r, json::object())});
    CHECK(s.find("-0.000000") == std::string::npos);
    CHECK(s.find("1.250000") != std::string::npos);
}

TEST_CASE("polygon and linestring features survive a file round trip") {
    TempDir tmp;
    GeoFeature poly;
    poly.geometry_type = "Polygon";
    poly.coords = {{0.0, 0.0}, {3.5, 0.0}, {3.5, 2.25}, {0.0, 2.25}};
    poly.properties = json{{"id", "P-1"}, {"rate", 0.0}};

    GeoFeature line;
    line.geometry_type = "LineString";
    line.coords = {{10.5, -4.0}, {20.0, -4.0}};
    line.properties = json{{"peak_px", 42}};

    const std::string path = tmp.file("features.geojson");
    write_geojson({poly, line}, path);
    const auto back = read_geojson(path);

    REQUIRE(back.size() == 2);
    CHECK(back[0].geometry_type == "Polygon");
    REQUIRE(back[0].coords.size() == 4);  // closing vertex dropped on read
    CHECK(back[0].coords[2].first == doctest::Approx(3.5));
    CHECK(back[0].coords[2].second == doctest::Approx(2.25));
    CHECK(back[0].properties["id"] == "P-1");
    CHECK(back[1].geometry_type == "LineString");
    REQUIRE(back[1].coords.size() == 2);
    CHECK(back[1].properties["peak_px"] == 42);
}

TEST_CASE("feature_bounds covers every vertex") {
    GeoFeature f;
    f.coords = {{3.0, -1.0}, {-2.0, 4.0}, {0.5, 0.5}};
    const Rect b = feature_bounds(f);
    CHECK(b.min_x == -2.0);
    CHECK(b.min_y == -1.0);
    CHECK(b.max_x == 3.0);
    CHECK(b.max_y == 4.0);
}

TEST_CASE("malformed GeoJSON inputs are data errors") {
    TempDir tmp;

    auto write = [&](const char* name, const std::string& body) {
        const std::string p = tmp.file(name);
        std::ofstream(p) << body;
        return p;
    };

    CHECK_THROWS_AS(read_geojson(tmp.file("missing.geojson")), DataError);
    CHECK_THROWS_AS(read_geojson(write("a.geojson", "{not json")), DataError);
    CHECK_THROWS_AS(read_geojson(write("b.geojson", R"({"type":"Feature"})")), DataError);
    CHECK_THROWS_AS(
        read_geojson(write("c.geojson",
                           R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
                           R"("geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1],[0,0]]]},)"
                           R"("properties":{}}]})")),
        DataError);  // ring collapses to two distinct vertices
    CHECK_THROWS_AS(
        read_geojson(write("d.geojson",
                           R"({"type":"FeatureCollection","features":[{"type":"Feature",)"
                           R"("geometry":{"type":"LineString","coordinates":[[0,0]]},)"
                           R"("properties":{}}]})")),
        DataError);
}

TEST_CASE("Rect::contains is half-open") {
    Rect r{0.0, 0.0, 2.0, 3.0};
    CHECK(r.contains(0.0, 0.0));
    CHECK(r.contains(1.999, 2.999));
    CHECK_FALSE(r.contains(2.0, 1.0));
    CHECK_FALSE(r.contains(1.0, 3.0));
    CHECK(r.area() == doctest::Approx(6.0));
}
