#pragma once

#include <string>

#include "rowpip/geo_raster.hpp"

namespace rowpip {

struct RasterWriteOptions {
    bool deflate = false;  // GeoTIFF only
    bool tiled = false;    // GeoTIFF only; 256x256 tiles
};

// Reads a GeoTIFF (baseline profile: 8-bit, 1 or 3 bands, striped or tiled,
// uncompressed or deflate) or a PNG/PGM with a <name>.geo.json sidecar.
// Format is picked by file extension. 3-band files map bands to R,G,B.
// A file with no embedded geotransform falls back to the sidecar; if neither
// exists the read fails with a georeferencing error.
GeoRaster read_raster(const std::string& path);

// Writes .tif/.tiff as baseline GeoTIFF (little-endian, with
// ModelPixelScaleTag + ModelTiepointTag), .png/.pgm as image plus sidecar.
void write_raster(const GeoRaster& r, const std::string& path,
                  const RasterWriteOptions& opts = {});

// Bare PNG with no sidecar and no ancillary chunks; for renderings where the
// georeferencing is not meant to survive.
void write_png_image(const GeoRaster& r, const std::string& path);

// Sidecar path for an image: "<dir>/<stem>.geo.json".
std::string sidecar_path(const std::string& image_path);

GeoTransform read_sidecar(const std::string& sidecar);
void write_sidecar(const GeoTransform& t, const std::string& sidecar);

}  // namespace rowpip
