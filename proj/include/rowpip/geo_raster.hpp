#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rowpip/error.hpp"
#include "rowpip/geo_transform.hpp"

namespace rowpip {

// 8-bit pixel grid (1 or 3 bands, band-interleaved-by-pixel) with a north-up
// geotransform. Immutable after construction by convention: pipeline stages
// take rasters by const reference and return new ones.
class GeoRaster {
public:
    GeoRaster() = default;

    GeoRaster(int width, int height, int bands, GeoTransform transform,
              std::uint8_t fill = 0)
        : width_(width), height_(height), bands_(bands), transform_(std::move(transform)) {
        if (width_ < 1 || height_ < 1) throw DataError("raster: width and height must be >= 1");
        if (bands_ != 1 && bands_ != 3) throw DataError("raster: bands must be 1 or 3");
        transform_.validate();
        samples_.assign(static_cast<std::size_t>(width_) * height_ * bands_, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int bands() const { return bands_; }
    const GeoTransform& transform() const { return transform_; }
    GeoTransform& transform() { return transform_; }
    std::optional<std::uint8_t> nodata() const { return nodata_; }
    void set_nodata(std::optional<std::uint8_t> v) { nodata_ = v; }

    std::size_t sample_count() const { return samples_.size(); }
    const std::uint8_t* data() const { return samples_.data(); }
    std::uint8_t* data() { return samples_.data(); }

    // Unchecked hot-path access; callers stay in bounds.
    std::uint8_t operator()(int row, int col, int band = 0) const {
        return samples_[(static_cast<std::size_t>(row) * width_ + col) * bands_ + band];
    }
    std::uint8_t& operator()(int row, int col, int band = 0) {
        return samples_[(static_cast<std::size_t>(row) * width_ + col) * bands_ + band];
    }

    // Checked access; out of bounds is a defined error, never silent wrap.
    std::uint8_t at(int row, int col, int band = 0) const {
        check_bounds(row, col, band);
        return (*this)(row, col, band);
    }
    void set_at(int row, int col, std::uint8_t v, int band = 0) {
        check_bounds(row, col, band);
        (*this)(row, col, band) = v;
    }

    const std::uint8_t* row_ptr(int row) const {
        return samples_.data() + static_cast<std::size_t>(row) * width_ * bands_;
    }
    std::uint8_t* row_ptr(int row) {
        return samples_.data() + static_cast<std::size_t>(row) * width_ * bands_;
    }

    bool same_grid(const GeoRaster& other) const {
        const auto& a = transform_;
        const auto& b = other.transform_;
        return width_ == other.width_ && height_ == other.height_ &&
               a.origin_x == b.origin_x && a.origin_y == b.origin_y &&
               a.pixel_size_x == b.pixel_size_x && a.pixel_size_y == b.pixel_size_y;
    }

private:
    void check_bounds(int row, int col, int band) const {
        if (row < 0 || row >= height_ || col < 0 || col >= width_ || band < 0 || band >= bands_) {
            throw DataError("raster: access out of bounds at (band=" + std::to_string(band) +
                            ", row=" + std::to_string(row) + ", col=" + std::to_string(col) + ")");
        }
    }

    int width_ = 0;
    int height_ = 0;
    int bands_ = 0;
    GeoTransform transform_;
    std::optional<std::uint8_t> nodata_;
    std::vector<std::uint8_t> samples_;
};

// A BinaryMask is a 1-band GeoRaster whose samples are all 0 or 1.
using BinaryMask = GeoRaster;

// Normalizes an arbitrary 1-band raster into a BinaryMask: nodata counts as 0,
// any other nonzero sample becomes 1.
BinaryMask to_binary_mask(const GeoRaster& r);

// Throws DataError if the raster is not a valid BinaryMask.
void validate_binary_mask(const BinaryMask& m);

// (count of 1-samples) * pixel_size_x * pixel_size_y, in square meters.
double mask_area(const BinaryMask& m);

// 1-band grid of doubles sharing the GeoRaster georeferencing model; carries
// real-valued per-pixel indices (ExGI) that do not fit the 8-bit sample type.
class ValueRaster {
public:
    ValueRaster() = default;
    ValueRaster(int width, int height, GeoTransform transform, double fill = 0.0)
        : width_(width), height_(height), transform_(std::move(transform)) {
        if (width_ < 1 || height_ < 1) throw DataError("raster: width and height must be >= 1");
        transform_.validate();
        values_.assign(static_cast<std::size_t>(width_) * height_, fill);
    }

    int width() const { return width_; }
    int height() const { return height_; }
    const GeoTransform& transform() const { return transform_; }

    double operator()(int row, int col) const {
        return values_[static_cast<std::size_t>(row) * width_ + col];
    }
    double& operator()(int row, int col) {
        return values_[static_cast<std::size_t>(row) * width_ + col];
    }

    const double* row_ptr(int row) const {
        return values_.data() + static_cast<std::size_t>(row) * width_;
    }
    double* row_ptr(int row) {
        return values_.data() + static_cast<std::size_t>(row) * width_;
    }

    const std::vector<double>& values() const { return values_; }

private:
    int width_ = 0;
    int height_ = 0;
    GeoTransform transform_;
    std::vector<double> values_;
};

}  // namespace rowpip
