#include "rowpip/raster_io.hpp"

#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace rowpip {
namespace {

std::string lower_ext(const std::string& path) {
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    in.seekg(0, std::ios::end);
    std::streamoff size = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> buf(static_cast<std::size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(buf.data()), size);
    if (!in) throw DataError("failed to read file: " + path);
    return buf;
}

// ---------------------------------------------------------------------------
// Baseline TIFF / GeoTIFF
// ---------------------------------------------------------------------------

constexpr std::uint16_t TAG_IMAGE_WIDTH = 256;
constexpr std::uint16_t TAG_IMAGE_LENGTH = 257;
constexpr std::uint16_t TAG_BITS_PER_SAMPLE = 258;
constexpr std::uint16_t TAG_COMPRESSION = 259;
constexpr std::uint16_t TAG_PHOTOMETRIC = 262;
constexpr std::uint16_t TAG_STRIP_OFFSETS = 273;
constexpr std::uint16_t TAG_SAMPLES_PER_PIXEL = 277;
constexpr std::uint16_t TAG_ROWS_PER_STRIP = 278;
constexpr std::uint16_t TAG_STRIP_BYTE_COUNTS = 279;
constexpr std::uint16_t TAG_PLANAR_CONFIG = 284;
constexpr std::uint16_t TAG_PREDICTOR = 317;
constexpr std::uint16_t TAG_TILE_WIDTH = 322;
constexpr std::uint16_t TAG_TILE_LENGTH = 323;
constexpr std::uint16_t TAG_TILE_OFFSETS = 324;
constexpr std::uint16_t TAG_TILE_BYTE_COUNTS = 325;
constexpr std::uint16_t TAG_SAMPLE_FORMAT = 339;
constexpr std::uint16_t TAG_MODEL_PIXEL_SCALE = 33550;
constexpr std::uint16_t TAG_MODEL_TIEPOINT = 33922;
constexpr std::uint16_t TAG_MODEL_TRANSFORMATION = 34264;
constexpr std::uint16_t TAG_GEO_KEY_DIRECTORY = 34735;
constexpr std::uint16_t TAG_GEO_ASCII_PARAMS = 34737;
constexpr std::uint16_t TAG_GDAL_NODATA = 42113;

constexpr std::uint16_t GEOKEY_CITATION = 1026;

struct TiffEntry {
    std::uint16_t type = 0;
    std::vector<double> numbers;
    std::string text;
};

class TiffParser {
public:
    explicit TiffParser(std::vector<std::uint8_t> bytes, const std::string& path)
        : bytes_(std::move(bytes)), path_(path) {
        if (bytes_.size() < 8) fail("file too small for a TIFF header");
        if (bytes_[0] == 'I' && bytes_[1] == 'I') {
            big_endian_ = false;
        } else if (bytes_[0] == 'M' && bytes_[1] == 'M') {
            big_endian_ = true;
        } else {
            fail("not a TIFF file (bad byte-order mark)");
        }
        const std::uint16_t magic = u16(2);
        if (magic == 43) fail("BigTIFF is unsupported (classic TIFF only)");
        if (magic != 42) fail("not a TIFF file (bad magic)");
        parse_ifd(u32(4));
    }

    bool has(std::uint16_t tag) const { return entries_.count(tag) != 0; }

    std::uint64_t scalar(std::uint16_t tag, std::uint64_t fallback) const {
        auto it = entries_.find(tag);
        if (it == entries_.end() || it->second.numbers.empty()) return fallback;
        return static_cast<std::uint64_t>(it->second.numbers[0]);
    }

    const std::vector<double>& numbers(std::uint16_t tag) const {
        static const std::vector<double> empty;
        auto it = entries_.find(tag);
        return it == entries_.end() ? empty : it->second.numbers;
    }

    std::string text(std::uint16_t tag) const {
        auto it = entries_.find(tag);
        return it == entries_.end() ? std::string() : it->second.text;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError("GeoTIFF format error in " + path_ + ": " + msg);
    }

private:
    void parse_ifd(std::uint32_t offset) {
        if (offset + 2 > bytes_.size()) fail("IFD offset out of range");
        const std::uint16_t count = u16(offset);
        std::size_t pos = offset + 2;
        if (pos + static_cast<std::size_t>(count) * 12 + 4 > bytes_.size()) {
            fail("truncated IFD");
        }
        for (std::uint16_t i = 0; i < count; ++i, pos += 12) {
            const std::uint16_t tag = u16(pos);
            const std::uint16_t type = u16(pos + 2);
            const std::uint32_t n = u32(pos + 4);
            TiffEntry entry;
            entry.type = type;
            const std::size_t elem = type_size(type);
            if (elem == 0) continue;  // unknown type, skip the tag
            const std::size_t total = elem * n;
            const std::size_t value_pos = total <= 4 ? pos + 8 : u32(pos + 8);
            if (value_pos + total > bytes_.size()) fail("tag value out of range");
            if (type == 2) {  // ASCII
                entry.text.assign(reinterpret_cast<const char*>(bytes_.data() + value_pos), n);
                while (!entry.text.empty() && entry.text.back() == '\0') entry.text.pop_back();
            } else {
                entry.numbers.reserve(n);
                for (std::uint32_t k = 0; k < n; ++k) {
                    entry.numbers.push_back(read_number(type, value_pos + k * elem));
                }
            }
            entries_[tag] = std::move(entry);
        }
        // Extra IFDs (overviews, pages) are ignored; the first one is the image.
    }

    static std::size_t type_size(std::uint16_t type) {
        switch (type) {
            case 1: case 2: case 6: case 7: return 1;   // BYTE/ASCII/SBYTE/UNDEFINED
            case 3: case 8: return 2;                   // SHORT/SSHORT
            case 4: case 9: case 11: return 4;          // LONG/SLONG/FLOAT
            case 5: case 10: case 12: return 8;         // RATIONAL/SRATIONAL/DOUBLE
            default: return 0;
        }
    }

    double read_number(std::uint16_t type, std::size_t pos) const {
        switch (type) {
            case 1: case 7: return bytes_[pos];
            case 6: return static_cast<std::int8_t>(bytes_[pos]);
            case 3: return u16(pos);
            case 8: return static_cast<std::int16_t>(u16(pos));
            case 4: return u32(pos);
            case 9: return static_cast<std::int32_t>(u32(pos));
            case 5: {
                const double den = u32(pos + 4);
                return den == 0 ? 0.0 : u32(pos) / den;
            }
            case 10: {
                const double den = static_cast<std::int32_t>(u32(pos + 4));
                return den == 0 ? 0.0 : static_cast<std::int32_t>(u32(pos)) / den;
            }
            case 11: {
                std::uint32_t raw = u32(pos);
                float f;
                std::memcpy(&f, &raw, 4);
                return f;
            }
            case 12: {
                std::uint64_t raw = 0;
                for (int i = 0; i < 8; ++i) {
                    const int shift = big_endian_ ? (56 - 8 * i) : (8 * i);
                    raw |= static_cast<std::uint64_t>(bytes_[pos + i]) << shift;
                }
                double d;
                std::memcpy(&d, &raw, 8);
                return d;
            }
            default: return 0.0;
        }
    }

    std::uint16_t u16(std::size_t pos) const {
        return big_endian_ ? static_cast<std::uint16_t>(bytes_[pos] << 8 | bytes_[pos + 1])
                           : static_cast<std::uint16_t>(bytes_[pos + 1] << 8 | bytes_[pos]);
    }
    std::uint32_t u32(std::size_t pos) const {
        if (big_endian_) {
            return static_cast<std::uint32_t>(bytes_[pos]) << 24 |
                   static_cast<std::uint32_t>(bytes_[pos + 1]) << 16 |
                   static_cast<std::uint32_t>(bytes_[pos + 2]) << 8 | bytes_[pos + 3];
        }
        return static_cast<std::uint32_t>(bytes_[pos + 3]) << 24 |
               static_cast<std::uint32_t>(bytes_[pos + 2]) << 16 |
               static_cast<std::uint32_t>(bytes_[pos + 1]) << 8 | bytes_[pos];
    }

public:
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

private:
    std::vector<std::uint8_t> bytes_;
    std::string path_;
    bool big_endian_ = false;
    std::map<std::uint16_t, TiffEntry> entries_;
};

std::vector<std::uint8_t> inflate_block(const std::uint8_t* src, std::size_t src_len,
                                        std::size_t expected_len, const std::string& path) {
    std::vector<std::uint8_t> out(expected_len);
    uLongf dest_len = static_cast<uLongf>(expected_len);
    const int rc = uncompress(out.data(), &dest_len, src, static_cast<uLong>(src_len));
    if (rc != Z_OK) {
        throw DataError("GeoTIFF format error in " + path + ": deflate block failed to inflate");
    }
    out.resize(dest_len);
    return out;
}

void undo_horizontal_predictor(std::uint8_t* row, std::size_t width, int spp) {
    for (std::size_t i = spp; i < width * spp; ++i) {
        row[i] = static_cast<std::uint8_t>(row[i] + row[i - spp]);
    }
}

// Parses GeoKeyDirectory + GeoAsciiParams for the citation key; the citation
// carries this toolkit's opaque crs_label.
std::string citation_from_geokeys(const TiffParser& tiff) {
    const auto& dir = tiff.numbers(TAG_GEO_KEY_DIRECTORY);
    if (dir.size() < 4) return {};
    const std::string ascii = tiff.text(TAG_GEO_ASCII_PARAMS);
    const std::size_t nkeys = static_cast<std::size_t>(dir[3]);
    for (std::size_t k = 0; k < nkeys && 4 + k * 4 + 3 < dir.size(); ++k) {
        const std::uint16_t key_id = static_cast<std::uint16_t>(dir[4 + k * 4]);
        const std::uint16_t location = static_cast<std::uint16_t>(dir[4 + k * 4 + 1]);
        const std::size_t count = static_cast<std::size_t>(dir[4 + k * 4 + 2]);
        const std::size_t value = static_cast<std::size_t>(dir[4 + k * 4 + 3]);
        if (key_id == GEOKEY_CITATION && location == TAG_GEO_ASCII_PARAMS) {
            if (value >= ascii.size()) return {};
            std::string s = ascii.substr(value, std::min(count, ascii.size() - value));
            if (!s.empty() && s.back() == '|') s.pop_back();
            return s;
        }
    }
    return {};
}

GeoRaster read_geotiff(const std::string& path) {
    TiffParser tiff(read_file_bytes(path), path);

    if (!tiff.has(TAG_IMAGE_WIDTH) || !tiff.has(TAG_IMAGE_LENGTH)) {
        tiff.fail("missing ImageWidth/ImageLength");
    }
    const std::uint64_t width = tiff.scalar(TAG_IMAGE_WIDTH, 0);
    const std::uint64_t height = tiff.scalar(TAG_IMAGE_LENGTH, 0);
    if (width < 1 || height < 1) tiff.fail("degenerate image dimensions");

    const int spp = static_cast<int>(tiff.scalar(TAG_SAMPLES_PER_PIXEL, 1));
    if (spp != 1 && spp != 3) {
        tiff.fail("unsupported SamplesPerPixel=" + std::to_string(spp) + " (need 1 or 3)");
    }
    for (double bits : tiff.numbers(TAG_BITS_PER_SAMPLE)) {
        if (bits != 8.0) {
            tiff.fail("unsupported BitsPerSample=" + std::to_string(static_cast<int>(bits)) +
                      " (only 8-bit)");
        }
    }
    const std::uint64_t compression = tiff.scalar(TAG_COMPRESSION, 1);
    if (compression != 1 && compression != 8 && compression != 32946) {
        tiff.fail("unsupported Compression=" + std::to_string(compression) +
                  " (only none or deflate)");
    }
    const std::uint64_t planar = tiff.scalar(TAG_PLANAR_CONFIG, 1);
    if (planar != 1) tiff.fail("unsupported PlanarConfiguration=2 (chunky only)");
    const std::uint64_t predictor = tiff.scalar(TAG_PREDICTOR, 1);
    if (predictor != 1 && predictor != 2) {
        tiff.fail("unsupported Predictor=" + std::to_string(predictor));
    }
    if (tiff.has(TAG_SAMPLE_FORMAT)) {
        for (double f : tiff.numbers(TAG_SAMPLE_FORMAT)) {
            if (f != 1.0) tiff.fail("unsupported SampleFormat (unsigned integer only)");
        }
    }

    // Geotransform: ModelPixelScale + ModelTiepoint, or a diagonal
    // ModelTransformation. Anything with rotation/shear is rejected.
    GeoTransform gt;
    bool has_geo = false;
    const auto& scale = tiff.numbers(TAG_MODEL_PIXEL_SCALE);
    const auto& tie = tiff.numbers(TAG_MODEL_TIEPOINT);
    const auto& mt = tiff.numbers(TAG_MODEL_TRANSFORMATION);
    if (scale.size() >= 2 && tie.size() >= 6) {
        gt.pixel_size_x = scale[0];
        gt.pixel_size_y = scale[1];
        // Tiepoint maps raster point (i,j) to model (x,y); with the default
        // pixel-is-area convention (0,0) is the top-left corner.
        gt.origin_x = tie[3] - tie[0] * gt.pixel_size_x;
        gt.origin_y = tie[4] + tie[1] * gt.pixel_size_y;
        has_geo = true;
    } else if (mt.size() >= 16) {
        if (mt[1] != 0.0 || mt[4] != 0.0) {
            throw DataError("georeferencing error in " + path +
                            ": rotated geotransforms are unsupported (north-up only)");
        }
        if (!(mt[0] > 0.0) || !(mt[5] < 0.0)) {
            throw DataError("georeferencing error in " + path +
                            ": ModelTransformation must scale east/south");
        }
        gt.pixel_size_x = mt[0];
        gt.pixel_size_y = -mt[5];
        gt.origin_x = mt[3];
        gt.origin_y = mt[7];
        has_geo = true;
    }
    if (has_geo) gt.crs_label = citation_from_geokeys(tiff);

    GeoRaster out(static_cast<int>(width), static_cast<int>(height), spp,
                  has_geo ? gt : GeoTransform{});
    const std::size_t row_bytes = static_cast<std::size_t>(width) * spp;
    const auto& bytes = tiff.bytes();

    if (tiff.has(TAG_TILE_OFFSETS)) {
        const std::uint64_t tw = tiff.scalar(TAG_TILE_WIDTH, 0);
        const std::uint64_t th = tiff.scalar(TAG_TILE_LENGTH, 0);
        if (tw < 1 || th < 1) tiff.fail("tiled layout missing TileWidth/TileLength");
        const auto& offsets = tiff.numbers(TAG_TILE_OFFSETS);
        const auto& counts = tiff.numbers(TAG_TILE_BYTE_COUNTS);
        const std::uint64_t tiles_across = (width + tw - 1) / tw;
        const std::uint64_t tiles_down = (height + th - 1) / th;
        if (offsets.size() < tiles_across * tiles_down) tiff.fail("too few tile offsets");
        const std::size_t tile_bytes = static_cast<std::size_t>(tw) * th * spp;
        for (std::uint64_t ty = 0; ty < tiles_down; ++ty) {
            for (std::uint64_t tx = 0; tx < tiles_across; ++tx) {
                const std::size_t idx = static_cast<std::size_t>(ty * tiles_across + tx);
                const std::size_t off = static_cast<std::size_t>(offsets[idx]);
                const std::size_t cnt = idx < counts.size()
                                            ? static_cast<std::size_t>(counts[idx])
                                            : tile_bytes;
                if (off + cnt > bytes.size()) tiff.fail("tile data out of range");
                std::vector<std::uint8_t> tile;
                if (compression == 1) {
                    tile.assign(bytes.begin() + off, bytes.begin() + off + cnt);
                } else {
                    tile = inflate_block(bytes.data() + off, cnt, tile_bytes, path);
                }
                if (tile.size() < tile_bytes) tiff.fail("short tile data");
                const std::uint64_t copy_rows = std::min(th, height - ty * th);
                const std::uint64_t copy_cols = std::min(tw, width - tx * tw);
                for (std::uint64_t r = 0; r < copy_rows; ++r) {
                    std::uint8_t* tile_row = tile.data() + static_cast<std::size_t>(r) * tw * spp;
                    if (predictor == 2) undo_horizontal_predictor(tile_row, tw, spp);
                    std::memcpy(out.row_ptr(static_cast<int>(ty * th + r)) +
                                    static_cast<std::size_t>(tx) * tw * spp,
                                tile_row, static_cast<std::size_t>(copy_cols) * spp);
                }
            }
        }
    } else {
        if (!tiff.has(TAG_STRIP_OFFSETS)) tiff.fail("missing StripOffsets");
        const auto& offsets = tiff.numbers(TAG_STRIP_OFFSETS);
        const auto& counts = tiff.numbers(TAG_STRIP_BYTE_COUNTS);
        const std::uint64_t rps = tiff.scalar(TAG_ROWS_PER_STRIP, height);
        if (rps < 1) tiff.fail("RowsPerStrip must be >= 1");
        const std::uint64_t strips = (height + rps - 1) / rps;
        if (offsets.size() < strips) tiff.fail("too few strip offsets");
        for (std::uint64_t s = 0; s < strips; ++s) {
            const std::uint64_t first_row = s * rps;
            const std::uint64_t rows = std::min(rps, height - first_row);
            const std::size_t raw_len = static_cast<std::size_t>(rows) * row_bytes;
            const std::size_t off = static_cast<std::size_t>(offsets[s]);
            const std::size_t cnt = s < counts.size() ? static_cast<std::size_t>(counts[s])
                                                      : raw_len;
            if (off + cnt > bytes.size()) tiff.fail("strip data out of range");
            std::vector<std::uint8_t> strip;
            const std::uint8_t* src = nullptr;
            if (compression == 1) {
                if (cnt < raw_len) tiff.fail("short strip data");
                src = bytes.data() + off;
            } else {
                strip = inflate_block(bytes.data() + off, cnt, raw_len, path);
                if (strip.size() < raw_len) tiff.fail("short strip data");
                src = strip.data();
            }
            for (std::uint64_t r = 0; r < rows; ++r) {
                std::uint8_t* dst = out.row_ptr(static_cast<int>(first_row + r));
                std::memcpy(dst, src + static_cast<std::size_t>(r) * row_bytes, row_bytes);
                if (predictor == 2) undo_horizontal_predictor(dst, width, spp);
            }
        }
    }

    if (tiff.has(TAG_GDAL_NODATA)) {
        const std::string nd = tiff.text(TAG_GDAL_NODATA);
        try {
            const int v = std::stoi(nd);
            if (v >= 0 && v <= 255) out.set_nodata(static_cast<std::uint8_t>(v));
        } catch (...) {
            // non-integer nodata on an 8-bit raster carries no information
        }
    }

    if (!has_geo) {
        const std::string sc = sidecar_path(path);
        if (std::filesystem::exists(sc)) {
            out.transform() = read_sidecar(sc);
        } else {
            throw DataError("georeferencing error: " + path +
                            " has no geotransform tags and no sidecar " + sc);
        }
    }
    return out;
}

class TiffWriter {
public:
    explicit TiffWriter(const std::string& path) : out_(path, std::ios::binary), path_(path) {
        if (!out_) throw DataError("cannot open for writing: " + path);
        const char header[8] = {'I', 'I', 42, 0, 0, 0, 0, 0};  // IFD offset patched later
        out_.write(header, 8);
        pos_ = 8;
    }

    std::uint32_t write_block(const std::uint8_t* data, std::size_t len) {
        pad_to_even();
        const std::uint32_t at = pos_;
        out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
        pos_ += static_cast<std::uint32_t>(len);
        return at;
    }

    void add_shorts(std::uint16_t tag, const std::vector<std::uint16_t>& v) {
        Field f{tag, 3, static_cast<std::uint32_t>(v.size()), {}};
        for (auto x : v) put16(f.raw, x);
        fields_.push_back(std::move(f));
    }
    void add_longs(std::uint16_t tag, const std::vector<std::uint32_t>& v) {
        Field f{tag, 4, static_cast<std::uint32_t>(v.size()), {}};
        for (auto x : v) put32(f.raw, x);
        fields_.push_back(std::move(f));
    }
    void add_doubles(std::uint16_t tag, const std::vector<double>& v) {
        Field f{tag, 12, static_cast<std::uint32_t>(v.size()), {}};
        for (double x : v) {
            std::uint64_t raw;
            std::memcpy(&raw, &x, 8);
            for (int i = 0; i < 8; ++i) f.raw.push_back(static_cast<std::uint8_t>(raw >> (8 * i)));
        }
        fields_.push_back(std::move(f));
    }
    void add_ascii(std::uint16_t tag, const std::string& s) {
        Field f{tag, 2, static_cast<std::uint32_t>(s.size() + 1), {}};
        f.raw.assign(s.begin(), s.end());
        f.raw.push_back(0);
        fields_.push_back(std::move(f));
    }

    void finish() {
        // Out-of-line values first, then the IFD, then patch the header.
        std::sort(fields_.begin(), fields_.end(),
                  [](const Field& a, const Field& b) { return a.tag < b.tag; });
        for (auto& f : fields_) {
            if (f.raw.size() > 4) f.offset = write_block(f.raw.data(), f.raw.size());
        }
        pad_to_even();
        const std::uint32_t ifd_at = pos_;
        std::vector<std::uint8_t> ifd;
        put16(ifd, static_cast<std::uint16_t>(fields_.size()));
        for (const auto& f : fields_) {
            put16(ifd, f.tag);
            put16(ifd, f.type);
            put32(ifd, f.count);
            if (f.raw.size() > 4) {
                put32(ifd, f.offset);
            } else {
                std::uint8_t inline4[4] = {0, 0, 0, 0};
                std::memcpy(inline4, f.raw.data(), f.raw.size());
                ifd.insert(ifd.end(), inline4, inline4 + 4);
            }
        }
        put32(ifd, 0);  // no next IFD
        write_block(ifd.data(), ifd.size());
        out_.seekp(4);
        std::uint8_t at4[4];
        std::uint8_t* p = at4;
        *p++ = static_cast<std::uint8_t>(ifd_at);
        *p++ = static_cast<std::uint8_t>(ifd_at >> 8);
        *p++ = static_cast<std::uint8_t>(ifd_at >> 16);
        *p = static_cast<std::uint8_t>(ifd_at >> 24);
        out_.write(reinterpret_cast<const char*>(at4), 4);
        out_.flush();
        if (!out_) throw DataError("I/O failure writing " + path_);
    }

private:
    struct Field {
        std::uint16_t tag;
        std::uint16_t type;
        std::uint32_t count;
        std::vector<std::uint8_t> raw;
        std::uint32_t offset = 0;
    };

    static void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
        v.push_back(static_cast<std::uint8_t>(x));
        v.push_back(static_cast<std::uint8_t>(x >> 8));
    }
    static void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
        v.push_back(static_cast<std::uint8_t>(x));
        v.push_back(static_cast<std::uint8_t>(x >> 8));
        v.push_back(static_cast<std::uint8_t>(x >> 16));
        v.push_back(static_cast<std::uint8_t>(x >> 24));
    }
    void pad_to_even() {
        if (pos_ & 1) {
            const char zero = 0;
            out_.write(&zero, 1);
            ++pos_;
        }
    }

    std::ofstream out_;
    std::string path_;
    std::uint32_t pos_ = 0;
    std::vector<Field> fields_;
};

std::vector<std::uint8_t> deflate_block(const std::uint8_t* src, std::size_t len) {
    uLongf bound = compressBound(static_cast<uLong>(len));
    std::vector<std::uint8_t> out(bound);
    if (compress2(out.data(), &bound, src, static_cast<uLong>(len), 6) != Z_OK) {
        throw InternalError("deflate compression failed");
    }
    out.resize(bound);
    return out;
}

void write_geotiff(const GeoRaster& r, const std::string& path, const RasterWriteOptions& opts) {
    const std::uint64_t estimated =
        static_cast<std::uint64_t>(r.sample_count()) + 4096;
    if (estimated >= 0xFFFF0000ULL) {
        throw DataError("raster too large for classic TIFF offsets: " + path);
    }

    TiffWriter w(path);
    const int spp = r.bands();
    const std::uint16_t compression = opts.deflate ? 8 : 1;

    std::vector<std::uint32_t> block_offsets;
    std::vector<std::uint32_t> block_counts;

    if (opts.tiled) {
        const int tile_dim = 256;
        const int across = (r.width() + tile_dim - 1) / tile_dim;
        const int down = (r.height() + tile_dim - 1) / tile_dim;
        std::vector<std::uint8_t> tile(static_cast<std::size_t>(tile_dim) * tile_dim * spp);
        for (int ty = 0; ty < down; ++ty) {
            for (int tx = 0; tx < across; ++tx) {
                std::fill(tile.begin(), tile.end(), 0);
                const int rows = std::min(tile_dim, r.height() - ty * tile_dim);
                const int cols = std::min(tile_dim, r.width() - tx * tile_dim);
                for (int y = 0; y < rows; ++y) {
                    std::memcpy(tile.data() + static_cast<std::size_t>(y) * tile_dim * spp,
                                r.row_ptr(ty * tile_dim + y) +
                                    static_cast<std::size_t>(tx) * tile_dim * spp,
                                static_cast<std::size_t>(cols) * spp);
                }
                if (opts.deflate) {
                    auto z = deflate_block(tile.data(), tile.size());
                    block_offsets.push_back(w.write_block(z.data(), z.size()));
                    block_counts.push_back(static_cast<std::uint32_t>(z.size()));
                } else {
                    block_offsets.push_back(w.write_block(tile.data(), tile.size()));
                    block_counts.push_back(static_cast<std::uint32_t>(tile.size()));
                }
            }
        }
        w.add_longs(TAG_TILE_WIDTH, {static_cast<std::uint32_t>(tile_dim)});
        w.add_longs(TAG_TILE_LENGTH, {static_cast<std::uint32_t>(tile_dim)});
        w.add_longs(TAG_TILE_OFFSETS, block_offsets);
        w.add_longs(TAG_TILE_BYTE_COUNTS, block_counts);
    } else {
        const std::size_t row_bytes = static_cast<std::size_t>(r.width()) * spp;
        // ~1 MB strips
        int rps = static_cast<int>(std::max<std::size_t>(1, (1u << 20) / std::max<std::size_t>(1, row_bytes)));
        rps = std::min(rps, r.height());
        for (int y0 = 0; y0 < r.height(); y0 += rps) {
            const int rows = std::min(rps, r.height() - y0);
            const std::uint8_t* src = r.row_ptr(y0);
            const std::size_t len = static_cast<std::size_t>(rows) * row_bytes;
            if (opts.deflate) {
                auto z = deflate_block(src, len);
                block_offsets.push_back(w.write_block(z.data(), z.size()));
                block_counts.push_back(static_cast<std::uint32_t>(z.size()));
            } else {
                block_offsets.push_back(w.write_block(src, len));
                block_counts.push_back(static_cast<std::uint32_t>(len));
            }
        }
        w.add_longs(TAG_STRIP_OFFSETS, block_offsets);
        w.add_longs(TAG_ROWS_PER_STRIP, {static_cast<std::uint32_t>(rps)});
        w.add_longs(TAG_STRIP_BYTE_COUNTS, block_counts);
    }

    w.add_longs(TAG_IMAGE_WIDTH, {static_cast<std::uint32_t>(r.width())});
    w.add_longs(TAG_IMAGE_LENGTH, {static_cast<std::uint32_t>(r.height())});
    w.add_shorts(TAG_BITS_PER_SAMPLE, std::vector<std::uint16_t>(spp, 8));
    w.add_shorts(TAG_COMPRESSION, {compression});
    w.add_shorts(TAG_PHOTOMETRIC, {static_cast<std::uint16_t>(spp == 3 ? 2 : 1)});
    w.add_shorts(TAG_SAMPLES_PER_PIXEL, {static_cast<std::uint16_t>(spp)});
    w.add_shorts(TAG_PLANAR_CONFIG, {1});

    const GeoTransform& t = r.transform();
    w.add_doubles(TAG_MODEL_PIXEL_SCALE, {t.pixel_size_x, t.pixel_size_y, 0.0});
    w.add_doubles(TAG_MODEL_TIEPOINT, {0.0, 0.0, 0.0, t.origin_x, t.origin_y, 0.0});
    if (!t.crs_label.empty()) {
        const std::string ascii = t.crs_label + "|";
        w.add_shorts(TAG_GEO_KEY_DIRECTORY,
                     {1, 1, 0, 1, GEOKEY_CITATION, TAG_GEO_ASCII_PARAMS,
                      static_cast<std::uint16_t>(ascii.size()), 0});
        w.add_ascii(TAG_GEO_ASCII_PARAMS, ascii);
    }
    if (r.nodata()) w.add_ascii(TAG_GDAL_NODATA, std::to_string(int(*r.nodata())));

    w.finish();
}

// ---------------------------------------------------------------------------
// PNG (via libpng)
// ---------------------------------------------------------------------------

struct PngReadCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GeoRaster read_png(const std::string& path) {
    PngReadCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw DataError("cannot open file: " + path);
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw InternalError("libpng initialization failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw DataError("PNG format error in " + path);
    }
    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);

    const png_uint_32 width = png_get_image_width(ctx.png, ctx.info);
    const png_uint_32 height = png_get_image_height(ctx.png, ctx.info);
    const int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    int color_type = png_get_color_type(ctx.png, ctx.info);

    if (bit_depth > 8) {
        throw DataError("PNG format error in " + path + ": unsupported bit depth " +
                        std::to_string(bit_depth) + " (only 8-bit)");
    }
    if (color_type & PNG_COLOR_MASK_ALPHA) {
        throw DataError("PNG format error in " + path + ": alpha channel unsupported");
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(ctx.png);
        color_type = PNG_COLOR_TYPE_RGB;
    }
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    const int bands = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    GeoRaster out(static_cast<int>(width), static_cast<int>(height), bands, GeoTransform{});
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = out.row_ptr(static_cast<int>(y));
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);

    const std::string sc = sidecar_path(path);
    if (!std::filesystem::exists(sc)) {
        throw DataError("georeferencing error: " + path + " requires a sidecar " + sc);
    }
    out.transform() = read_sidecar(sc);
    return out;
}

struct PngWriteCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    FILE* fp = nullptr;
    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

}  // namespace

void write_png_image(const GeoRaster& r, const std::string& path) {
    PngWriteCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw DataError("cannot open for writing: " + path);
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = png_create_info_struct(ctx.png);
    if (!ctx.png || !ctx.info) throw InternalError("libpng initialization failed");
    if (setjmp(png_jmpbuf(ctx.png))) {
        throw DataError("I/O failure writing " + path);
    }
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, static_cast<png_uint_32>(r.width()),
                 static_cast<png_uint_32>(r.height()), 8,
                 r.bands() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < r.height(); ++y) {
        png_write_row(ctx.png, const_cast<png_bytep>(r.row_ptr(y)));
    }
    png_write_end(ctx.png, nullptr);
}

namespace {

// ---------------------------------------------------------------------------
// PGM (binary P5)
// ---------------------------------------------------------------------------

GeoRaster read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw DataError("PGM format error in " + path + ": not binary P5");
    auto next_int = [&in, &path]() {
        // skip whitespace and '#' comments
        int c;
        while ((c = in.peek()) != EOF) {
            if (c == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(c)) {
                in.get();
            } else {
                break;
            }
        }
        long v = -1;
        in >> v;
        if (!in || v < 0) throw DataError("PGM format error in " + path + ": bad header value");
        return v;
    };
    const long width = next_int();
    const long height = next_int();
    const long maxval = next_int();
    if (maxval < 1 || maxval > 255) {
        throw DataError("PGM format error in " + path + ": unsupported maxval " +
                        std::to_string(maxval) + " (only 8-bit)");
    }
    in.get();  // single whitespace after maxval
    GeoRaster out(static_cast<int>(width), static_cast<int>(height), 1, GeoTransform{});
    in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.sample_count()));
    if (!in) throw DataError("PGM format error in " + path + ": truncated pixel data");

    const std::string sc = sidecar_path(path);
    if (!std::filesystem::exists(sc)) {
        throw DataError("georeferencing error: " + path + " requires a sidecar " + sc);
    }
    out.transform() = read_sidecar(sc);
    return out;
}

void write_pgm(const GeoRaster& r, const std::string& path) {
    if (r.bands() != 1) throw DataError("PGM supports 1 band only: " + path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "P5\n" << r.width() << " " << r.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.data()),
              static_cast<std::streamsize>(r.sample_count()));
    if (!out) throw DataError("I/O failure writing " + path);
}

}  // namespace

std::string sidecar_path(const std::string& image_path) {
    std::filesystem::path p(image_path);
    p.replace_extension();
    return p.string() + ".geo.json";
}

GeoTransform read_sidecar(const std::string& sidecar) {
    std::ifstream in(sidecar);
    if (!in) throw DataError("cannot open sidecar: " + sidecar);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("sidecar " + sidecar + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw DataError("sidecar " + sidecar + " must be a JSON object");
    static const char* known[] = {"origin_x", "origin_y", "pixel_size_x", "pixel_size_y",
                                  "crs_label"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known)) {
            throw DataError("sidecar " + sidecar + ": unknown key \"" + it.key() + "\"");
        }
    }
    GeoTransform t;
    try {
        t.origin_x = j.at("origin_x").get<double>();
        t.origin_y = j.at("origin_y").get<double>();
        t.pixel_size_x = j.at("pixel_size_x").get<double>();
        t.pixel_size_y = j.at("pixel_size_y").get<double>();
        t.crs_label = j.value("crs_label", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw DataError("sidecar " + sidecar + ": " + e.what());
    }
    t.validate();
    return t;
}

void write_sidecar(const GeoTransform& t, const std::string& sidecar) {
    nlohmann::json j{{"origin_x", t.origin_x},
                     {"origin_y", t.origin_y},
                     {"pixel_size_x", t.pixel_size_x},
                     {"pixel_size_y", t.pixel_size_y},
                     {"crs_label", t.crs_label}};
    std::ofstream out(sidecar);
    if (!out) throw DataError("cannot open for writing: " + sidecar);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("I/O failure writing " + sidecar);
}

GeoRaster read_raster(const std::string& path) {
    if (!std::filesystem::exists(path)) throw DataError("file does not exist: " + path);
    const std::string ext = lower_ext(path);
    if (ext == ".tif" || ext == ".tiff") return read_geotiff(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm") return read_pgm(path);
    throw DataError("unsupported raster extension \"" + ext + "\": " + path);
}

void write_raster(const GeoRaster& r, const std::string& path, const RasterWriteOptions& opts) {
    const std::string ext = lower_ext(path);
    if (ext == ".tif" || ext == ".tiff") {
        write_geotiff(r, path, opts);
        return;
    }
    if (ext == ".png") {
        write_png_image(r, path);
        write_sidecar(r.transform(), sidecar_path(path));
        return;
    }
    if (ext == ".pgm") {
        write_pgm(r, path);
        write_sidecar(r.transform(), sidecar_path(path));
        return;
    }
    throw DataError("unsupported raster extension \"" + ext + "\": " + path);
}

}  // namespace rowpip
