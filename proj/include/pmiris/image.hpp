#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pmiris {

enum class SourceChannel { nir, rgb_red };

/// Row-major bit raster stored one byte per cell (0 or 1).
class Bitmap {
public:
    Bitmap() = default;
    Bitmap(int rows, int cols, bool fill = false)
        : rows_(rows), cols_(cols), bits_(static_cast<std::size_t>(rows) * cols, fill ? 1 : 0) {}

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return bits_.empty(); }

    bool at(int r, int c) const { return bits_[static_cast<std::size_t>(r) * cols_ + c] != 0; }
    void set(int r, int c, bool v) { bits_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0; }

    std::span<const std::uint8_t> data() const { return bits_; }
    std::span<std::uint8_t> data() { return bits_; }

    std::size_t count() const;

    friend bool operator==(const Bitmap&, const Bitmap&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

inline constexpr int kMinImageSide = 64;
inline constexpr int kCanonicalWidth = 640;
inline constexpr int kCanonicalHeight = 480;

/// 8-bit grayscale raster, the unit of ingestion.
class IrisImage {
public:
    IrisImage() = default;
    /// Throws DimensionTooSmall below 64 px on either axis, InvalidArgument on size mismatch.
    IrisImage(std::string id, int width, int height, std::vector<std::uint8_t> pixels,
              SourceChannel channel = SourceChannel::nir);

    const std::string& id() const { return id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    SourceChannel source_channel() const { return channel_; }
    std::span<const std::uint8_t> pixels() const { return pixels_; }

    std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    /// True when the image is not 640x480; callers log this, it is never an error.
    bool non_canonical_size() const { return width_ != kCanonicalWidth || height_ != kCanonicalHeight; }

private:
    std::string id_;
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> pixels_;
    SourceChannel channel_ = SourceChannel::nir;
};

/// Decodes PGM (P5) or PNG (gray / RGB / RGBA). RGB input is reduced with the
/// red plane when channel == rgb_red; with nir an RGB file is rejected.
IrisImage decode_image(std::span<const std::uint8_t> bytes, SourceChannel channel, std::string id);
IrisImage load_image(const std::filesystem::path& path, SourceChannel channel = SourceChannel::nir);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_pgm(int width, int height, std::span<const std::uint8_t> gray);
std::vector<std::uint8_t> encode_pbm(const Bitmap& bits);
std::vector<std::uint8_t> encode_png_gray(int width, int height, std::span<const std::uint8_t> gray);
std::vector<std::uint8_t> encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb);
void save_pgm(const std::filesystem::path& path, const IrisImage& img);

SourceChannel parse_source_channel(const std::string& text);

}  // namespace pmiris
