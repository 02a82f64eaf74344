#include "pmiris/image.hpp"

#include "pmiris/error.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <numeric>

namespace pmiris {

std::size_t Bitmap::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

IrisImage::IrisImage(std::string id, int width, int height, std::vector<std::uint8_t> pixels,
                     SourceChannel channel)
    : id_(std::move(id)), width_(width), height_(height), pixels_(std::move(pixels)), channel_(channel) {
    if (width < kMinImageSide || height < kMinImageSide) {
        throw Error(ErrorCode::DimensionTooSmall,
                    std::to_string(width) + "x" + std::to_string(height) + " is below 64x64");
    }
    if (pixels_.size() != static_cast<std::size_t>(width) * height) {
        throw Error(ErrorCode::InvalidArgument, "pixel count does not match width*height");
    }
}

namespace {

bool is_png(std::span<const std::uint8_t> b) {
    static constexpr std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    return b.size() >= 8 && std::equal(sig, sig + 8, b.begin());
}

bool is_pgm(std::span<const std::uint8_t> b) { return b.size() >= 2 && b[0] == 'P' && b[1] == '5'; }

// Reads one whitespace-delimited header token, skipping '#' comments.
bool next_token(std::span<const std::uint8_t> b, std::size_t& pos, long& value) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) return false;
    value = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
        value = value * 10 + (b[pos] - '0');
        if (value > 1'000'000) return false;
        ++pos;
    }
    return true;
}

IrisImage decode_pgm(std::span<const std::uint8_t> b, std::string id) {
    std::size_t pos = 2;
    long w = 0, h = 0, maxval = 0;
    if (!next_token(b, pos, w) || !next_token(b, pos, h) || !next_token(b, pos, maxval)) {
        throw Error(ErrorCode::CorruptFile, "malformed PGM header");
    }
    if (pos >= b.size() || !std::isspace(b[pos])) throw Error(ErrorCode::CorruptFile, "malformed PGM header");
    ++pos;
    if (maxval <= 0 || maxval > 255) throw Error(ErrorCode::UnsupportedFormat, "only 8-bit PGM is supported");
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (b.size() - pos < n) throw Error(ErrorCode::CorruptFile, "PGM pixel data truncated");
    std::vector<std::uint8_t> px(b.begin() + static_cast<std::ptrdiff_t>(pos),
                                 b.begin() + static_cast<std::ptrdiff_t>(pos + n));
    if (maxval != 255) {
        for (auto& p : px) p = static_cast<std::uint8_t>(std::min<long>(255, (p * 255L + maxval / 2) / maxval));
    }
    return IrisImage(std::move(id), static_cast<int>(w), static_cast<int>(h), std::move(px));
}

IrisImage decode_png(std::span<const std::uint8_t> b, SourceChannel channel, std::string id) {
    cv::Mat buf(1, static_cast<int>(b.size()), CV_8UC1, const_cast<std::uint8_t*>(b.data()));
    cv::Mat img;
    try {
        img = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    } catch (const cv::Exception&) {
        img.release();
    }
    if (img.empty()) throw Error(ErrorCode::CorruptFile, "PNG could not be decoded");
    if (img.depth() != CV_8U) throw Error(ErrorCode::UnsupportedFormat, "only 8-bit PNG is supported");
    if (img.cols < kMinImageSide || img.rows < kMinImageSide) {
        throw Error(ErrorCode::DimensionTooSmall,
                    std::to_string(img.cols) + "x" + std::to_string(img.rows) + " is below 64x64");
    }
    cv::Mat gray;
    if (img.channels() == 1) {
        gray = img;
    } else if (img.channels() == 3 || img.channels() == 4) {
        if (channel != SourceChannel::rgb_red) {
            throw Error(ErrorCode::UnsupportedFormat, "colour PNG requires channel=rgb_red");
        }
        cv::extractChannel(img, gray, 2);  // OpenCV stores BGR(A)
    } else {
        throw Error(ErrorCode::UnsupportedFormat, "unsupported PNG channel count");
    }
    std::vector<std::uint8_t> px(static_cast<std::size_t>(gray.rows) * gray.cols);
    for (int y = 0; y < gray.rows; ++y) {
        std::copy_n(gray.ptr<std::uint8_t>(y), gray.cols, px.begin() + static_cast<std::ptrdiff_t>(y) * gray.cols);
    }
    return IrisImage(std::move(id), gray.cols, gray.rows, std::move(px),
                     img.channels() == 1 ? SourceChannel::nir : SourceChannel::rgb_red);
}

std::vector<std::uint8_t> encode_with(const cv::Mat& m) {
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", m, out)) throw Error(ErrorCode::Io, "PNG encoding failed");
    return out;
}

}  // namespace

IrisImage decode_image(std::span<const std::uint8_t> bytes, SourceChannel channel, std::string id) {
    if (is_pgm(bytes)) return decode_pgm(bytes, std::move(id));
    if (is_png(bytes)) return decode_png(bytes, channel, std::move(id));
    throw Error(ErrorCode::UnsupportedFormat, "expected PGM (P5) or PNG");
}

IrisImage load_image(const std::filesystem::path& path, SourceChannel channel) {
    return decode_image(read_file_bytes(path), channel, path.stem().string());
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

std::vector<std::uint8_t> encode_pgm(int width, int height, std::span<const std::uint8_t> gray) {
    const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), gray.begin(), gray.end());
    return out;
}

std::vector<std::uint8_t> encode_pbm(const Bitmap& bits) {
    const std::string header = "P4\n" + std::to_string(bits.cols()) + " " + std::to_string(bits.rows()) + "\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const int row_bytes = (bits.cols() + 7) / 8;
    for (int r = 0; r < bits.rows(); ++r) {
        std::vector<std::uint8_t> row(static_cast<std::size_t>(row_bytes), 0);
        for (int c = 0; c < bits.cols(); ++c) {
            // PBM: 1 = black. Usable (1) is written white so the dump reads like a mask.
            if (!bits.at(r, c)) row[static_cast<std::size_t>(c / 8)] |= static_cast<std::uint8_t>(0x80 >> (c % 8));
        }
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

std::vector<std::uint8_t> encode_png_gray(int width, int height, std::span<const std::uint8_t> gray) {
    cv::Mat m(height, width, CV_8UC1, const_cast<std::uint8_t*>(gray.data()));
    return encode_with(m);
}

std::vector<std::uint8_t> encode_png_rgb(int width, int height, std::span<const std::uint8_t> rgb) {
    cv::Mat bgr(height, width, CV_8UC3);
    for (int y = 0; y < height; ++y) {
        auto* dst = bgr.ptr<std::uint8_t>(y);
        const auto* src = rgb.data() + static_cast<std::size_t>(y) * width * 3;
        for (int x = 0; x < width; ++x) {
            dst[3 * x + 0] = src[3 * x + 2];
            dst[3 * x + 1] = src[3 * x + 1];
            dst[3 * x + 2] = src[3 * x + 0];
        }
    }
    return encode_with(bgr);
}

void save_pgm(const std::filesystem::path& path, const IrisImage& img) {
    write_file_bytes(path, encode_pgm(img.width(), img.height(), img.pixels()));
}

SourceChannel parse_source_channel(const std::string& text) {
    if (text == "nir") return SourceChannel::nir;
    if (text == "rgb_red" || text == "red") return SourceChannel::rgb_red;
    throw Error(ErrorCode::InvalidArgument, "unknown channel '" + text + "'");
}

}  // namespace pmiris
