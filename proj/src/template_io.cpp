#include "pmiris/template_io.hpp"

#include "pmiris/error.hpp"

namespace pmiris {

namespace {

constexpr std::size_t kHeaderSize = 4 + 1 + 1 + 2 + 2 + 1 + 8;

std::size_t plane_bytes(int rows, int cols) { return (static_cast<std::size_t>(rows) * cols + 7) / 8; }

void pack(const Bitmap& b, std::vector<std::uint8_t>& out) {
    const auto start = out.size();
    out.resize(start + plane_bytes(b.rows(), b.cols()), 0);
    const auto bits = b.data();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out[start + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    }
}

Bitmap unpack(std::span<const std::uint8_t> src, int rows, int cols) {
    Bitmap b(rows, cols);
    auto bits = b.data();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (src[i / 8] >> (7 - i % 8)) & 1u;
    return b;
}

}  // namespace

std::vector<std::uint8_t> serialize_template(const IrisTemplate& t) {
    t.validate();
    if (t.rows > 0xFFFF || t.cols > 0xFFFF || t.bitplanes.size() > 0xFF) {
        throw Error(ErrorCode::InvalidArgument, "template too large for the binary format");
    }
    std::vector<std::uint8_t> out{'P', 'M', 'I', 'T', kTemplateFormatVersion, static_cast<std::uint8_t>(t.encoder_id)};
    out.push_back(static_cast<std::uint8_t>(t.rows >> 8));
    out.push_back(static_cast<std::uint8_t>(t.rows & 0xFF));
    out.push_back(static_cast<std::uint8_t>(t.cols >> 8));
    out.push_back(static_cast<std::uint8_t>(t.cols & 0xFF));
    out.push_back(static_cast<std::uint8_t>(t.bitplanes.size()));
    for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(t.params_digest >> shift));
    out.reserve(kHeaderSize + (t.bitplanes.size() + 1) * plane_bytes(t.rows, t.cols));
    for (const auto& p : t.bitplanes) pack(p, out);
    pack(t.mask, out);
    return out;
}

IrisTemplate deserialize_template(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) throw Error(ErrorCode::LengthMismatch, "stream shorter than magic");
    if (bytes[0] != 'P' || bytes[1] != 'M' || bytes[2] != 'I' || bytes[3] != 'T') {
        throw Error(ErrorCode::BadMagic, "expected PMIT");
    }
    if (bytes.size() < kHeaderSize) throw Error(ErrorCode::LengthMismatch, "truncated header");
    if (bytes[4] != kTemplateFormatVersion) {
        throw Error(ErrorCode::VersionUnsupported, "version " + std::to_string(bytes[4]));
    }
    IrisTemplate t;
    const auto enc = bytes[5];
    if (enc < 1 || enc > 3) throw Error(ErrorCode::InvalidArgument, "unknown encoder id " + std::to_string(enc));
    t.encoder_id = static_cast<EncoderId>(enc);
    t.rows = (bytes[6] << 8) | bytes[7];
    t.cols = (bytes[8] << 8) | bytes[9];
    const int planes = bytes[10];
    for (int i = 0; i < 8; ++i) t.params_digest = (t.params_digest << 8) | bytes[11 + static_cast<std::size_t>(i)];
    if (planes == 0 || t.rows == 0 || t.cols == 0) throw Error(ErrorCode::InvalidArgument, "empty template");
    const auto pb = plane_bytes(t.rows, t.cols);
    if (bytes.size() != kHeaderSize + pb * static_cast<std::size_t>(planes + 1)) {
        throw Error(ErrorCode::LengthMismatch, "payload size does not match header");
    }
    auto body = bytes.subspan(kHeaderSize);
    for (int p = 0; p < planes; ++p) t.bitplanes.push_back(unpack(body.subspan(pb * p, pb), t.rows, t.cols));
    t.mask = unpack(body.subspan(pb * static_cast<std::size_t>(planes), pb), t.rows, t.cols);
    return t;
}

void save_template(const std::filesystem::path& path, const IrisTemplate& t) {
    write_file_bytes(path, serialize_template(t));
}

IrisTemplate load_template(const std::filesystem::path& path) { return deserialize_template(read_file_bytes(path)); }

}  // namespace pmiris
