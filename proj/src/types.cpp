#include "pmiris/types.hpp"

#include "pmiris/error.hpp"
#include "pmiris/hash.hpp"

#include <cmath>
#include <cstdio>

namespace pmiris {

std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

void Segmentation::validate() const {
    if (!(pupil.r > 0) || !(pupil.r < iris.r)) {
        throw Error(ErrorCode::DegenerateGeometry, "require 0 < pupil.r < iris.r");
    }
    if (!iris.contains(pupil.cx, pupil.cy)) {
        throw Error(ErrorCode::DegenerateGeometry, "pupil centre lies outside the iris circle");
    }
}

std::string to_string(EncoderId id) {
    switch (id) {
        case EncoderId::gabor2d: return "gabor2d";
        case EncoderId::loggabor1d: return "loggabor1d";
        case EncoderId::bif: return "bif";
    }
    return "unknown";
}

EncoderId parse_encoder_id(const std::string& text) {
    if (text == "gabor2d") return EncoderId::gabor2d;
    if (text == "loggabor1d") return EncoderId::loggabor1d;
    if (text == "bif") return EncoderId::bif;
    throw Error(ErrorCode::InvalidArgument, "unknown encoder '" + text + "'");
}

void IrisTemplate::validate() const {
    if (bitplanes.empty()) throw Error(ErrorCode::InvalidArgument, "template has no bitplanes");
    if (rows <= 0 || cols <= 0) throw Error(ErrorCode::InvalidArgument, "template has empty dimensions");
    if (mask.rows() != rows || mask.cols() != cols) throw Error(ErrorCode::InvalidArgument, "mask dimensions differ");
    for (const auto& p : bitplanes) {
        if (p.rows() != rows || p.cols() != cols) throw Error(ErrorCode::InvalidArgument, "bitplane dimensions differ");
    }
}

}  // namespace pmiris
