#pragma once

#include "pmiris/types.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pmiris {

inline constexpr std::uint8_t kTemplateFormatVersion = 1;

/// Binary layout: "PMIT", version u8, encoder_id u8, rows u16 BE, cols u16 BE,
/// bitplane_count u8, params_digest (8 bytes BE), then each bitplane and
/// finally the mask, each packed row-major MSB-first and padded to a byte.
std::vector<std::uint8_t> serialize_template(const IrisTemplate& t);
IrisTemplate deserialize_template(std::span<const std::uint8_t> bytes);

void save_template(const std::filesystem::path& path, const IrisTemplate& t);
IrisTemplate load_template(const std::filesystem::path& path);

}  // namespace pmiris
