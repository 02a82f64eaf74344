#pragma once

namespace pmiris {
inline constexpr const char* kVersion = "0.1.0";
}
