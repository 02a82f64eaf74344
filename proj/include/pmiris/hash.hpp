#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace pmiris {

/// Incremental 64-bit FNV-1a. Used for template params digests and
/// content-addressed image ids; not a cryptographic hash.
class Fnv1a64 {
public:
    void update(std::span<const std::uint8_t> bytes) {
        for (auto b : bytes) {
            state_ ^= b;
            state_ *= kPrime;
        }
    }
    void update(std::string_view text) {
        update({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
    }
    std::uint64_t digest() const { return state_; }

private:
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

}  // namespace pmiris
