#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace wordeff {

/// 64-bit FNV-1a; stable across runs and platforms, used for cache keys
/// and provenance stamps (not for security).
class ContentHash {
public:
    ContentHash& add(std::string_view bytes) noexcept {
        for (unsigned char c : bytes) {
            state_ ^= c;
            state_ *= 0x100000001B3ULL;
        }
        return *this;
    }

    /// Adds a field followed by a separator so ("ab","c") != ("a","bc").
    ContentHash& field(std::string_view bytes) noexcept {
        add(bytes);
        return add(std::string_view("\x1f", 1));
    }

    std::uint64_t value() const noexcept { return state_; }

    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(state_));
        return buf;
    }

private:
    std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

inline std::string hash_hex(std::string_view bytes) {
    return ContentHash{}.add(bytes).hex();
}

}  // namespace wordeff
