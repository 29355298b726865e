#include "esta/time.hpp"

#include <fmt/format.h>

namespace esta {

std::string format_seconds(Micros t) {
    if (t.is_unreachable()) {
        return "inf";
    }
    const std::int64_t c = t.count();
    const std::int64_t mag = c < 0 ? -c : c;
    return fmt::format("{}{}.{:06d}", c < 0 ? "-" : "", mag / 1'000'000, mag % 1'000'000);
}

}  // namespace esta
