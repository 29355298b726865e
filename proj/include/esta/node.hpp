#pragma once

#include <compare>
#include <cstdint>
#include <functional>

namespace esta {

/// Dense index of a node inside a Tcg. Ordering by index is the tie-break
/// order used everywhere ("smaller node id").
struct NodeId {
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

}  // namespace esta

template <>
struct std::hash<esta::NodeId> {
    std::size_t operator()(esta::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
