#pragma once

#include <span>
#include <string>
#include <string_view>

#include "swarmfield/grid.hpp"

namespace swarmfield {

//! Lower-case hex SHA-256 (64 characters).
std::string sha256_hex(std::string_view bytes);

//! SHA-256 over the raw IEEE-754 bytes of the coordinates, in order.
std::string positions_digest(std::span<const Vec2> positions);

} // namespace swarmfield
