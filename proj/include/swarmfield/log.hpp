#pragma once

#include <spdlog/logger.h>

namespace swarmfield {

//! Shared stderr logger. Level comes from SWARMFIELD_LOG (trace, debug,
//! info, warn, error, off); the default is warn.
spdlog::logger& log();

} // namespace swarmfield
