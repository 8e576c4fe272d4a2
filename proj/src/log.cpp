#include "swarmfield/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <memory>

namespace swarmfield {

spdlog::logger& log()
{
  static const std::shared_ptr<spdlog::logger> instance = [] {
    auto sink = std::make_shared<spdlog::sinks::stderr_color_sink_mt>();
    auto lg = std::make_shared<spdlog::logger>("swarmfield", sink);
    lg->set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("SWARMFIELD_LOG"))
      level = spdlog::level::from_str(env);
    lg->set_level(level);
    return lg;
  }();
  return *instance;
}

} // namespace swarmfield
