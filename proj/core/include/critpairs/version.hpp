#pragma once

namespace critpairs {

inline constexpr const char* version_string = "critpairs 0.1.0";

}  // namespace critpairs
