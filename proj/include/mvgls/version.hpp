#pragma once

namespace mvgls {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mvgls
