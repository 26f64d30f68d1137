#pragma once

namespace unitchart {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace unitchart
