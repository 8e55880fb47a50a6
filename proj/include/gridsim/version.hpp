#pragma once

namespace gridsim {

inline constexpr const char* kToolName = "gridsim";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace gridsim
