#pragma once

namespace kcx {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kToolName = "kcx";

}  // namespace kcx
