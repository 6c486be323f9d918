#pragma once

namespace infoflow {

inline constexpr const char* kToolName = "infoflow";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace infoflow
