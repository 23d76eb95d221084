#pragma once

namespace podc {

inline constexpr const char* artifact_name = "podc";
inline constexpr const char* artifact_version = "0.1.0";

}  // namespace podc
