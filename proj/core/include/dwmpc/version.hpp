#pragma once

namespace dwmpc {

inline constexpr const char* kProjectVersion = "0.1.0";
inline constexpr const char* kRunLogFormat = "dwmpc-run-log v1";

}  // namespace dwmpc
