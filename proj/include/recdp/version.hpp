#pragma once

namespace recdp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace recdp
