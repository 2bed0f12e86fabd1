#pragma once

namespace curemix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace curemix
