#pragma once

namespace glasscape {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace glasscape
