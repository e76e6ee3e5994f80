#pragma once

namespace carmacds {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace carmacds
