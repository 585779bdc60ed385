#pragma once

namespace dicewalk {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace dicewalk
