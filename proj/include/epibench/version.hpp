#pragma once

namespace epibench {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace epibench
