#pragma once

#include <string_view>

namespace rankfair {

inline constexpr std::string_view kToolName = "rankfair";
inline constexpr std::string_view kToolVersion = "0.1.0";

}  // namespace rankfair
