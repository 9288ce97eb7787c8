#pragma once

#include <string_view>

namespace longscribe {

inline constexpr std::string_view kToolName = "longscribe";
inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace longscribe
