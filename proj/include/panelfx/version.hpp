#pragma once

#include <string_view>

namespace panelfx {

#ifndef PANELFX_VERSION
#define PANELFX_VERSION "0.0.0"
#endif

inline constexpr std::string_view kVersion = PANELFX_VERSION;

}  // namespace panelfx
