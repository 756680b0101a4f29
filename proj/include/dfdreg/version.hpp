#pragma once

namespace dfdreg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dfdreg
