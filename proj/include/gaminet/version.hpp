#pragma once

namespace gaminet {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace gaminet
