#pragma once

namespace heom {
inline constexpr const char* kVersion = "0.1.0";
}
