#pragma once

namespace radsentry {
inline constexpr const char* kVersion = "0.1.0";
}
