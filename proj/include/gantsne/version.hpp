#pragma once

namespace gantsne {

inline constexpr const char* kVersion = "0.1.0";

} // namespace gantsne
