#pragma once

namespace sensi {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sensi
