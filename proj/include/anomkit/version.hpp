#pragma once

namespace anomkit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace anomkit
