#pragma once

namespace sandfire {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace sandfire
