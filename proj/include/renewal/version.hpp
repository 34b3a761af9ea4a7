#pragma once

namespace renewal {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace renewal
