#pragma once

namespace cpr {

inline constexpr const char kVersion[] = "0.1.0";

}  // namespace cpr
