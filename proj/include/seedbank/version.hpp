#pragma once

namespace seedbank {

inline constexpr const char* kVersion = "0.1.0";

} // namespace seedbank
