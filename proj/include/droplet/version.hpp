#pragma once

namespace droplet {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace droplet
