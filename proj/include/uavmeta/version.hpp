#pragma once

namespace uavmeta {
inline constexpr const char* kVersion = "0.1.0";
}
