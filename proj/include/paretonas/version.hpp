#pragma once

namespace paretonas {
inline constexpr const char* kVersion = "1.0.0";
}
