#pragma once

namespace turnhold {

inline constexpr const char* kVersion = "0.1.0";

}
