#pragma once

namespace slsp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slsp
