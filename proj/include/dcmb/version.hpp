#pragma once

namespace dcmb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dcmb
