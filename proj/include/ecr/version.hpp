#pragma once

namespace ecr {

inline constexpr const char* kEngineVersion = "0.1.0";

}  // namespace ecr
