#pragma once

namespace triodflow {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace triodflow
