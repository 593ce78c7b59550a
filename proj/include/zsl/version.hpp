#pragma once

namespace zsl {

inline const char* kToolVersion = "0.1.0";

}  // namespace zsl
