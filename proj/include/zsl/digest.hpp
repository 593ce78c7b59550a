#pragma once

#include <string>
#include <string_view>

namespace zsl {

// SHA-256 as lowercase hex.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::string& path);

}  // namespace zsl
