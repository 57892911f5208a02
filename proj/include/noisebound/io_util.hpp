#pragma once

#include <string>

namespace noisebound {

// Writes content to path via a temp file and rename, so readers never see a
// partial file.
void atomic_write(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace noisebound
