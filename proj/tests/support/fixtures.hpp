#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace sdi::testing {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(SDI_TEST_DATA_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Title of the single layer in the radar capabilities fixture.
inline constexpr const char* kRadarTitle = "NOAA Weather Radar Mosaic";

}  // namespace sdi::testing
