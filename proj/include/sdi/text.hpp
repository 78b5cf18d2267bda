#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sdi {

/// Normalized search tokens, in text order, duplicates kept:
///  - UTF-8 decoded and lowercased per code point,
///  - split on anything that is not a letter or digit,
///  - tokens shorter than 2 code points dropped,
///  - stop words dropped (see stop_words()),
///  - one trailing 's' removed from tokens of 4 or more code points.
/// Invalid UTF-8 bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// The compiled-in stop list (data/stopwords.txt), sorted.
std::span<const std::string_view> stop_words();

}  // namespace sdi
