#include "sdi/text.hpp"

#include <algorithm>
#include <array>
#include <locale>
#include <stdexcept>

namespace sdi {

namespace {

constexpr auto kStopWords = [] {
    std::array words{
#include "stopwords.inc"
    };
    std::array<std::string_view, words.size()> sorted{};
    for (std::size_t i = 0; i < words.size(); ++i) sorted[i] = words[i];
    std::sort(sorted.begin(), sorted.end());
    return sorted;
}();

bool is_stop_word(std::string_view token) {
    return std::binary_search(kStopWords.begin(), kStopWords.end(), token);
}

const std::ctype<wchar_t>& wide_ctype() {
    static const std::locale locale = [] {
        for (const char* name : {"C.UTF-8", "C.utf8", "en_US.UTF-8"}) {
            try {
                return std::locale(name);
            } catch (const std::runtime_error&) {
            }
        }
        return std::locale::classic();
    }();
    return std::use_facet<std::ctype<wchar_t>>(locale);
}

// Decodes one code point; returns 0xFFFFFFFF and consumes one byte on error.
char32_t next_code_point(std::string_view s, std::size_t& i) {
    constexpr char32_t kInvalid = 0xFFFFFFFF;
    auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char lead = byte(i);
    std::size_t len = lead < 0x80 ? 1 : (lead >> 5) == 0x6 ? 2 : (lead >> 4) == 0xE ? 3
                                     : (lead >> 3) == 0x1E ? 4 : 0;
    if (len == 0 || i + len > s.size()) {
        ++i;
        return kInvalid;
    }
    char32_t cp = len == 1 ? lead : lead & (0x7F >> len);
    for (std::size_t k = 1; k < len; ++k) {
        unsigned char cont = byte(i + k);
        if ((cont & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    static constexpr char32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kInvalid;
    }
    i += len;
    return cp;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

void finish_token(std::string& token, std::size_t length, std::vector<std::string>& out) {
    if (length >= 2 && !is_stop_word(token)) {
        if (length >= 4 && token.back() == 's') token.pop_back();
        out.push_back(token);
    }
    token.clear();
}

}  // namespace

std::span<const std::string_view> stop_words() { return kStopWords; }

std::vector<std::string> tokenize(std::string_view text) {
    const auto& ctype = wide_ctype();
    std::vector<std::string> out;
    std::string token;
    std::size_t length = 0;
    for (std::size_t i = 0; i < text.size();) {
        char32_t cp = next_code_point(text, i);
        bool word = cp != 0xFFFFFFFF &&
                    ctype.is(std::ctype_base::alnum, static_cast<wchar_t>(cp));
        if (word) {
            append_utf8(token, static_cast<char32_t>(ctype.tolower(static_cast<wchar_t>(cp))));
            ++length;
        } else if (length > 0) {
            finish_token(token, length, out);
            length = 0;
        }
    }
    if (length > 0) finish_token(token, length, out);
    return out;
}

}  // namespace sdi
