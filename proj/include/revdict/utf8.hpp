// Strict UTF-8 decoding/encoding for the normalization pipeline.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace revdict {

class Utf8Error : public std::runtime_error {
public:
    Utf8Error(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what + " at byte offset " + std::to_string(byte_offset)),
          offset(byte_offset) {}
    std::size_t offset;
};

// Decodes a UTF-8 string into codepoints. Rejects truncated sequences,
// overlong encodings, surrogates, and values above U+10FFFF.
inline std::vector<char32_t> utf8_decode(const std::string& s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        const unsigned char b0 = static_cast<unsigned char>(s[i]);
        char32_t cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            throw Utf8Error("invalid UTF-8 lead byte", i);
        }
        if (i + len > n) throw Utf8Error("truncated UTF-8 sequence", i);
        for (std::size_t k = 1; k < len; ++k) {
            const unsigned char b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) throw Utf8Error("invalid UTF-8 continuation byte", i + k);
            cp = (cp << 6) | (b & 0x3F);
        }
        static constexpr char32_t kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len]) throw Utf8Error("overlong UTF-8 encoding", i);
        if (cp >= 0xD800 && cp <= 0xDFFF) throw Utf8Error("UTF-8 encoded surrogate", i);
        if (cp > 0x10FFFF) throw Utf8Error("codepoint out of range", i);
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
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

inline std::string utf8_encode(const std::vector<char32_t>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (char32_t cp : cps) utf8_append(out, cp);
    return out;
}

// Codepoint count ("characters" in the length rules of the pipeline).
inline std::size_t utf8_length(const std::string& s) { return utf8_decode(s).size(); }

}  // namespace revdict
