// Character- and token-level normalization of Persian text: Arabic-variant
// character mapping, non-Persian stripping, pseudo-space handling,
// whitespace tokenization and stopword removal. All functions are pure.
#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "revdict/utf8.hpp"

namespace revdict {

using TokenSequence = std::vector<std::string>;

constexpr char32_t kZwnj = 0x200C;  // zero-width non-joiner ("pseudo-space")

// Maps source codepoints to replacements (or deletion) and decides which
// codepoints survive at all. Structurally idempotent: no mapping target is
// itself a mapping source.
struct NormalizationTable {
    static constexpr char32_t kDelete = 0xFFFFFFFF;

    std::unordered_map<char32_t, char32_t> mappings;
    std::unordered_set<char32_t> keep;

    void add_mapping(char32_t src, char32_t dst) {
        if (!mappings.emplace(src, dst).second)
            throw std::invalid_argument("normalization table: duplicate source codepoint " +
                                        std::to_string(static_cast<std::uint32_t>(src)));
    }

    void add_keep(char32_t cp) { keep.insert(cp); }

    // Checks that the table is a function and that applying it twice equals
    // applying it once.
    void validate() const {
        for (const auto& [src, dst] : mappings) {
            if (dst == kDelete) continue;
            if (dst != src && mappings.count(dst))
                throw std::invalid_argument(
                    "normalization table not idempotent: target codepoint " +
                    std::to_string(static_cast<std::uint32_t>(dst)) + " is itself mapped");
        }
    }

    static NormalizationTable persian_default();
    static NormalizationTable load(const std::filesystem::path& path);
};

inline NormalizationTable NormalizationTable::persian_default() {
    NormalizationTable t;
    // Arabic letter variants -> Persian forms.
    t.add_mapping(0x064A, 0x06CC);  // ARABIC YEH -> FARSI YEH
    t.add_mapping(0x0649, 0x06CC);  // ALEF MAKSURA -> FARSI YEH
    t.add_mapping(0x0626, 0x06CC);  // YEH WITH HAMZA ABOVE -> FARSI YEH
    t.add_mapping(0x0643, 0x06A9);  // ARABIC KAF -> KEHEH
    t.add_mapping(0x0629, 0x0647);  // TEH MARBUTA -> HEH
    t.add_mapping(0x0623, 0x0627);  // ALEF WITH HAMZA ABOVE -> ALEF
    t.add_mapping(0x0625, 0x0627);  // ALEF WITH HAMZA BELOW -> ALEF
    t.add_mapping(0x0624, 0x0648);  // WAW WITH HAMZA ABOVE -> WAW
    t.add_mapping(0x0621, kDelete); // standalone HAMZA
    t.add_mapping(0x0640, kDelete); // TATWEEL
    t.add_mapping(0x0670, kDelete); // superscript ALEF
    for (char32_t cp = 0x064B; cp <= 0x0655; ++cp) t.add_mapping(cp, kDelete);  // diacritics
    for (char32_t i = 0; i < 10; ++i) t.add_mapping(0x0660 + i, 0x06F0 + i);    // digits

    // Whitespace and the pseudo-space survive normalization.
    for (char32_t cp : {U'\t', U'\n', U'\v', U'\f', U'\r', U' ', kZwnj}) t.add_keep(cp);
    // The Persian alphabet.
    for (char32_t cp : {0x0622, 0x0627, 0x0628, 0x067E, 0x062A, 0x062B, 0x062C, 0x0686,
                        0x062D, 0x062E, 0x062F, 0x0630, 0x0631, 0x0632, 0x0698, 0x0633,
                        0x0634, 0x0635, 0x0636, 0x0637, 0x0638, 0x0639, 0x063A, 0x0641,
                        0x0642, 0x06A9, 0x06AF, 0x0644, 0x0645, 0x0646, 0x0648, 0x0647,
                        0x06CC})
        t.add_keep(cp);
    for (char32_t i = 0; i < 10; ++i) t.add_keep(0x06F0 + i);  // Persian digits
    t.validate();
    return t;
}

namespace detail {
inline char32_t parse_hex_cp(const std::string& field, const std::filesystem::path& path, std::size_t line_no) {
    char32_t cp = 0;
    if (field.empty() || field.size() > 8)
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad codepoint '" + field + "'");
    for (char c : field) {
        int digit;
        if (c >= '0' && c <= '9') digit = c - '0';
        else if (c >= 'a' && c <= 'f') digit = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F') digit = c - 'A' + 10;
        else
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad codepoint '" + field + "'");
        cp = cp * 16 + static_cast<char32_t>(digit);
    }
    return cp;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == '\t' || c == ' ') {
            if (!cur.empty()) fields.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) fields.push_back(std::move(cur));
    return fields;
}
}  // namespace detail

// File format, one directive per line (comments start with '#'):
//   SRC_HEX <TAB> DST_HEX      replace SRC with DST
//   SRC_HEX <TAB> DELETE       remove SRC
//   KEEP    <TAB> HEX[-HEX]    codepoint (range) that survives normalization
// A file without KEEP lines inherits the default Persian keep set.
inline NormalizationTable NormalizationTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open normalization table: " + path.string());
    NormalizationTable t;
    bool saw_keep = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_fields(line);
        if (fields.empty() || fields[0][0] == '#') continue;
        if (fields.size() != 2)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected two fields");
        if (fields[0] == "KEEP") {
            saw_keep = true;
            const auto dash = fields[1].find('-');
            if (dash == std::string::npos) {
                t.add_keep(detail::parse_hex_cp(fields[1], path, line_no));
            } else {
                const char32_t lo = detail::parse_hex_cp(fields[1].substr(0, dash), path, line_no);
                const char32_t hi = detail::parse_hex_cp(fields[1].substr(dash + 1), path, line_no);
                if (hi < lo)
                    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": empty KEEP range");
                for (char32_t cp = lo; cp <= hi; ++cp) t.add_keep(cp);
            }
        } else {
            const char32_t src = detail::parse_hex_cp(fields[0], path, line_no);
            const char32_t dst = fields[1] == "DELETE" ? kDelete : detail::parse_hex_cp(fields[1], path, line_no);
            t.add_mapping(src, dst);
        }
    }
    if (!saw_keep) t.keep = persian_default().keep;
    t.validate();
    return t;
}

// Applies the mapping, then drops every codepoint outside the keep set.
// Idempotent for any table that passes validate().
inline std::string normalize_text(const std::string& raw, const NormalizationTable& table) {
    const auto cps = utf8_decode(raw);
    std::string out;
    out.reserve(raw.size());
    for (char32_t cp : cps) {
        const auto it = table.mappings.find(cp);
        if (it != table.mappings.end()) {
            if (it->second == NormalizationTable::kDelete) continue;
            cp = it->second;
        }
        if (table.keep.count(cp)) utf8_append(out, cp);
    }
    return out;
}

// Replaces every zero-width non-joiner with a single ASCII space; all other
// bytes pass through untouched.
inline std::string replace_pseudo_spaces(const std::string& raw) {
    static const std::string zwnj = "\xE2\x80\x8C";
    std::string out;
    out.reserve(raw.size());
    std::size_t i = 0;
    while (i < raw.size()) {
        if (raw.compare(i, zwnj.size(), zwnj) == 0) {
            out.push_back(' ');
            i += zwnj.size();
        } else {
            out.push_back(raw[i]);
            ++i;
        }
    }
    return out;
}

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

// Splits on runs of whitespace; never emits empty tokens.
inline TokenSequence tokenize(const std::string& text) {
    TokenSequence tokens;
    std::string cur;
    for (char c : text) {
        if (is_ascii_space(c)) {
            if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

struct StopwordList {
    std::unordered_set<std::string> words;

    bool contains(const std::string& w) const { return words.count(w) != 0; }
    bool empty() const { return words.empty(); }

    // Loads one word per line; entries are normalized with the same table the
    // pipeline uses, so membership tests always compare normalized forms.
    static StopwordList load(const std::filesystem::path& path, const NormalizationTable& table) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open stopword file: " + path.string());
        StopwordList list;
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            for (auto& tok : tokenize(replace_pseudo_spaces(normalize_text(line, table))))
                list.words.insert(std::move(tok));
        }
        return list;
    }

    static StopwordList persian_default();
};

// Keeps surviving tokens in their original order.
inline TokenSequence remove_stopwords(const TokenSequence& seq, const StopwordList& stops) {
    TokenSequence out;
    out.reserve(seq.size());
    for (const auto& tok : seq)
        if (!stops.contains(tok)) out.push_back(tok);
    return out;
}

// Persian function words, already in normalized form (Persian yeh/keheh, no
// pseudo-spaces). The published list this stands in for is not available;
// treat it as a replaceable default, not ground truth.
inline StopwordList StopwordList::persian_default() {
    static const char* const kWords[] = {
        "از", "به", "با", "در", "که", "را", "و", "یا", "هم", "برای",
        "تا", "بر", "بی", "مگر", "اگر", "اما", "ولی", "پس", "چون", "چرا",
        "چه", "چی", "کجا", "کی", "چگونه", "هر", "همه", "هیچ", "چند", "چندین",
        "بعضی", "برخی", "دیگر", "دیگری", "همین", "همان", "این", "آن", "اینها", "آنها",
        "او", "وی", "ما", "شما", "ایشان", "من", "تو", "خود", "خویش", "خویشتن",
        "است", "هست", "نیست", "بود", "نبود", "باشد", "نباشد", "شد", "نشد", "شده",
        "نشده", "شود", "نشود", "کرد", "نکرد", "کرده", "نکرده", "کند", "نکند", "کنند",
        "کنید", "کنم", "کنی", "میکند", "نمیکند", "میشود", "نمیشود", "دارد", "ندارد", "داشت",
        "نداشت", "داشته", "دارند", "دارم", "داری", "داریم", "دارید", "خواهد", "نخواهد", "خواهند",
        "خواهم", "خواهی", "خواهیم", "خواهید", "باید", "نباید", "شاید", "البته", "یعنی", "مثلا",
        "مانند", "مثل", "همچون", "چنین", "چنان", "بسیار", "خیلی", "کم", "بیش", "بیشتر",
        "کمتر", "فقط", "تنها", "نیز", "حتی", "دوباره", "بار", "باره", "درباره", "بدون",
        "درون", "بیرون", "داخل", "خارج", "بالا", "پایین", "پیش", "پشت", "روی", "زیر",
        "میان", "بین", "کنار", "نزد", "نزدیک", "دور", "سوی", "سمت", "طرف", "ضمن",
        "طبق", "بنابراین", "زیرا", "هرچه", "آنچه", "اینکه", "آنکه", "وقتی", "هنگام", "هنگامی",
        "زمانی", "اکنون", "حالا", "سپس", "آنگاه", "هنوز", "قبل", "بعد", "اول", "آخر",
        "آری", "بله", "نه", "خیر", "ای", "ها", "های", "هایی", "تر", "ترین",
        "می", "نمی", "همچنین", "همواره", "هرگز", "اغلب", "گاهی", "چیزی", "کسی", "جایی",
        "طوری", "اینجا", "آنجا", "بودن", "کردن", "شدن", "داد", "داده", "دهد", "دهند",
        "گفت", "گفته", "توسط", "حدود", "براساس", "چنانچه", "اگرچه", "گرچه", "هرچند",
    };
    StopwordList list;
    for (const char* w : kWords) list.words.insert(w);
    return list;
}

}  // namespace revdict
