#pragma once

// Minimal UTF-8 and Latin-script Unicode helpers. Full Unicode tables are out
// of scope; coverage is ASCII + Latin-1 + Latin Extended-A plus the combining
// diacritics actually seen in European-language corpora.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace xgenre::uni {

using Codepoint = uint32_t;

constexpr Codepoint kReplacement = 0xFFFD;

// Decodes one UTF-8 sequence starting at s[i]; advances i. Invalid bytes decode
// to U+FFFD and consume one byte.
inline Codepoint decode_at(const std::string& s, std::size_t& i) {
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    unsigned char b0 = byte(i);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](std::size_t k) { return k < s.size() && (byte(k) & 0xC0) == 0x80; };
    if ((b0 & 0xE0) == 0xC0 && cont(i + 1)) {
        Codepoint cp = (Codepoint(b0 & 0x1F) << 6) | (byte(i + 1) & 0x3F);
        i += 2;
        return cp < 0x80 ? kReplacement : cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(i + 1) && cont(i + 2)) {
        Codepoint cp = (Codepoint(b0 & 0x0F) << 12) | (Codepoint(byte(i + 1) & 0x3F) << 6) |
                       (byte(i + 2) & 0x3F);
        i += 3;
        return cp < 0x800 ? kReplacement : cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
        Codepoint cp = (Codepoint(b0 & 0x07) << 18) | (Codepoint(byte(i + 1) & 0x3F) << 12) |
                       (Codepoint(byte(i + 2) & 0x3F) << 6) | (byte(i + 3) & 0x3F);
        i += 4;
        return (cp < 0x10000 || cp > 0x10FFFF) ? kReplacement : cp;
    }
    ++i;
    return kReplacement;
}

inline std::vector<Codepoint> decode(const std::string& s) {
    std::vector<Codepoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) out.push_back(decode_at(s, i));
    return out;
}

inline void encode_to(Codepoint cp, std::string& out) {
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

inline std::string encode(const std::vector<Codepoint>& cps) {
    std::string out;
    out.reserve(cps.size());
    for (Codepoint cp : cps) encode_to(cp, out);
    return out;
}

inline bool is_whitespace(Codepoint cp) {
    switch (cp) {
        case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D:
        case 0x20: case 0x85: case 0xA0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// Punctuation for token edge stripping. Underscore is a word character so that
// synthetic symbols like CL_7 stay whole.
inline bool is_punct(Codepoint cp) {
    if (cp < 0x80) {
        char c = static_cast<char>(cp);
        static const std::string ascii = "!\"#$%&'()*+,-./:;<=>?@[\\]^`{|}~";
        return ascii.find(c) != std::string::npos;
    }
    switch (cp) {
        case 0xA1: case 0xB7: case 0xAB: case 0xBB: case 0xBF:
        case 0x2013: case 0x2014: case 0x2018: case 0x2019: case 0x201A:
        case 0x201C: case 0x201D: case 0x201E: case 0x2022: case 0x2026:
        case 0x2039: case 0x203A:
            return true;
        default:
            return false;
    }
}

// Simplified lowercase: ASCII, Latin-1 and Latin Extended-A only.
inline Codepoint to_lower(Codepoint cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if ((cp >= 0xC0 && cp <= 0xD6) || (cp >= 0xD8 && cp <= 0xDE)) return cp + 0x20;
    if (cp == 0x178) return 0xFF;   // Y with diaeresis
    if (cp == 0x130) return 'i';    // dotted capital I
    if (cp >= 0x100 && cp <= 0x137 && cp % 2 == 0) return cp + 1;
    if (cp >= 0x139 && cp <= 0x148 && cp % 2 == 1) return cp + 1;
    if (cp >= 0x14A && cp <= 0x177 && cp % 2 == 0) return cp + 1;
    if (cp >= 0x179 && cp <= 0x17E && cp % 2 == 1) return cp + 1;
    return cp;
}

inline std::string lowercase(const std::string& s) {
    std::vector<Codepoint> cps = decode(s);
    for (Codepoint& cp : cps) cp = to_lower(cp);
    return encode(cps);
}

namespace detail {

struct Composition {
    Codepoint base;
    Codepoint mark;
    Codepoint composed;
};

// Canonical composition pairs for Latin scripts (subset of UnicodeData).
inline const std::array<Composition, 126>& composition_table() {
    static const std::array<Composition, 126> table = {{
        // grave U+0300
        {'A', 0x300, 0xC0}, {'E', 0x300, 0xC8}, {'I', 0x300, 0xCC}, {'O', 0x300, 0xD2},
        {'U', 0x300, 0xD9}, {'a', 0x300, 0xE0}, {'e', 0x300, 0xE8}, {'i', 0x300, 0xEC},
        {'o', 0x300, 0xF2}, {'u', 0x300, 0xF9},
        // acute U+0301
        {'A', 0x301, 0xC1}, {'E', 0x301, 0xC9}, {'I', 0x301, 0xCD}, {'O', 0x301, 0xD3},
        {'U', 0x301, 0xDA}, {'Y', 0x301, 0xDD}, {'a', 0x301, 0xE1}, {'e', 0x301, 0xE9},
        {'i', 0x301, 0xED}, {'o', 0x301, 0xF3}, {'u', 0x301, 0xFA}, {'y', 0x301, 0xFD},
        {'C', 0x301, 0x106}, {'c', 0x301, 0x107}, {'L', 0x301, 0x139}, {'l', 0x301, 0x13A},
        {'N', 0x301, 0x143}, {'n', 0x301, 0x144}, {'R', 0x301, 0x154}, {'r', 0x301, 0x155},
        {'S', 0x301, 0x15A}, {'s', 0x301, 0x15B}, {'Z', 0x301, 0x179}, {'z', 0x301, 0x17A},
        // circumflex U+0302
        {'A', 0x302, 0xC2}, {'E', 0x302, 0xCA}, {'I', 0x302, 0xCE}, {'O', 0x302, 0xD4},
        {'U', 0x302, 0xDB}, {'a', 0x302, 0xE2}, {'e', 0x302, 0xEA}, {'i', 0x302, 0xEE},
        {'o', 0x302, 0xF4}, {'u', 0x302, 0xFB}, {'C', 0x302, 0x108}, {'c', 0x302, 0x109},
        {'G', 0x302, 0x11C}, {'g', 0x302, 0x11D}, {'H', 0x302, 0x124}, {'h', 0x302, 0x125},
        {'J', 0x302, 0x134}, {'j', 0x302, 0x135}, {'S', 0x302, 0x15C}, {'s', 0x302, 0x15D},
        {'W', 0x302, 0x174}, {'w', 0x302, 0x175}, {'Y', 0x302, 0x176}, {'y', 0x302, 0x177},
        // tilde U+0303
        {'A', 0x303, 0xC3}, {'N', 0x303, 0xD1}, {'O', 0x303, 0xD5}, {'a', 0x303, 0xE3},
        {'n', 0x303, 0xF1}, {'o', 0x303, 0xF5}, {'I', 0x303, 0x128}, {'i', 0x303, 0x129},
        {'U', 0x303, 0x168}, {'u', 0x303, 0x169},
        // macron U+0304
        {'A', 0x304, 0x100}, {'a', 0x304, 0x101}, {'E', 0x304, 0x112}, {'e', 0x304, 0x113},
        {'I', 0x304, 0x12A}, {'i', 0x304, 0x12B}, {'O', 0x304, 0x14C}, {'o', 0x304, 0x14D},
        {'U', 0x304, 0x16A}, {'u', 0x304, 0x16B},
        // breve U+0306
        {'A', 0x306, 0x102}, {'a', 0x306, 0x103}, {'G', 0x306, 0x11E}, {'g', 0x306, 0x11F},
        {'U', 0x306, 0x16C}, {'u', 0x306, 0x16D},
        // diaeresis U+0308
        {'A', 0x308, 0xC4}, {'E', 0x308, 0xCB}, {'I', 0x308, 0xCF}, {'O', 0x308, 0xD6},
        {'U', 0x308, 0xDC}, {'a', 0x308, 0xE4}, {'e', 0x308, 0xEB}, {'i', 0x308, 0xEF},
        {'o', 0x308, 0xF6}, {'u', 0x308, 0xFC}, {'y', 0x308, 0xFF}, {'Y', 0x308, 0x178},
        // ring above U+030A
        {'A', 0x30A, 0xC5}, {'a', 0x30A, 0xE5}, {'U', 0x30A, 0x16E}, {'u', 0x30A, 0x16F},
        // caron U+030C
        {'C', 0x30C, 0x10C}, {'c', 0x30C, 0x10D}, {'D', 0x30C, 0x10E}, {'d', 0x30C, 0x10F},
        {'E', 0x30C, 0x11A}, {'e', 0x30C, 0x11B}, {'N', 0x30C, 0x147}, {'n', 0x30C, 0x148},
        {'R', 0x30C, 0x158}, {'r', 0x30C, 0x159}, {'S', 0x30C, 0x160}, {'s', 0x30C, 0x161},
        {'T', 0x30C, 0x164}, {'t', 0x30C, 0x165}, {'Z', 0x30C, 0x17D}, {'z', 0x30C, 0x17E},
        // cedilla U+0327
        {'C', 0x327, 0xC7}, {'c', 0x327, 0xE7}, {'S', 0x327, 0x15E}, {'s', 0x327, 0x15F},
        {'T', 0x327, 0x162}, {'t', 0x327, 0x163},
        // ogonek U+0328
        {'A', 0x328, 0x104}, {'a', 0x328, 0x105}, {'E', 0x328, 0x118}, {'e', 0x328, 0x119},
    }};
    return table;
}

inline int combining_class(Codepoint cp) {
    if (cp == 0x327 || cp == 0x328) return 202;           // attached below
    if (cp >= 0x300 && cp <= 0x314) return 230;           // above
    if (cp >= 0x315 && cp <= 0x319) return 232;           // approximation
    if (cp >= 0x31A && cp <= 0x320) return 220;           // below
    if (cp >= 0x321 && cp <= 0x326) return 220;
    if (cp >= 0x329 && cp <= 0x333) return 220;
    if (cp >= 0x334 && cp <= 0x338) return 1;             // overlay
    if (cp >= 0x339 && cp <= 0x344) return 220;
    if (cp >= 0x345 && cp <= 0x36F) return 230;
    return 0;
}

}  // namespace detail

// Composes base+combining-mark sequences into precomposed Latin characters.
// Marks without a composition pair are kept; combining marks are first put in
// canonical order so the result is stable under re-application.
inline std::vector<Codepoint> compose_nfc_latin(std::vector<Codepoint> cps) {
    using detail::combining_class;
    // Canonical reordering of adjacent combining marks (stable bubble pass).
    for (std::size_t i = 1; i < cps.size(); ++i) {
        int cc = combining_class(cps[i]);
        if (cc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            int prev = combining_class(cps[j - 1]);
            if (prev == 0 || prev <= cc) break;
            std::swap(cps[j - 1], cps[j]);
            --j;
        }
    }
    std::vector<Codepoint> out;
    out.reserve(cps.size());
    for (Codepoint cp : cps) {
        if (!out.empty() && combining_class(cp) != 0) {
            Codepoint base = out.back();
            bool composed = false;
            for (const auto& entry : detail::composition_table()) {
                if (entry.base == base && entry.mark == cp) {
                    out.back() = entry.composed;
                    composed = true;
                    break;
                }
            }
            if (composed) continue;
        }
        out.push_back(cp);
    }
    return out;
}

inline std::string nfc_latin(const std::string& s) { return encode(compose_nfc_latin(decode(s))); }

}  // namespace xgenre::uni
