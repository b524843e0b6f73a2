#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "adafuse/error.hpp"

namespace adafuse {
namespace detail {

struct UpperMapEntry {
  std::uint32_t from;
  std::uint32_t to;
};

#include "adafuse/unicode_upper.inc"

}  // namespace detail

/// Decodes UTF-8 into codepoints. Returns false and sets `bad_offset` to the
/// byte index of the first invalid sequence. Overlong encodings, surrogates
/// and out-of-range values are rejected.
inline bool try_decode_utf8(std::string_view bytes, std::u32string& out,
                            std::size_t& bad_offset) {
  out.clear();
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    std::uint32_t cp = 0;
    std::size_t len = 0;
    std::uint32_t min_cp = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
      min_cp = 0;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
      min_cp = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
      min_cp = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
      min_cp = 0x10000;
    } else {
      bad_offset = i;
      return false;
    }
    if (i + len > bytes.size()) {
      bad_offset = i;
      return false;
    }
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) {
        bad_offset = i;
        return false;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      bad_offset = i;
      return false;
    }
    out.push_back(static_cast<char32_t>(cp));
    i += len;
  }
  return true;
}

/// Throwing variant of try_decode_utf8.
inline std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  std::size_t bad = 0;
  if (!try_decode_utf8(bytes, out, bad)) {
    throw InvalidArgument("invalid UTF-8 sequence at byte offset " + std::to_string(bad));
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  const std::uint32_t c = static_cast<std::uint32_t>(cp);
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

/// Uppercases one codepoint through the Unicode simple (1:1) case mapping.
/// Length-preserving by construction; mappings that expand (e.g. U+00DF) are
/// intentionally excluded so folded strings stay comparable per character.
inline char32_t to_upper(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') ? cp - 0x20 : cp;
  }
  const std::uint32_t key = static_cast<std::uint32_t>(cp);
  std::size_t lo = 0;
  std::size_t hi = sizeof(detail::kUpperMap) / sizeof(detail::kUpperMap[0]);
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::kUpperMap[mid].from < key) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo < sizeof(detail::kUpperMap) / sizeof(detail::kUpperMap[0]) &&
      detail::kUpperMap[lo].from == key) {
    return static_cast<char32_t>(detail::kUpperMap[lo].to);
  }
  return cp;
}

inline std::u32string to_upper(std::u32string_view cps) {
  std::u32string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) out.push_back(to_upper(cp));
  return out;
}

}  // namespace adafuse
