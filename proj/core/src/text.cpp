#include "concierge/text.hpp"

#include <algorithm>

namespace concierge::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Returns the decoded code point and advances pos; malformed input yields
// U+FFFD and consumes a single byte.
char32_t decode_one(std::string_view s, std::size_t& pos, bool& ok) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  ok = true;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    ok = false;
    ++pos;
    return kReplacement;
  }
  if (pos + len > s.size()) {
    ok = false;
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) {
      ok = false;
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ok = false;
    ++pos;
    return kReplacement;
  }
  pos += len;
  return cp;
}

bool is_punct(char32_t cp) noexcept {
  switch (cp) {
    case U'、': case U'。': case U'，': case U'．': case U'！': case U'？':
    case U'「': case U'」': case U'『': case U'』': case U'（': case U'）':
    case U'・': case U'：': case U'；': case U'…':
    case U',': case U'.': case U'!': case U'?': case U'(': case U')':
    case U':': case U';': case U'"': case U'\'':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::u32string decode(std::string_view utf8) {
  std::u32string out;
  out.reserve(utf8.size());
  std::size_t pos = 0;
  bool ok = true;
  while (pos < utf8.size()) out.push_back(decode_one(utf8, pos, ok));
  return out;
}

std::string encode(char32_t cp) {
  std::string out;
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
  return out;
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size() * 3);
  for (char32_t cp : cps) out += encode(cp);
  return out;
}

bool is_valid_utf8(std::string_view bytes) noexcept {
  std::size_t pos = 0;
  bool ok = true;
  while (pos < bytes.size()) {
    decode_one(bytes, pos, ok);
    if (!ok) return false;
  }
  return true;
}

bool is_space(char32_t cp) noexcept {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\v' || cp == U'\f' || cp == 0x3000;
}

std::string_view trim(std::string_view s) noexcept {
  auto ascii_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  };
  // U+3000 is E3 80 80 in UTF-8.
  auto starts_ideo = [](std::string_view v) {
    return v.size() >= 3 && v.substr(0, 3) == "\xE3\x80\x80";
  };
  auto ends_ideo = [](std::string_view v) {
    return v.size() >= 3 && v.substr(v.size() - 3) == "\xE3\x80\x80";
  };
  for (;;) {
    if (!s.empty() && ascii_space(s.front())) {
      s.remove_prefix(1);
    } else if (starts_ideo(s)) {
      s.remove_prefix(3);
    } else {
      break;
    }
  }
  for (;;) {
    if (!s.empty() && ascii_space(s.back())) {
      s.remove_suffix(1);
    } else if (ends_ideo(s)) {
      s.remove_suffix(3);
    } else {
      break;
    }
  }
  return s;
}

std::u32string_view trim(std::u32string_view s) noexcept {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::u32string normalize(std::u32string_view s) {
  s = trim(s);
  std::u32string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp >= 0xFF01 && cp <= 0xFF5E) cp = cp - 0xFF01 + 0x21;
    if (cp == 0x3000) cp = U' ';
    if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
    out.push_back(cp);
  }
  return out;
}

std::string normalize(std::string_view utf8) {
  return encode(normalize(decode(utf8)));
}

std::vector<std::string> split_list(std::string_view utf8) {
  std::vector<std::string> out;
  std::u32string current;
  auto flush = [&] {
    auto item = trim(std::u32string_view(current));
    if (!item.empty()) out.push_back(encode(item));
    current.clear();
  };
  for (char32_t cp : decode(utf8)) {
    if (cp == U',' || cp == U'、' || cp == U'，' || cp == U';') {
      flush();
    } else {
      current.push_back(cp);
    }
  }
  flush();
  return out;
}

std::vector<std::u32string> tokenize(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::u32string current;
  for (char32_t cp : s) {
    if (is_space(cp) || is_punct(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(cp);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::string_view> lines(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    auto line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = nl + 1;
  }
  return out;
}

}  // namespace concierge::text
