#include "dio/source_text.hpp"

#include <cctype>

#include "dio/hashing.hpp"

namespace dio {

namespace {

bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string strip_comments(std::string_view source) {
  std::string out;
  out.reserve(source.size());
  char quote = 0;
  bool triple = false;
  for (std::size_t i = 0; i < source.size(); ++i) {
    char c = source[i];
    if (quote) {
      out.push_back(c);
      if (c == '\\' && i + 1 < source.size()) {
        out.push_back(source[++i]);
        continue;
      }
      if (c == quote) {
        if (!triple) {
          quote = 0;
        } else if (i + 2 < source.size() && source[i + 1] == quote && source[i + 2] == quote) {
          out.push_back(source[++i]);
          out.push_back(source[++i]);
          quote = 0;
          triple = false;
        }
      } else if (c == '\n' && !triple) {
        quote = 0;  // unterminated single-line string; resync at newline
      }
      continue;
    }
    if (c == '#') {
      while (i + 1 < source.size() && source[i + 1] != '\n') ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      triple = i + 2 < source.size() && source[i + 1] == c && source[i + 2] == c;
      out.push_back(c);
      if (triple) {
        out.push_back(source[++i]);
        out.push_back(source[++i]);
      }
      continue;
    }
    out.push_back(c);
  }
  return out;
}

std::string normalize_source(std::string_view source) {
  const auto stripped = strip_comments(source);
  std::string out;
  out.reserve(stripped.size());
  bool pending_space = false;
  for (char c : stripped) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string source_hash(std::string_view source) { return sha256_hex(normalize_source(source)); }

std::vector<std::string> lexemes(std::string_view source) {
  const auto stripped = strip_comments(source);
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < stripped.size()) {
    char c = stripped[i];
    if (is_space(c)) {
      ++i;
    } else if (is_ident(c)) {
      auto start = i;
      while (i < stripped.size() && is_ident(stripped[i])) ++i;
      out.emplace_back(stripped.substr(start, i - start));
    } else {
      out.emplace_back(1, c);
      ++i;
    }
  }
  return out;
}

std::string remove_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (!is_space(c)) out.push_back(c);
  }
  return out;
}

}  // namespace dio
