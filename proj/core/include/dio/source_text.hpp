#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dio {

// Text-level views of guest-language (Python) program sources.

/// Removes `#` comments that are not inside string literals.
std::string strip_comments(std::string_view source);

/// Comments stripped, every whitespace run collapsed to one space, trimmed.
std::string normalize_source(std::string_view source);

/// sha256 of normalize_source(); the novelty key of a candidate.
std::string source_hash(std::string_view source);

/// Comments stripped, then maximal runs of [A-Za-z0-9_] plus every other
/// non-whitespace character as a lexeme of its own.
std::vector<std::string> lexemes(std::string_view source);

/// All whitespace removed.
std::string remove_whitespace(std::string_view text);

}  // namespace dio
