#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace slu {

// Lowercases, strips . , ? ! ; : " ( ) and splits on whitespace. All-digit
// tokens up to 9999 are spelled out ("21" -> "twenty one"); larger numbers
// pass through unchanged.
std::vector<std::string> normalize_text(std::string_view raw);

// Spelled-out form of 0 <= n <= 9999, words separated by single spaces.
std::string number_to_words(int n);

}  // namespace slu
