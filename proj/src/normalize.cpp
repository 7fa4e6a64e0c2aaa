#include "slu/normalize.hpp"

#include <array>
#include <cctype>
#include <string>

namespace slu {

namespace {

constexpr std::array<const char*, 20> kOnes = {
    "zero",    "one",     "two",       "three",    "four",     "five",    "six",
    "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
    "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen"};
constexpr std::array<const char*, 10> kTens = {"",      "",      "twenty",  "thirty", "forty",
                                               "fifty", "sixty", "seventy", "eighty", "ninety"};

bool is_stripped(char c) {
  switch (c) {
    case '.': case ',': case '?': case '!': case ';': case ':': case '"': case '(': case ')':
      return true;
    default:
      return false;
  }
}

void append_words(std::vector<std::string>& out, const std::string& spelled) {
  std::size_t start = 0;
  while (start < spelled.size()) {
    auto end = spelled.find(' ', start);
    if (end == std::string::npos) end = spelled.size();
    out.push_back(spelled.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace

std::string number_to_words(int n) {
  std::string out;
  auto add = [&out](const std::string& w) {
    if (!out.empty()) out += ' ';
    out += w;
  };
  if (n == 0) return kOnes[0];
  if (n >= 1000) {
    add(std::string(kOnes[n / 1000]) + " thousand");
    n %= 1000;
  }
  if (n >= 100) {
    add(std::string(kOnes[n / 100]) + " hundred");
    n %= 100;
  }
  if (n >= 20) {
    add(kTens[n / 10]);
    n %= 10;
    if (n > 0) add(kOnes[n]);
  } else if (n > 0) {
    add(kOnes[n]);
  }
  return out;
}

std::vector<std::string> normalize_text(std::string_view raw) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    if (is_stripped(c)) {
      cleaned += ' ';
    } else {
      cleaned += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }

  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j == i) break;
    std::string token = cleaned.substr(i, j - i);
    i = j;

    bool all_digits = true;
    for (char c : token) all_digits = all_digits && std::isdigit(static_cast<unsigned char>(c));
    if (!all_digits) {
      out.push_back(std::move(token));
    } else if (token.size() > 4) {
      out.push_back(std::move(token));
    } else if (token.size() > 1 && token[0] == '0') {
      // Leading zeros ("007") are read digit by digit.
      for (char c : token) out.push_back(kOnes[c - '0']);
    } else {
      append_words(out, number_to_words(std::stoi(token)));
    }
  }
  return out;
}

}  // namespace slu
