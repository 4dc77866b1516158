#include "jaccard_oracle.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace oracle {

std::set<std::string> word_shingles(const std::string& text, std::size_t n) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) {
    // The synthetic corpora only capitalize ASCII letters.
    for (auto& ch : w) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    words.push_back(w);
  }
  std::set<std::string> out;
  if (words.empty()) return out;
  if (words.size() < n) n = words.size();
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    std::string s = words[i];
    for (std::size_t k = 1; k < n; ++k) s += " " + words[i + k];
    out.insert(s);
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& s : a) inter += b.count(s);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace oracle
