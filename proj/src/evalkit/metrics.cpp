#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"

namespace seeds::evalkit {

namespace {

enum class CharClass { letter, digit, separator };

// Decodes one UTF-8 code point at text[i], advancing i. Malformed bytes
// decode to U+FFFD one byte at a time.
char32_t next_code_point(std::string_view text, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(text[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= text.size()) return -1;
    const auto b = static_cast<unsigned char>(text[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) len = 2, cp = b0 & 0x1F;
  else if ((b0 & 0xF0) == 0xE0) len = 3, cp = b0 & 0x0F;
  else if ((b0 & 0xF8) == 0xF0) len = 4, cp = b0 & 0x07;
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      len = 0;
      break;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  if (len == 0) {
    ++i;
    return 0xFFFD;
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp >= '0' && cp <= '9') return CharClass::digit;
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z')) return CharClass::letter;
    return CharClass::separator;
  }
  // Latin-1 punctuation and symbols, general punctuation through the misc
  // symbol and arrow blocks (bullets, dashes, quotes, angle brackets), CJK
  // punctuation, presentation forms, and the replacement character.
  if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return CharClass::separator;
  if (cp >= 0x2000 && cp <= 0x2BFF) return CharClass::separator;
  if (cp >= 0x3000 && cp <= 0x303F) return CharClass::separator;
  if (cp >= 0xFE10 && cp <= 0xFE6F) return CharClass::separator;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return CharClass::separator;
  if (cp == 0xFFFD) return CharClass::separator;
  return CharClass::letter;
}

// Lower-cased bullet with brackets, quotes and punctuation flattened to
// spaces and "image 2" joined to "image2".
std::string normalise(const std::string& bullet) {
  std::string out;
  std::size_t i = 0;
  while (i < bullet.size()) {
    const char32_t cp = next_code_point(bullet, i);
    if (cp < 0x80 && (std::isalnum(static_cast<int>(cp)) != 0)) out += static_cast<char>(std::tolower(static_cast<int>(cp)));
    else if (cp >= 0x80 && classify(cp) == CharClass::letter) out += '?';
    else out += ' ';
  }
  static const std::regex spaces(" +");
  static const std::regex image_n("\\bimage (\\d+)\\b");
  out = std::regex_replace(out, spaces, " ");
  out = std::regex_replace(out, image_n, "image$1");
  const auto first = out.find_first_not_of(' ');
  if (first == std::string::npos) return {};
  return out.substr(first, out.find_last_not_of(' ') - first + 1);
}

bool matches(const std::string& s, const std::regex& re) { return std::regex_search(s, re); }

}  // namespace

std::size_t count_words(std::string_view text) {
  // Bullet markers are removed first so "1." or "-" never count as words.
  std::size_t words = 0;
  for (const auto& line : bullets(text)) {
    CharClass prev = CharClass::separator;
    std::size_t i = 0;
    while (i < line.size()) {
      const CharClass c = classify(next_code_point(line, i));
      if (c != CharClass::separator && c != prev) ++words;
      prev = c;
    }
  }
  return words;
}

const char* to_string(Pattern p) {
  switch (p) {
    case Pattern::copy: return "copy";
    case Pattern::insertion: return "insertion";
    case Pattern::split: return "split";
    case Pattern::none: return "none";
  }
  return "none";
}

std::vector<std::string> bullets(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    // Strip leading whitespace and any run of bullet markers.
    static const std::regex marker("^(\\s|\\*|-|\\+|\xE2\x80\xA2|\xE2\x80\x93|\xE2\x80\x94|\\d+[.)]\\s)*");
    line = std::regex_replace(line, marker, "", std::regex_constants::format_first_only);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (!line.empty()) out.push_back(std::move(line));
    start = end + 1;
  }
  return out;
}

Pattern classify_pattern(std::string_view text) {
  std::vector<std::string> norm;
  for (const auto& b : bullets(text)) {
    auto n = normalise(b);
    if (!n.empty()) norm.push_back(std::move(n));
  }

  static const std::regex split_grid("\\bcopy (the )?(entire|whole) grid\\b");
  static const std::regex split_side("\\bside by side\\b|\\bnext to each other\\b");
  static const std::regex grid_word("\\bgrid\\b");
  static const std::regex image1("\\bimage1\\b");
  static const std::regex image2("\\bimage2\\b");
  for (const auto& b : norm) {
    if (matches(b, split_grid) || matches(b, split_side)) return Pattern::split;
    if (matches(b, grid_word) && matches(b, image1) && matches(b, image2)) return Pattern::split;
  }

  static const std::regex copy_only("^copy (the )?image\\d+$");
  if (norm.size() == 1 && matches(norm[0], copy_only)) return Pattern::copy;

  static const std::regex transform("\\b(appl(y|ies|ied|ying)|blend\\w*|textur\\w*|transform\\w*|merg\\w*)\\b");
  static const std::regex insert(
      "\\b(place|places|placing|insert|inserts|inserting|paste|pastes|pasting|put|puts|putting|extract|extracts|"
      "extracting|add|adds|adding)\\b.*\\bimage\\d+\\b.*\\b(into|onto|in|on)\\b.*\\bimage\\d+\\b");
  const bool transforms = std::any_of(norm.begin(), norm.end(), [](const std::string& b) { return matches(b, transform); });
  if (!transforms && std::any_of(norm.begin(), norm.end(), [](const std::string& b) { return matches(b, insert); }))
    return Pattern::insertion;
  return Pattern::none;
}

double harmonic_mean_score(double sim_a, double sim_b) {
  require(sim_a >= 0.0 && sim_b >= 0.0 && std::isfinite(sim_a) && std::isfinite(sim_b), ErrorCode::PreconditionViolated,
          "similarities must be finite and non-negative");
  if (sim_a == 0.0 || sim_b == 0.0) return 0.0;
  return 2.0 * sim_a * sim_b / (sim_a + sim_b);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

}  // namespace seeds::evalkit
