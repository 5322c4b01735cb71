#include "trialage/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <json.hpp>

namespace trialage {

namespace {

constexpr char32_t kEnDash = U'–';
constexpr char32_t kEmDash = U'—';
constexpr char32_t kLessEq = U'≤';
constexpr char32_t kGreaterEq = U'≥';

struct Codepoint {
  char32_t value;
  std::size_t start;
  std::size_t size;
};

// Minimal UTF-8 decoder; malformed bytes are passed through one byte at a time.
std::vector<Codepoint> decode_utf8(std::string_view text) {
  std::vector<Codepoint> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    char32_t cp = c;
    if ((c & 0x80u) == 0) {
      len = 1;
    } else if ((c & 0xE0u) == 0xC0u) {
      len = 2;
      cp = c & 0x1Fu;
    } else if ((c & 0xF0u) == 0xE0u) {
      len = 3;
      cp = c & 0x0Fu;
    } else if ((c & 0xF8u) == 0xF0u) {
      len = 4;
      cp = c & 0x07u;
    }
    if (i + len > text.size()) len = 1, cp = c;
    bool valid = true;
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xC0u) != 0x80u) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (cc & 0x3Fu);
    }
    if (!valid) {
      cp = c;
      len = 1;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }
bool is_ascii_alpha(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}
bool is_dash_cp(char32_t cp) { return cp == U'-' || cp == kEnDash || cp == kEmDash; }
bool is_cmp_cp(char32_t cp) {
  return cp == U'<' || cp == U'>' || cp == U'=' || cp == kLessEq || cp == kGreaterEq;
}
bool is_space_cp(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == U'\f' ||
         cp == U'\v' || cp == U' ';
}
// Non-ASCII codepoints that are not dashes/comparisons/spaces join word runs.
bool is_word_cp(char32_t cp) {
  if (is_ascii_alpha(cp)) return true;
  return cp >= 0x80 && !is_dash_cp(cp) && !is_cmp_cp(cp) && !is_space_cp(cp);
}

std::optional<std::int64_t> parse_digits(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    if (value > (INT64_MAX - (c - '0')) / 10) return std::nullopt;  // overflow
    value = value * 10 + (c - '0');
  }
  return value;
}

Token make_token(std::string_view text, std::size_t start, std::size_t end) {
  Token tok;
  tok.text = std::string(text.substr(start, end - start));
  tok.start = start;
  tok.end = end;
  tok.numeric_value = parse_digits(tok.text);
  tok.shape = classify_shape(tok.text);
  return tok;
}

}  // namespace

std::string_view section_name(SectionKind kind) {
  switch (kind) {
    case SectionKind::Abstract: return "abstract";
    case SectionKind::Introduction: return "introduction";
    case SectionKind::Method: return "method";
    case SectionKind::Result: return "result";
    case SectionKind::Discussion: return "discussion";
    case SectionKind::Other: return "other";
  }
  return "other";
}

std::optional<SectionKind> section_from_name(std::string_view name) {
  if (name == "abstract") return SectionKind::Abstract;
  if (name == "introduction") return SectionKind::Introduction;
  if (name == "method") return SectionKind::Method;
  if (name == "result") return SectionKind::Result;
  if (name == "discussion") return SectionKind::Discussion;
  if (name == "other") return SectionKind::Other;
  return std::nullopt;
}

std::string_view shape_name(TokenShape shape) {
  switch (shape) {
    case TokenShape::AllDigits: return "AllDigits";
    case TokenShape::ContainsDigit: return "ContainsDigit";
    case TokenShape::Capitalized: return "Capitalized";
    case TokenShape::AllCaps: return "AllCaps";
    case TokenShape::Lower: return "Lower";
    case TokenShape::Punct: return "Punct";
    case TokenShape::Symbol: return "Symbol";
  }
  return "Punct";
}

std::vector<const Sentence*> Document::sentences() const {
  std::vector<const Sentence*> out;
  for (const Section& sec : sections)
    for (const Paragraph& para : sec.paragraphs)
      for (const Sentence& s : para) out.push_back(&s);
  return out;
}

TokenShape classify_shape(std::string_view text) {
  auto cps = decode_utf8(text);
  if (cps.empty()) return TokenShape::Punct;
  bool all_digit = true, any_digit = false, any_alpha = false;
  bool all_alpha_upper = true, all_lower = true, all_cmp = true;
  for (const Codepoint& cp : cps) {
    if (is_ascii_digit(cp.value))
      any_digit = true;
    else
      all_digit = false;
    if (!is_cmp_cp(cp.value)) all_cmp = false;
    if (is_ascii_alpha(cp.value)) {
      any_alpha = true;
      if (std::islower(static_cast<int>(cp.value))) all_alpha_upper = false;
      if (std::isupper(static_cast<int>(cp.value))) all_lower = false;
    } else if (cp.value >= 0x80 && is_word_cp(cp.value)) {
      any_alpha = true;  // treat non-ascii word chars as lowercase letters
      all_alpha_upper = false;
    }
  }
  if (all_digit) return TokenShape::AllDigits;
  if (any_digit) return TokenShape::ContainsDigit;
  if (all_cmp) return TokenShape::Symbol;
  if (!any_alpha) return TokenShape::Punct;
  if (all_alpha_upper) return TokenShape::AllCaps;
  char32_t first = cps.front().value;
  if (is_ascii_alpha(first) && std::isupper(static_cast<int>(first)))
    return TokenShape::Capitalized;
  if (all_lower) return TokenShape::Lower;
  return TokenShape::Lower;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  auto cps = decode_utf8(text);
  std::size_t i = 0;
  const std::size_t n = cps.size();
  auto byte_end = [&](std::size_t idx) { return cps[idx].start + cps[idx].size; };
  while (i < n) {
    char32_t cp = cps[i].value;
    if (is_space_cp(cp)) {
      ++i;
      continue;
    }
    std::size_t start = cps[i].start;
    if (is_ascii_digit(cp)) {
      std::size_t j = i;
      while (j < n && is_ascii_digit(cps[j].value)) ++j;
      tokens.push_back(make_token(text, start, byte_end(j - 1)));
      i = j;
    } else if (is_word_cp(cp)) {
      std::size_t j = i;
      while (j < n && is_word_cp(cps[j].value)) ++j;
      tokens.push_back(make_token(text, start, byte_end(j - 1)));
      i = j;
    } else if ((cp == U'<' || cp == U'>') && i + 1 < n && cps[i + 1].value == U'=') {
      tokens.push_back(make_token(text, start, byte_end(i + 1)));
      i += 2;
    } else {
      // dash, single comparison symbol, or any other punctuation codepoint
      tokens.push_back(make_token(text, start, byte_end(i)));
      ++i;
    }
  }
  return tokens;
}

std::optional<std::int64_t> parse_integer_token(const Token& tok) {
  return parse_digits(tok.text);
}

namespace {

bool is_guarded_abbreviation(std::string_view text, std::size_t dot_pos) {
  static const std::array<std::string_view, 6> guards = {"e.g.", "i.e.", "vs.",
                                                         "et al.", "fig.", "figs."};
  std::string_view upto = text.substr(0, dot_pos + 1);
  auto lower_eq = [](std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::tolower(static_cast<unsigned char>(a[k])) !=
          std::tolower(static_cast<unsigned char>(b[k])))
        return false;
    return true;
  };
  for (std::string_view g : guards) {
    if (upto.size() < g.size()) continue;
    std::string_view tail = upto.substr(upto.size() - g.size());
    if (!lower_eq(tail, g)) continue;
    // guard must start at a word boundary
    std::size_t before = upto.size() - g.size();
    if (before == 0) return true;
    char prev = upto[before - 1];
    if (!std::isalnum(static_cast<unsigned char>(prev))) return true;
  }
  // single capital + period ("A.")
  if (dot_pos >= 1 && std::isupper(static_cast<unsigned char>(text[dot_pos - 1]))) {
    if (dot_pos == 1 ||
        !std::isalnum(static_cast<unsigned char>(text[dot_pos - 2])))
      return true;
  }
  return false;
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view paragraph) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < paragraph.size(); ++i) {
    char c = paragraph[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    std::size_t ws = 0;
    while (j < paragraph.size() &&
           std::isspace(static_cast<unsigned char>(paragraph[j]))) {
      ++ws;
      ++j;
    }
    if (ws == 0 || j >= paragraph.size()) continue;
    char next = paragraph[j];
    if (!std::isupper(static_cast<unsigned char>(next)) &&
        !std::isdigit(static_cast<unsigned char>(next)))
      continue;
    if (c == '.' && is_guarded_abbreviation(paragraph, i)) continue;
    std::string_view piece = trim(paragraph.substr(begin, i + 1 - begin));
    if (!piece.empty()) out.emplace_back(piece);
    begin = j;
  }
  std::string_view last = trim(paragraph.substr(begin));
  if (!last.empty()) out.emplace_back(last);
  return out;
}

std::string normalized_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const Codepoint& cp : decode_utf8(text)) {
    if (is_dash_cp(cp.value)) {
      out.push_back('-');
    } else if (cp.value == kLessEq) {
      out += "<=";
    } else if (cp.value == kGreaterEq) {
      out += ">=";
    } else if (cp.value < 0x80) {
      out.push_back(static_cast<char>(
          std::tolower(static_cast<int>(cp.value))));
    } else {
      out.append(text.substr(cp.start, cp.size));
    }
  }
  return out;
}

std::string normalized_text(const Token& tok) { return normalized_text(tok.text); }

bool is_dash(const Token& tok) {
  auto cps = decode_utf8(tok.text);
  return cps.size() == 1 && is_dash_cp(cps.front().value);
}

bool is_comparison(const Token& tok) { return tok.shape == TokenShape::Symbol; }

bool is_age_keyword(std::string_view token_text) {
  std::string t = normalized_text(token_text);
  return t == "age" || t == "ages" || t == "aged" || t == "year" || t == "years";
}

bool has_age_keyword(const Sentence& s) {
  return std::any_of(s.tokens.begin(), s.tokens.end(),
                     [](const Token& t) { return is_age_keyword(t.text); });
}

Sentence make_sentence(std::string_view text, SectionKind section, std::size_t index) {
  Sentence s;
  s.text = std::string(text);
  s.tokens = tokenize(s.text);
  s.section = section;
  s.index = index;
  return s;
}

namespace {

using nlohmann::json;

Paragraph split_paragraph(std::string_view text, SectionKind section,
                          std::size_t& sentence_index) {
  Paragraph para;
  for (const std::string& sent : split_sentences(text))
    para.push_back(make_sentence(sent, section, sentence_index++));
  return para;
}

// Accepts "2. Methods", "## Results", "METHODS:", etc.
std::optional<SectionKind> match_heading(std::string_view line) {
  std::string_view s = trim(line);
  std::size_t b = 0;
  while (b < s.size() && (s[b] == '#' || std::isdigit(static_cast<unsigned char>(s[b])) ||
                          s[b] == '.' || s[b] == ')' || std::isspace(static_cast<unsigned char>(s[b]))))
    ++b;
  s = trim(s.substr(b));
  if (!s.empty() && s.back() == ':') s = trim(s.substr(0, s.size() - 1));
  if (s.empty() || s.size() > 40) return std::nullopt;
  std::string key = normalized_text(s);
  if (key == "abstract") return SectionKind::Abstract;
  if (key == "introduction" || key == "background") return SectionKind::Introduction;
  if (key == "method" || key == "methods" || key == "materials and methods" ||
      key == "participants")
    return SectionKind::Method;
  if (key == "result" || key == "results" || key == "findings") return SectionKind::Result;
  if (key == "discussion" || key == "conclusion" || key == "conclusions")
    return SectionKind::Discussion;
  return std::nullopt;
}

}  // namespace

Document load_document_json(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw InputFormatError("document: not a JSON object");
  if (!doc.contains("id") || !doc["id"].is_string())
    throw InputFormatError("document: missing or non-string field 'id'");
  if (!doc.contains("sections") || !doc["sections"].is_array())
    throw InputFormatError("document '" + doc["id"].get<std::string>() +
                           "': missing or non-array field 'sections'");
  Document out;
  out.id = doc["id"].get<std::string>();
  std::size_t sentence_index = 0;
  std::size_t si = 0;
  for (const json& sec : doc["sections"]) {
    std::string at = "sections[" + std::to_string(si) + "]";
    if (!sec.is_object() || !sec.contains("name") || !sec["name"].is_string())
      throw InputFormatError("document '" + out.id + "': " + at +
                             ".name missing or non-string");
    auto kind = section_from_name(sec["name"].get<std::string>());
    if (!kind)
      throw InputFormatError("document '" + out.id + "': " + at + ".name '" +
                             sec["name"].get<std::string>() + "' is not a section kind");
    if (!sec.contains("paragraphs") || !sec["paragraphs"].is_array())
      throw InputFormatError("document '" + out.id + "': " + at +
                             ".paragraphs missing or non-array");
    Section section;
    section.name = *kind;
    std::size_t pi = 0;
    for (const json& para : sec["paragraphs"]) {
      if (!para.is_string())
        throw InputFormatError("document '" + out.id + "': " + at + ".paragraphs[" +
                               std::to_string(pi) + "] is not a string");
      section.paragraphs.push_back(
          split_paragraph(para.get<std::string>(), *kind, sentence_index));
      ++pi;
    }
    out.sections.push_back(std::move(section));
    ++si;
  }
  return out;
}

Document load_document_text(std::string id, std::string_view text) {
  Document out;
  out.id = std::move(id);
  std::size_t sentence_index = 0;
  Section current;
  current.name = SectionKind::Other;
  auto flush_section = [&]() {
    if (!current.paragraphs.empty()) out.sections.push_back(std::move(current));
    current = Section{};
  };

  std::string pending;  // paragraph accumulator
  auto flush_paragraph = [&]() {
    std::string_view body = trim(pending);
    if (!body.empty())
      current.paragraphs.push_back(split_paragraph(body, current.name, sentence_index));
    pending.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    if (auto kind = match_heading(line)) {
      flush_paragraph();
      flush_section();
      current.name = *kind;
    } else if (trim(line).empty()) {
      flush_paragraph();
    } else {
      if (!pending.empty()) pending.push_back(' ');
      pending.append(trim(line));
    }
    if (eol == std::string_view::npos) break;
    pos = eol + 1;
  }
  flush_paragraph();
  flush_section();
  return out;
}

Document load_document(std::string id, const std::string& payload) {
  for (char c : payload) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return load_document_json(payload);
    break;
  }
  return load_document_text(std::move(id), payload);
}

}  // namespace trialage
