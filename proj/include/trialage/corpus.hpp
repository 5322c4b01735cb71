#ifndef TRIALAGE_CORPUS_HPP
#define TRIALAGE_CORPUS_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trialage {

// Thrown when an input file or record does not match its documented schema.
struct InputFormatError : std::runtime_error {
  explicit InputFormatError(const std::string& what) : std::runtime_error(what) {}
};

enum class SectionKind { Abstract, Introduction, Method, Result, Discussion, Other };

std::string_view section_name(SectionKind kind);
std::optional<SectionKind> section_from_name(std::string_view name);

enum class TokenShape { AllDigits, ContainsDigit, Capitalized, AllCaps, Lower, Punct, Symbol };

std::string_view shape_name(TokenShape shape);

struct Token {
  std::string text;
  std::size_t start = 0;   // byte offset into the sentence text
  std::size_t end = 0;     // exclusive
  std::optional<std::int64_t> numeric_value;
  TokenShape shape = TokenShape::Punct;
};

struct Sentence {
  std::string text;
  std::vector<Token> tokens;
  SectionKind section = SectionKind::Other;
  std::size_t index = 0;   // ordinal within the document
};

// A paragraph is an ordered run of sentences.
using Paragraph = std::vector<Sentence>;

struct Section {
  SectionKind name = SectionKind::Other;
  std::vector<Paragraph> paragraphs;
};

struct Document {
  std::string id;
  std::vector<Section> sections;

  // All sentences in document order.
  std::vector<const Sentence*> sentences() const;
};

// Splits text into tokens. Digit runs, dashes, comparison symbols, alphabetic
// runs and remaining punctuation are all separate tokens; offsets index into
// the input. "<=" and ">=" stay single tokens.
std::vector<Token> tokenize(std::string_view text);

// Classifies a token text without tokenizing.
TokenShape classify_shape(std::string_view text);

// numeric value of an all-digit token; absent for anything else (words,
// decimals, digit runs that overflow int64).
std::optional<std::int64_t> parse_integer_token(const Token& tok);

// Rule-based sentence boundary detection: {., !, ?} + whitespace + upper/digit,
// with an abbreviation guard list. Returned strings are trimmed.
std::vector<std::string> split_sentences(std::string_view paragraph);

// Lowercased text with unicode dashes mapped to "-" and ≤/≥ to "<=" / ">=".
std::string normalized_text(std::string_view text);
std::string normalized_text(const Token& tok);

bool is_dash(const Token& tok);
bool is_comparison(const Token& tok);

// Age keyword gate used throughout: {age, ages, aged, year, years}.
bool is_age_keyword(std::string_view token_text);
bool has_age_keyword(const Sentence& s);

// Builds a tokenized sentence (no document context).
Sentence make_sentence(std::string_view text, SectionKind section = SectionKind::Other,
                       std::size_t index = 0);

// Document ingestion. `load_document_json` takes one JSON object matching
//   { "id": str, "sections": [ { "name": str, "paragraphs": [str, ...] } ] }
// and throws InputFormatError (naming the field) on schema violations.
// `load_document_text` assigns paragraphs to sections by heading keywords;
// text without headings lands in a single "other" section.
Document load_document_json(const std::string& json_text);
Document load_document_text(std::string id, std::string_view text);

// Dispatch helper: parses as JSON when the payload looks like an object,
// otherwise treats it as plain text.
Document load_document(std::string id, const std::string& payload);

}  // namespace trialage

#endif  // TRIALAGE_CORPUS_HPP
