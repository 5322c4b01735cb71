#ifndef TRIALAGE_SUPERVISION_HPP
#define TRIALAGE_SUPERVISION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "trialage/corpus.hpp"

namespace trialage {

enum class AgeKind { Min, Max };

std::string_view age_kind_name(AgeKind kind);
std::optional<AgeKind> age_kind_from_name(std::string_view name);

enum class AgeUnit { Years, Months, Weeks, Days };

std::string_view age_unit_name(AgeUnit unit);

struct AgeBound {
  int value = 0;
  AgeUnit unit = AgeUnit::Years;
};

// One registry trial record.
struct ClinicalRecord {
  std::string nct_id;
  std::string criteria_text;
  std::optional<AgeBound> min_age;
  std::optional<AgeBound> max_age;
  std::string description;  // optional free text, used as a negative-sentence pool
};

struct SentenceExample {
  std::string text;
  bool positive = false;
  std::optional<AgeKind> kind;  // absent for negatives
};

enum class BioLabel { B, I, O };

std::string_view bio_label_name(BioLabel label);
std::optional<BioLabel> bio_label_from_name(std::string_view name);

struct BioSequence {
  std::vector<Token> tokens;
  std::vector<BioLabel> labels;
  AgeKind kind = AgeKind::Min;
  std::vector<std::string> pos_tags;  // optional, parallel to tokens when present
};

struct QaPair {
  std::string context;
  AgeKind kind = AgeKind::Min;
  std::int64_t answer_value = 0;
  std::size_t answer_start = 0;  // byte offsets into context
  std::size_t answer_end = 0;
};

// Parses one registry record from its JSON form:
//   { "nct_id": str, "criteria": str, "minimum_age": str, "maximum_age": str,
//     "description": str? }
// Age strings look like "21 Years" or "N/A". An unparseable age string makes
// the whole record unusable: nullopt is returned and `warn` (when set)
// receives a message. Missing/sentinel ages simply leave the bound absent.
std::optional<ClinicalRecord> parse_record(
    const std::string& json_text,
    const std::function<void(const std::string&)>& warn = {});

// First clause of the criteria that contains the annotated value as a
// standalone digit token together with an age keyword. Clauses come from
// bullet-delimiter splitting ("-" at line starts or after "; ") followed by
// sentence splitting. Requires the bound to be present in whole Years.
std::optional<std::string> select_age_clause(const ClinicalRecord& record, AgeKind kind);

struct DatasetQuotas {
  std::size_t min_positive = 10000;
  std::size_t max_positive = 10000;
  std::size_t negative = 20000;
};

struct SupervisionConfig {
  std::uint64_t seed = 0;
  bool dedup = true;  // drop duplicate clause/context texts before sampling
};

// Reported alongside the emitted examples when a quota cannot be met.
struct DatasetCounts {
  std::size_t min_positive = 0;
  std::size_t max_positive = 0;
  std::size_t negative = 0;
};

std::vector<SentenceExample> build_sentfinder_dataset(
    const std::vector<ClinicalRecord>& records,
    const std::vector<Document>& negative_corpus, const DatasetQuotas& quotas,
    const SupervisionConfig& config, DatasetCounts* counts = nullptr);

std::vector<BioSequence> build_bio_dataset(const std::vector<ClinicalRecord>& records,
                                           AgeKind kind, std::size_t quota,
                                           const SupervisionConfig& config);

enum class QaContextMode { Clause, Criteria };

std::vector<QaPair> build_qa_dataset(const std::vector<ClinicalRecord>& records,
                                     AgeKind kind, std::size_t quota,
                                     const SupervisionConfig& config,
                                     QaContextMode mode = QaContextMode::Criteria);

// Sentences drawn from record description fields that contain no age keyword;
// the default negative pool when no held-out document set is supplied.
std::vector<Document> negative_corpus_from_descriptions(
    const std::vector<ClinicalRecord>& records);

}  // namespace trialage

#endif  // TRIALAGE_SUPERVISION_HPP
