#ifndef TRIALAGE_ANSWER_HPP
#define TRIALAGE_ANSWER_HPP

#include <cstdint>
#include <cstddef>

#include "trialage/supervision.hpp"

namespace trialage {

// An extracted integer age value (years) with its evidence location.
struct AgeAnswer {
  std::int64_t value = 0;
  double confidence = 0.0;  // in [0,1]
  AgeKind kind = AgeKind::Min;
  std::size_t sentence_index = 0;
  std::size_t span_start = 0;  // byte offsets into the evidence sentence
  std::size_t span_end = 0;
};

}  // namespace trialage

#endif  // TRIALAGE_ANSWER_HPP
