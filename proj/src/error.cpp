#include "forestscope/error.hpp"

namespace forestscope {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidSchema: return "invalid-schema";
    case ErrorKind::InvalidExample: return "invalid-example";
    case ErrorKind::SpaceOverflow: return "space-overflow";
    case ErrorKind::MalformedHeader: return "malformed-header";
    case ErrorKind::MalformedRow: return "malformed-row";
    case ErrorKind::UnknownToken: return "unknown-token";
    case ErrorKind::ContradictoryExamples: return "contradictory-examples";
    case ErrorKind::IncompatibleConcept: return "incompatible-concept";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::EmptyInput: return "empty-input";
    case ErrorKind::CoverageExceedsTrain: return "coverage-exceeds-train";
    case ErrorKind::InvalidTree: return "invalid-tree";
    case ErrorKind::TreeParse: return "tree-parse";
    case ErrorKind::OracleBound: return "oracle-bound";
    case ErrorKind::Truncated: return "truncated";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::UnknownPreset: return "unknown-preset";
    case ErrorKind::FilterExhausted: return "filter-exhausted";
    case ErrorKind::MixedDenominators: return "mixed-denominators";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace forestscope
