#pragma once

#include <stdexcept>
#include <string>

namespace forestscope {

enum class ErrorKind {
  InvalidSchema,
  InvalidExample,
  SpaceOverflow,
  MalformedHeader,
  MalformedRow,
  UnknownToken,
  ContradictoryExamples,
  IncompatibleConcept,
  OutOfRange,
  EmptyInput,
  CoverageExceedsTrain,
  InvalidTree,
  TreeParse,
  OracleBound,
  Truncated,
  InvalidConfig,
  UnknownPreset,
  FilterExhausted,
  MixedDenominators,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace forestscope
