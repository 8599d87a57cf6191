#pragma once

#include <stdexcept>
#include <string>

namespace epivo {

enum class ErrorCode {
  kIo = 1,
  kInvalidArgument,
  kZeroTranslation,
  kDegenerateConfiguration,
  kInsufficientCorrespondences,
  kNoModelFound,
  kAmbiguousCheirality,
  kDimensionMismatch,
  kDegenerateDepth,
  kShapeMismatch,
  kEmptyMask,
  kEmptyInput,
  kDegenerateScale,
  kInvalidScene,
  kInsufficientStaticArea,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace epivo
