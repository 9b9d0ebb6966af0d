#pragma once

#include <stdexcept>
#include <string>

namespace gar {

// Error categories map onto CLI exit codes: usage -> 2, data -> 3,
// numeric -> 4.
enum class ErrorKind { usage = 2, data = 3, numeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define GAR_ERROR_TYPE(NAME, KIND)                       \
  class NAME : public Error {                            \
   public:                                               \
    explicit NAME(const std::string& msg)                \
        : Error(ErrorKind::KIND, #NAME ": " + msg) {}    \
  };

// dataset
GAR_ERROR_TYPE(MalformedCsv, data)
GAR_ERROR_TYPE(DuplicateColumn, data)
GAR_ERROR_TYPE(NonMonotoneDates, data)
GAR_ERROR_TYPE(NonPositiveForLog, data)
GAR_ERROR_TYPE(TargetMissing, data)
GAR_ERROR_TYPE(EmptyAfterAlignment, data)
GAR_ERROR_TYPE(PlanOutOfRange, data)
GAR_ERROR_TYPE(ZeroVarianceColumn, data)

// qr_core
GAR_ERROR_TYPE(RankDeficient, numeric)
GAR_ERROR_TYPE(NoConvergence, numeric)
GAR_ERROR_TYPE(AllZeroWeights, numeric)

// qpcr
GAR_ERROR_TYPE(DegeneratePredictor, numeric)
GAR_ERROR_TYPE(NonPositiveLoss, numeric)
GAR_ERROR_TYPE(EmptyPanel, data)

// qrf
GAR_ERROR_TYPE(AllLeavesEmpty, numeric)

// backtest
GAR_ERROR_TYPE(MisalignedRecords, data)
GAR_ERROR_TYPE(EmptyRecords, data)

// gar_decomp
GAR_ERROR_TYPE(IndexOutOfRange, usage)
GAR_ERROR_TYPE(PartitionIncomplete, data)
GAR_ERROR_TYPE(PartitionOverlap, data)
GAR_ERROR_TYPE(TooShort, data)
GAR_ERROR_TYPE(InsufficientOverlap, data)
GAR_ERROR_TYPE(ZeroVariance, numeric)

#undef GAR_ERROR_TYPE

}  // namespace gar
