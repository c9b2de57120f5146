#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tcfp {

// Every failure raised by the library carries one of these codes. The CLI
// prints the code name and exits 1.
enum class Errc {
  RaggedSampling,
  UnknownChannel,
  EmptyDataset,
  IoError,
  IndexError,
  BadInput,
  DimError,
  LengthError,
  RiccatiDiverged,
  SingularCov,
  InsufficientData,
  RankDeficient,
  ConfigError,
  SchemaError,
  DegenerateRange,
  EmptySeries,
  ZeroVariance,
  DegenerateLabels,
  StratifyError,
  InvalidMode,
  UnsafeDelay,
  NotApplicable,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  std::string_view name() const noexcept { return errc_name(code_); }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace tcfp
