#include "tcfp/error.hpp"

namespace tcfp {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::RaggedSampling: return "RaggedSampling";
    case Errc::UnknownChannel: return "UnknownChannel";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::IoError: return "IoError";
    case Errc::IndexError: return "IndexError";
    case Errc::BadInput: return "BadInput";
    case Errc::DimError: return "DimError";
    case Errc::LengthError: return "LengthError";
    case Errc::RiccatiDiverged: return "RiccatiDiverged";
    case Errc::SingularCov: return "SingularCov";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::ConfigError: return "ConfigError";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DegenerateRange: return "DegenerateRange";
    case Errc::EmptySeries: return "EmptySeries";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::StratifyError: return "StratifyError";
    case Errc::InvalidMode: return "InvalidMode";
    case Errc::UnsafeDelay: return "UnsafeDelay";
    case Errc::NotApplicable: return "NotApplicable";
  }
  return "Unknown";
}

}  // namespace tcfp
