#include "rpclust/error.hpp"

namespace rpclust {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroMarginal: return "ZeroMarginal";
    case ErrorCode::BadShape: return "BadShape";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::BadK: return "BadK";
    case ErrorCode::NotBipartite: return "NotBipartite";
    case ErrorCode::UncoveredNode: return "UncoveredNode";
    case ErrorCode::EmptyCommunity: return "EmptyCommunity";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EmptyGazetteer: return "EmptyGazetteer";
    case ErrorCode::DuplicateCity: return "DuplicateCity";
    case ErrorCode::UnknownCity: return "UnknownCity";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::BadFormat: return "BadFormat";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace rpclust
