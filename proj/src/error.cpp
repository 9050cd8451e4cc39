#include "angsurf/error.hpp"

namespace angsurf {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain-error";
    case ErrorCode::numeric: return "numeric-error";
    case ErrorCode::feasibility: return "feasibility-error";
    case ErrorCode::empty_sample: return "empty-sample";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::optimization: return "optimization-failure";
    case ErrorCode::io: return "io-error";
  }
  return "unknown-error";
}

}  // namespace angsurf
