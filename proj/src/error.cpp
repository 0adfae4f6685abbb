#include "tbm/error.hpp"

namespace tbm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid_input";
    case ErrorCode::unsupported_combination: return "unsupported_combination";
    case ErrorCode::infeasible_point: return "infeasible_point";
    case ErrorCode::no_feasible_point: return "no_feasible_point";
    case ErrorCode::training_diverged: return "training_diverged";
    case ErrorCode::mape_undefined: return "mape_undefined";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::unsupported_version: return "unsupported_version";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

namespace {

std::string list_indices(const std::vector<std::size_t>& indices) {
  std::string out;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(indices[i]);
  }
  return out;
}

}  // namespace

MapeUndefined::MapeUndefined(std::vector<std::size_t> indices)
    : Error(ErrorCode::mape_undefined, "truth",
            "MAPE undefined: zero truth value at index " + list_indices(indices)),
      indices_(std::move(indices)) {}

}  // namespace tbm
