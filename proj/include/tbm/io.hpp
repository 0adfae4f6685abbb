#pragma once

// CSV ingestion and canonical JSON persistence for models, surfaces and
// request payloads.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tbm/decision.hpp"
#include "tbm/domain.hpp"
#include "tbm/error.hpp"
#include "tbm/model.hpp"

namespace tbm {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kRecordsHeader =
    "chainage_m,src,ucs_mpa,rqd_pct,cai,q_pct,ci,m_mm,mgt,th_kn,tor_knm,pr_mm_min,ef_m3_mm";
inline constexpr std::string_view kSieveHeader = "sample_id,sieve_mm,retained_g";

// Throws ParseError carrying the 1-based row and the column name.
std::vector<TunnelingRecord> parse_records_csv(std::string_view text);
std::string emit_records_csv(std::span<const TunnelingRecord> records);

// Rows are grouped by sample_id (first-appearance order); sieve_mm = 0 is the
// pan. Bins come back sorted coarsest first.
std::vector<SieveAnalysis> parse_sieve_csv(std::string_view text);

// Objects keep insertion order; floating-point values are written with 17
// significant digits; non-finite values become null.
std::string canonical_dump(const Json& j);

std::string save_model(const ModelBundle& bundle);
// Throws ParseError on malformed input and UnsupportedVersion on a schema
// mismatch. Never returns a partially populated bundle.
ModelBundle load_model(std::string_view text);

Json to_json(const Recommendation& r);
Json to_json(const CostSurface& s);
Json to_json(const CostParams& p);
Json to_json(const GridSpec& g);
Json to_json(const RockMassState& r);
Json to_json(const EvalReport& r);

std::string save_surface(const CostSurface& s);
CostSurface load_surface(std::string_view text);

struct FieldError {
  std::string field;
  std::string message;
};

// Request-level validation failure listing every offending field.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<FieldError> errors);
  ValidationError(std::string field, std::string message)
      : ValidationError(std::vector<FieldError>{{std::move(field), std::move(message)}}) {}
  const std::vector<FieldError>& errors() const noexcept { return errors_; }

 private:
  std::vector<FieldError> errors_;
};

// Parsers for request payloads and CLI JSON arguments. Missing keys in the
// override parsers fall back to `base`; `prefix` is prepended to field names.
RockMassState rock_from_json(const Json& j, const std::string& prefix = "rock");
CostParams cost_from_json(const Json& j, const CostParams& base = {},
                          const std::string& prefix = "cost");
GridSpec grid_from_json(const Json& j, const GridSpec& base = {}, const std::string& prefix = "grid");

std::string read_file(const std::filesystem::path& path);
// Writes through a temporary file and renames it into place.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tbm
