#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace patchgate {

using Json = nlohmann::json;

enum class OutcomeStatus { kValue, kTimeout, kRuntimeError, kLoadError };

/// Wire spelling: "value", "timeout", "error", "load_error".
std::string_view to_wire(OutcomeStatus status) noexcept;
OutcomeStatus outcome_status_from_wire(std::string_view text);

/// Observed behaviour of one program on one test input.
struct CaseOutcome {
  OutcomeStatus status = OutcomeStatus::kValue;
  Json value;          // meaningful only when status == kValue
  std::string detail;  // diagnostic; never compared

  static CaseOutcome of_value(Json v) { return {OutcomeStatus::kValue, std::move(v), {}}; }
  static CaseOutcome failure(OutcomeStatus s, std::string detail) {
    return {s, nullptr, std::move(detail)};
  }

  bool is_value() const noexcept { return status == OutcomeStatus::kValue; }

  friend bool operator==(const CaseOutcome&, const CaseOutcome&) = default;
};

using OutcomeVector = std::vector<CaseOutcome>;

inline constexpr double kValueTolerance = 1e-6;

/// Deep structural equality. Numbers (integer or floating) match when
/// |a-b| <= max(1e-6, 1e-6*max(|a|,|b|)); arrays are order-sensitive;
/// objects compare by key set and then per key.
bool compare_values(const Json& actual, const Json& expected);

/// Equivalence used by OER: both sides must be values and compare equal.
/// Any failure outcome is equivalent to nothing, including another failure.
bool outcomes_equivalent(const CaseOutcome& a, const CaseOutcome& b);

Json to_json(const CaseOutcome& outcome);
CaseOutcome case_outcome_from_json(const Json& j);

/// Expected values of a suite as an OutcomeVector of Value outcomes.
OutcomeVector expected_as_outcomes(const std::vector<Json>& expected);

}  // namespace patchgate
