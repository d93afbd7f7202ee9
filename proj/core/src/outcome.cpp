#include "patchgate/outcome.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "patchgate/errors.hpp"

namespace patchgate {

std::string_view to_wire(OutcomeStatus status) noexcept {
  switch (status) {
    case OutcomeStatus::kValue: return "value";
    case OutcomeStatus::kTimeout: return "timeout";
    case OutcomeStatus::kRuntimeError: return "error";
    case OutcomeStatus::kLoadError: return "load_error";
  }
  return "error";
}

OutcomeStatus outcome_status_from_wire(std::string_view text) {
  if (text == "value") return OutcomeStatus::kValue;
  if (text == "timeout") return OutcomeStatus::kTimeout;
  if (text == "error") return OutcomeStatus::kRuntimeError;
  if (text == "load_error") return OutcomeStatus::kLoadError;
  throw ParseError(fmt::format("unknown outcome status '{}'", text));
}

namespace {

bool numbers_close(double a, double b) {
  if (a == b) return true;  // covers equal infinities
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double scale = std::max(std::fabs(a), std::fabs(b));
  return std::fabs(a - b) <= std::max(kValueTolerance, kValueTolerance * scale);
}

}  // namespace

bool compare_values(const Json& actual, const Json& expected) {
  if (actual.is_number() && expected.is_number()) {
    // Two integers compare exactly; doubles lose precision above 2^53.
    if (actual.is_number_integer() && expected.is_number_integer()) {
      if (actual.is_number_unsigned() || expected.is_number_unsigned()) {
        if (actual.is_number_unsigned() && expected.is_number_unsigned()) {
          return actual.get<std::uint64_t>() == expected.get<std::uint64_t>();
        }
        const auto& u = actual.is_number_unsigned() ? actual : expected;
        const auto& s = actual.is_number_unsigned() ? expected : actual;
        const auto sv = s.get<std::int64_t>();
        return sv >= 0 && static_cast<std::uint64_t>(sv) == u.get<std::uint64_t>();
      }
      return actual.get<std::int64_t>() == expected.get<std::int64_t>();
    }
    return numbers_close(actual.get<double>(), expected.get<double>());
  }
  if (actual.type() != expected.type()) return false;
  switch (actual.type()) {
    case Json::value_t::null:
      return true;
    case Json::value_t::boolean:
      return actual.get<bool>() == expected.get<bool>();
    case Json::value_t::string:
      return actual.get_ref<const std::string&>() == expected.get_ref<const std::string&>();
    case Json::value_t::array: {
      if (actual.size() != expected.size()) return false;
      for (std::size_t i = 0; i < actual.size(); ++i) {
        if (!compare_values(actual[i], expected[i])) return false;
      }
      return true;
    }
    case Json::value_t::object: {
      if (actual.size() != expected.size()) return false;
      for (auto it = expected.begin(); it != expected.end(); ++it) {
        const auto found = actual.find(it.key());
        if (found == actual.end() || !compare_values(*found, it.value())) return false;
      }
      return true;
    }
    default:
      return actual == expected;
  }
}

bool outcomes_equivalent(const CaseOutcome& a, const CaseOutcome& b) {
  return a.is_value() && b.is_value() && compare_values(a.value, b.value);
}

Json to_json(const CaseOutcome& outcome) {
  Json j{{"status", to_wire(outcome.status)}, {"detail", outcome.detail}};
  j["value"] = outcome.is_value() ? outcome.value : Json(nullptr);
  return j;
}

CaseOutcome case_outcome_from_json(const Json& j) {
  CaseOutcome out;
  out.status = outcome_status_from_wire(j.at("status").get<std::string>());
  if (out.is_value()) out.value = j.at("value");
  out.detail = j.value("detail", "");
  return out;
}

OutcomeVector expected_as_outcomes(const std::vector<Json>& expected) {
  OutcomeVector out;
  out.reserve(expected.size());
  for (const auto& v : expected) out.push_back(CaseOutcome::of_value(v));
  return out;
}

}  // namespace patchgate
