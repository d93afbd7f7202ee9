#pragma once

#include <string>
#include <string_view>

namespace patchgate {

/// CRLF and lone CR become LF.
std::string normalize_newlines(std::string_view text);

/// Newline normalization plus trailing-whitespace trim on every line.
/// Leading/trailing blank lines are dropped.
std::string normalize_code(std::string_view text);

/// Shortest decimal form that round-trips to the same double.
std::string format_full(double value);

/// Two decimals, half-up (ties away from zero).
std::string format_display(double value);

/// Two-decimal half-up rounding as a number.
double round_display(double value);

/// Stable label for a temperature: "0.0", "0.5", "1.0", "0.25".
std::string temperature_label(double temperature);

std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace patchgate
