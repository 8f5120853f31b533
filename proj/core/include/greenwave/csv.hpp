#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace greenwave {

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);
/// Empty cell for an absent value.
std::string format_number(const std::optional<double>& value);

/// Writes one comma-separated row, quoting cells that need it.
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace greenwave
