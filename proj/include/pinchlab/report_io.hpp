#pragma once

// Deterministic text emission: JSON with sorted keys and every double printed
// at 17 significant digits, and CSV rows in the same number format.

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace pinchlab {

using Json = nlohmann::json;

std::string format_double(double x);
std::string dump_json(const Json& doc);

void write_csv_header(std::ostream& os, const std::vector<std::string>& columns);
void write_csv_row(std::ostream& os, const std::vector<double>& values);

}  // namespace pinchlab
