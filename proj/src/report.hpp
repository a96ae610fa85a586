#pragma once

#include <string>

#include <json.hpp>

namespace nee {

// Renders evaluation reports as markdown. Accepts a single report object or
// an array; generalization reports sharing a length sweep merge into one
// accuracy-by-size table, pair reports into a training-numbers table.
std::string report_markdown(const nlohmann::json& reports);

}  // namespace nee
