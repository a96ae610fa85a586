#include "report.hpp"

#include <set>
#include <sstream>

#include "common.hpp"

namespace nee {

namespace {

std::string pct(double x) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << 100.0 * x;
  return os.str();
}

}  // namespace

std::string report_markdown(const nlohmann::json& input) {
  nlohmann::json reports = input.is_array() ? input : nlohmann::json::array({input});
  std::vector<nlohmann::json> general, pairs, others;
  for (const auto& r : reports) {
    const std::string kind = r.value("kind", "");
    if (kind == "generalization") {
      general.push_back(r);
    } else if (kind == "pairs") {
      pairs.push_back(r);
    } else {
      others.push_back(r);
    }
  }

  std::ostringstream md;
  if (!general.empty()) {
    std::set<size_t> sizes;
    for (const auto& r : general) {
      for (const auto& lr : r.at("lengths")) {
        sizes.insert(lr.at("length").get<size_t>());
      }
    }
    md << "| Accuracy \\ Sizes |";
    for (size_t s : sizes) md << " " << s << " |";
    md << "\n|---|";
    for (size_t i = 0; i < sizes.size(); ++i) md << "---|";
    md << "\n";
    for (const auto& r : general) {
      md << "| " << r.value("task", std::string("?")) << " |";
      for (size_t s : sizes) {
        bool found = false;
        for (const auto& lr : r.at("lengths")) {
          if (lr.at("length").get<size_t>() == s) {
            md << " " << pct(lr.at("exact").get<double>()) << " |";
            found = true;
            break;
          }
        }
        if (!found) md << " - |";
      }
      md << "\n";
    }
    md << "\n";
  }
  if (!pairs.empty()) {
    md << "| Training Numbers |";
    for (const auto& r : pairs) {
      md << " " << (r.contains("extra") && r.at("extra").contains("training_numbers")
                        ? std::to_string(
                              r.at("extra").at("training_numbers").get<size_t>())
                        : r.value("task", std::string("?")))
         << " |";
    }
    md << "\n|---|";
    for (size_t i = 0; i < pairs.size(); ++i) md << "---|";
    md << "\n| Accuracy% |";
    for (const auto& r : pairs) {
      md << " " << pct(r.at("accuracy").get<double>()) << " |";
    }
    md << "\n\n";
  }
  for (const auto& r : others) {
    md << "```json\n" << r.dump(2) << "\n```\n";
  }
  return md.str();
}

}  // namespace nee
