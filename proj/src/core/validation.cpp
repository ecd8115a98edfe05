#include "hsgd/validation.hpp"

#include <algorithm>

namespace hsgd {

bool ValidationReport::has_code(std::string_view code) const {
  return std::any_of(issues.begin(), issues.end(), [&](const Issue& i) { return i.code == code; });
}

bool ValidationReport::mentions(std::string_view text) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const Issue& i) { return i.message.find(text) != std::string::npos; });
}

void ValidationReport::add(std::string code, std::string message, std::vector<std::string> subjects) {
  issues.push_back(Issue{std::move(code), std::move(message), std::move(subjects)});
}

void ValidationReport::merge(const ValidationReport& other) {
  issues.insert(issues.end(), other.issues.begin(), other.issues.end());
}

std::string format_report(const ValidationReport& report) {
  std::string out;
  for (const auto& issue : report.issues) {
    out += issue.code;
    out += ": ";
    out += issue.message;
    out += '\n';
  }
  return out;
}

}  // namespace hsgd
