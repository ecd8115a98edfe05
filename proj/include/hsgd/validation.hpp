#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hsgd {

// One violated invariant. `code` is stable and machine-matchable; `message`
// is for humans and names the offending ids.
struct Issue {
  std::string code;
  std::string message;
  std::vector<std::string> subjects;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has_code(std::string_view code) const;
  bool mentions(std::string_view text) const;

  void add(std::string code, std::string message, std::vector<std::string> subjects = {});
  void merge(const ValidationReport& other);

  bool operator==(const ValidationReport&) const = default;
};

std::string format_report(const ValidationReport& report);

}  // namespace hsgd
