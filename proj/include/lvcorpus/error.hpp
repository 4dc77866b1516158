#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace lvcorpus {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Input bytes are not a well-formed instance of the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A single failed check, addressed by a dotted field path ("stages[2].bands").
struct Issue {
  std::string path;
  std::string message;
};

/// Carries every violation found, not just the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Issue> issues);

  const std::vector<Issue>& issues() const noexcept { return issues_; }

 private:
  static std::string summarize(const std::vector<Issue>& issues);

  std::vector<Issue> issues_;
};

inline ValidationError::ValidationError(std::vector<Issue> issues)
    : Error(summarize(issues)), issues_(std::move(issues)) {}

inline std::string ValidationError::summarize(const std::vector<Issue>& issues) {
  std::string out = std::to_string(issues.size()) + " validation issue(s)";
  for (const auto& issue : issues) {
    out += "\n  ";
    out += issue.path;
    out += ": ";
    out += issue.message;
  }
  return out;
}

}  // namespace lvcorpus
