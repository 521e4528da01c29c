#pragma once

#include <stdexcept>
#include <string>

namespace varifold {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the command-line tool.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& what)
      : std::runtime_error(what), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }
  /// Domain errors are geometric/analytic failures (exit status 1); the
  /// remaining ones are input or schema problems (exit status 2).
  virtual bool is_domain_error() const noexcept { return true; }

 private:
  std::string name_;
};

class InvalidInput : public Error {
 public:
  explicit InvalidInput(const std::string& what) : Error("InvalidInput", what) {}
  bool is_domain_error() const noexcept override { return false; }
};

class DegenerateGeometry : public Error {
 public:
  explicit DegenerateGeometry(const std::string& what) : Error("DegenerateGeometry", what) {}
};

class AmbiguousReconstruction : public Error {
 public:
  explicit AmbiguousReconstruction(const std::string& what)
      : Error("AmbiguousReconstruction", what) {}
};

class CoverageGap : public Error {
 public:
  explicit CoverageGap(const std::string& what) : Error("CoverageGap", what) {}
};

class ZeroDensity : public Error {
 public:
  explicit ZeroDensity(const std::string& what) : Error("ZeroDensity", what) {}
};

class PreconditionViolated : public Error {
 public:
  explicit PreconditionViolated(const std::string& what)
      : Error("PreconditionViolated", what) {}
};

}  // namespace varifold
