#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spherepack {

/// Malformed triangulation / metric / target documents.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A tetrahedron is not realizable (or too close to the realizability boundary)
/// under the current metric. `tet` is the index into Triangulation::tets() when
/// known, otherwise npos.
class DegenerateTet : public std::runtime_error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DegenerateTet(const std::string& what, double diagnostic, std::size_t tet = npos)
      : std::runtime_error(what), diagnostic_(diagnostic), tet_(tet) {}

  double diagnostic() const noexcept { return diagnostic_; }
  std::size_t tet() const noexcept { return tet_; }

 private:
  double diagnostic_;
  std::size_t tet_;
};

class InadmissibleInitialMetric : public std::runtime_error {
 public:
  InadmissibleInitialMetric(const std::string& what, std::size_t tet)
      : std::runtime_error(what), tet_(tet) {}
  std::size_t tet() const noexcept { return tet_; }

 private:
  std::size_t tet_;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotDQE : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LineSearchStalled : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spherepack
