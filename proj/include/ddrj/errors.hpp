#ifndef DDRJ_ERRORS_HPP
#define DDRJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ddrj {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// numerical failures
struct NotPositiveDefinite : Error {
  explicit NotPositiveDefinite(const std::string& msg) : Error(msg) {}
};
struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};
struct ZeroVariance : Error {
  explicit ZeroVariance(const std::string& msg) : Error(msg) {}
};
struct SingleGroup : Error {
  explicit SingleGroup(const std::string& msg) : Error(msg) {}
};

// inference / evaluation
struct EmptyTrace : Error {
  explicit EmptyTrace(const std::string& msg) : Error(msg) {}
};
struct LengthMismatch : Error {
  explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};
struct SingleClass : Error {
  explicit SingleClass(const std::string& msg) : Error(msg) {}
};
struct FoldDegenerate : Error {
  explicit FoldDegenerate(const std::string& msg) : Error(msg) {}
};
struct EmptySelection : Error {
  explicit EmptySelection(const std::string& msg) : Error(msg) {}
};
struct UnknownColumn : Error {
  explicit UnknownColumn(const std::string& msg) : Error(msg) {}
};

// I/O and configuration
struct IoError : Error {
  explicit IoError(const std::string& msg) : Error(msg) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};
struct SchemaMismatch : Error {
  explicit SchemaMismatch(const std::string& msg) : Error(msg) {}
};
struct UnknownScenario : Error {
  explicit UnknownScenario(const std::string& msg) : Error(msg) {}
};

}  // namespace ddrj

#endif
