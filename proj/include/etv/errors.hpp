#ifndef ETV_ERRORS_HPP
#define ETV_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etv {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- expression parsing / evaluation ---

struct SyntaxError : Error {
  std::size_t offset;  // byte offset into the source string
  SyntaxError(const std::string& msg, std::size_t off)
      : Error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

struct UnknownIdentifier : SyntaxError {
  std::string name;
  UnknownIdentifier(const std::string& ident, std::size_t off)
      : SyntaxError("unknown identifier '" + ident + "'", off), name(ident) {}
};

struct ArityError : SyntaxError {
  ArityError(const std::string& fn, int expected, int got, std::size_t off)
      : SyntaxError("function '" + fn + "' expects " + std::to_string(expected) +
                        " argument(s), got " + std::to_string(got),
                    off) {}
};

struct DomainError : Error {
  using Error::Error;
};

// --- charts / tensors / fields ---

struct DimensionError : Error {
  using Error::Error;
};

struct NotPositiveDefinite : Error {
  using Error::Error;
};

struct OutOfDomain : Error {
  using Error::Error;
};

struct StencilOutOfDomain : Error {
  using Error::Error;
};

// --- einstein-type structures ---

struct InvalidParameters : Error {
  using Error::Error;
};

struct WrongClass : Error {
  using Error::Error;
};

struct AlphaZero : WrongClass {
  using WrongClass::WrongClass;
};

struct BetaZero : WrongClass {
  using WrongClass::WrongClass;
};

struct NotDegenerate : WrongClass {
  using WrongClass::WrongClass;
};

struct CriticalPoint : Error {
  using Error::Error;
};

// --- constructions ---

struct NotEinstein : Error {
  using Error::Error;
};

struct NonpositiveWarp : Error {
  using Error::Error;
};

struct ZeroInitialSlope : Error {
  using Error::Error;
};

struct SignChange : Error {
  using Error::Error;
};

// --- spectral ---

struct NotIntegrable : Error {
  using Error::Error;
};

struct SignViolation : Error {
  using Error::Error;
};

// --- scenarios / CLI ---

struct ScenarioError : Error {
  int line;  // 1-based line in the scenario file, 0 if not tied to a line
  explicit ScenarioError(const std::string& msg, int line_no = 0)
      : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
        line(line_no) {}
};

struct UnknownCheck : Error {
  using Error::Error;
};

struct UnknownCorpusEntry : Error {
  using Error::Error;
};

}  // namespace etv

#endif
