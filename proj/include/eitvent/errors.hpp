#pragma once

#include <stdexcept>
#include <string>

namespace eitvent {

/// Malformed or truncated input files. Messages carry the offending
/// path plus a byte or line offset where available.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Violated preconditions or inconsistent data (bad manifest labels,
/// infeasible split plans, dimension mismatches).
class DataError : public std::invalid_argument {
 public:
  explicit DataError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace eitvent
