#pragma once

#include <stdexcept>
#include <string>

namespace restore {

// Caller broke an API precondition (bad shapes, stepping a finished episode).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Inputs that cannot form a valid scenario or episode.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace restore
