#pragma once

#include <stdexcept>
#include <string>

namespace proxgen {

// Malformed input text or binary layout (includes a line number where known).
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally well-formed input that violates a semantic constraint.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A randomized procedure exhausted its retry budget.
struct PlacementError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace proxgen
