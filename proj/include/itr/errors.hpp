#pragma once

#include <stdexcept>
#include <string>

namespace itr {

struct NonConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DegenerateDesign : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptySample : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptySite : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConstantColumn : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFinite : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingReply : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyIntersection : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingTruth : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BadShape : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace itr
