#pragma once

#include <stdexcept>
#include <string>

namespace colm {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace colm
