#pragma once

#include <stdexcept>
#include <string>

namespace provkit {

// Bad input of any kind. The CLI maps this to exit code 2; everything else
// derived from std::exception maps to 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace provkit
