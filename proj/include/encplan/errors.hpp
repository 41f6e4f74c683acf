#pragma once

#include <stdexcept>
#include <string>

namespace encplan {

/// Invalid input data or an infeasible/unsolvable request. The CLI maps it to
/// exit code 1; programming errors use the standard exception types.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace encplan
