#pragma once

#include <stdexcept>
#include <string>

namespace mf {

enum class Errc {
  out_of_domain,
  nonfinite_state,
  support_too_large,
  negative_input,
  invalid_family,
  numerical_failure,
  degenerate,
  config_invalid,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace mf
