#pragma once

#include <stdexcept>
#include <string>

namespace utd {

enum class error_kind {
  input,       // malformed or out-of-contract input
  processing,  // the data were valid but a stage could not complete
};

/// Library exception.  stage names the module that raised it so that
/// pipeline errors can be traced back ("wavelet_estimation", ...).
class error : public std::runtime_error {
 public:
  error(error_kind kind, std::string stage, const std::string& what)
      : std::runtime_error(stage.empty() ? what : stage + ": " + what),
        kind_(kind),
        stage_(std::move(stage)) {}

  error_kind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }

 private:
  error_kind kind_;
  std::string stage_;
};

inline error input_error(std::string stage, const std::string& what) {
  return {error_kind::input, std::move(stage), what};
}

inline error processing_error(std::string stage, const std::string& what) {
  return {error_kind::processing, std::move(stage), what};
}

}  // namespace utd
