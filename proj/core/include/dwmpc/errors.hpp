#pragma once

#include <stdexcept>
#include <string>

namespace dwmpc {

/// Bad configuration values (weights, limits, formation geometry, ...).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable state/input fed to a dynamics function.
struct InvalidStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Integration produced non-finite intermediates.
struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inconsistent matrix/vector dimensions between cooperating pieces.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File or config text could not be parsed; message carries location info.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dwmpc
