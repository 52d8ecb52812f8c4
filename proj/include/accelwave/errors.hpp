#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace accelwave {

/// Malformed or non-physical input configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computation could not be carried out (loss of hyperbolicity, degenerate
/// field, non-finite state, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationError : public NumericalError {
 public:
  SimulationError(const std::string& what, double time, std::size_t cell)
      : NumericalError(what + " (t=" + std::to_string(time) +
                       ", cell=" + std::to_string(cell) + ")"),
        time_(time),
        cell_(cell) {}

  double time() const { return time_; }
  std::size_t cell() const { return cell_; }

 private:
  double time_;
  std::size_t cell_;
};

}  // namespace accelwave
