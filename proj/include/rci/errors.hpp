#pragma once

#include <stdexcept>
#include <string>

namespace rci {

/// Invalid configuration or violated precondition. `invariant()` names the
/// rule that was broken (e.g. "omega0 > 0").
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string invariant, const std::string& message)
      : std::invalid_argument(message), invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

/// Time step too coarse for the fastest frequency in the Hamiltonian.
class ResolutionError : public std::runtime_error {
 public:
  ResolutionError(std::string scale, double product, const std::string& message)
      : std::runtime_error(message), scale_(std::move(scale)), product_(product) {}

  /// Name of the offending frequency scale ("rabi", "detuning", ...).
  const std::string& scale() const noexcept { return scale_; }
  /// The offending dt * frequency product.
  double product() const noexcept { return product_; }

 private:
  std::string scale_;
  double product_;
};

/// Sinusoid fit rejected because the residual is too large.
class FitError : public std::runtime_error {
 public:
  FitError(double rms_residual, double amplitude, const std::string& message)
      : std::runtime_error(message), rms_residual_(rms_residual), amplitude_(amplitude) {}

  double rms_residual() const noexcept { return rms_residual_; }
  double amplitude() const noexcept { return amplitude_; }

 private:
  double rms_residual_;
  double amplitude_;
};

/// Fringe shift is not linear in the rotation rate over the requested rates.
class LinearityError : public std::runtime_error {
 public:
  LinearityError(double residual, const std::string& message)
      : std::runtime_error(message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace rci
