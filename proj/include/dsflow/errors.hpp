#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace dsflow {

enum class ErrorKind {
  invalid_argument,
  domain,             // quotient evaluated outside its Garding cone
  null_degeneration,  // |Dr|_sigma >= lambda, induced metric not Riemannian
  near_null,          // upsilon below the configured floor
  convexity_lost,     // principal curvatures left Gamma_k^+
  numerical,          // eigen solver or arithmetic failure
  stiffness_collapse, // proposed time step below dt_min
  monitor_violation,
};

const char* to_string(ErrorKind kind) noexcept;

/// Error raised by every dsflow operation. Carries the offending grid node
/// when the failure is local to one.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::size_t> node = std::nullopt)
      : std::runtime_error(message), kind_(kind), node_(node) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> node() const noexcept { return node_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> node_;
};

}  // namespace dsflow
