#ifndef SRP_ERRORS_HPP_
#define SRP_ERRORS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace srp {

/// Violated precondition on caller-supplied data (shape mismatch, bad parameter, malformed file).
class InputError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that started from valid input but could not produce a finite answer.
class NumericError : public std::runtime_error
{
public:
  explicit NumericError(const std::string & what,
    std::optional<std::size_t> step = std::nullopt,
    std::optional<double> residual  = std::nullopt)
      : std::runtime_error(what), step_(step), residual_(residual)
  {}

  std::optional<std::size_t> step() const noexcept { return step_; }
  std::optional<double> residual() const noexcept { return residual_; }

private:
  std::optional<std::size_t> step_;
  std::optional<double> residual_;
};

}  // namespace srp

#endif  // SRP_ERRORS_HPP_
