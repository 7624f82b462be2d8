#ifndef FIBERSTRAIN_ERROR_HPP
#define FIBERSTRAIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fiberstrain {

// Every error carries a short machine-readable category; the CLI prints it
// as the first token on stderr.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

// Invalid argument to a constructor or operation (bad modulus, bad Poisson
// ratio, non-orthogonal rotation, ...).
struct ArgumentError : Error {
  explicit ArgumentError(const std::string& m) : Error("argument", m) {}
};

// Stiffness is not positive definite on symmetric tensors.
struct DefinitenessError : Error {
  explicit DefinitenessError(const std::string& m) : Error("definiteness", m) {}
};

// Material pair lies outside the range where the analytical transfer
// operator is defined.
struct StpValidityError : Error {
  explicit StpValidityError(const std::string& m) : Error("stp-validity", m) {}
};

// Singular or ill-posed linear algebra during operator or matrix assembly.
struct AssemblyError : Error {
  explicit AssemblyError(const std::string& m) : Error("assembly", m) {}
};

struct FormatError : Error {
  explicit FormatError(const std::string& m) : Error("format", m) {}
};

// Mesh or fiber path violates a structural invariant.
struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error("validation", m) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& m, double residual)
      : Error("convergence", m), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& m) : Error("config", m) {}
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error("io", m) {}
};

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_ERROR_HPP
