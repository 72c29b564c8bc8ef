#pragma once

#include <stdexcept>
#include <string>

namespace mirrornoise {

// Error categories map one-to-one onto CLI exit codes (see cli.hpp).
enum class ErrorKind {
  InvalidInput,   // precondition violation on a parameter record
  Domain,         // argument outside a formula's domain (e.g. V_SB < -2PhiF)
  OutOfRange,     // outside the model's supported range
  NoConvergence,  // iterative root find exceeded its cap
  Singular,       // MNA matrix singular at some frequency
  ZeroGain,       // input referral impossible
  Parse,          // netlist / parameter / JSON text error
  Infeasible,     // optimizer found no feasible point
  Usage,          // unknown element, directive missing, bad request
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SingularMatrixError : public Error {
 public:
  SingularMatrixError(double freq_hz, int pivot)
      : Error(ErrorKind::Singular, "singular matrix at f=" + std::to_string(freq_hz) +
                                       " Hz (pivot " + std::to_string(pivot) + ")"),
        freq_hz_(freq_hz),
        pivot_(pivot) {}
  double freq_hz() const noexcept { return freq_hz_; }
  int pivot() const noexcept { return pivot_; }

 private:
  double freq_hz_;
  int pivot_;
};

}  // namespace mirrornoise
