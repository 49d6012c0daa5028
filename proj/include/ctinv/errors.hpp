#pragma once

#include <stdexcept>
#include <string>

namespace ctinv {

enum class ErrorKind {
  Domain,            // argument outside the supported domain
  Singular,          // S and T collide, repeated L, singular linear system
  Inadmissible,      // determinant vanishes on the radial grid
  NoValidT,          // polynomial inversion produced complex roots or L <= -1/2
  Bracketing,        // zero bracketing failed
  InsufficientData,  // normalization constants missing
  Resonant,          // vanishing denominator in the one-shift phase law
  Inconsistent,      // complex phase with non-negligible imaginary residue
  WindowTooSmall,    // phase fit residual too large
  Unfitted,          // potential tail not fitted
  Parse,             // malformed input file
  Usage,             // bad command-line usage
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace ctinv
