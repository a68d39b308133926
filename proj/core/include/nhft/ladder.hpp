#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nhft/linalg.hpp"

namespace nhft {

enum class Ladder { Lower, Raise };

/// Product of ladder operators, applied right to left (word.back() acts first).
using LadderWord = std::vector<Ladder>;

struct LadderTerm {
  cplx coefficient;
  LadderWord word;
};

/// Linear combination of ladder words.
using LadderPolynomial = std::vector<LadderTerm>;

struct LadderAction {
  unsigned level = 0;
  /// Squared matrix element: word|n> = sqrt(squared)|level>.
  std::uint64_t squared = 1;
};

/// word|n>; nullopt when a lowering operator annihilates the state.
std::optional<LadderAction> apply(const LadderWord& word, unsigned n);

/// <n̄|P|n> with the biorthogonal number states of a complex-frequency
/// oscillator (<m̄|n> = delta_mn). Diagonal matrix elements are square roots
/// of perfect squares, so the result is exact up to the coefficient products.
cplx diagonal_element(const LadderPolynomial& p, unsigned n);

/// x^2 = (a + a†)^2 / (2 Omega) with hbar = m = 1.
LadderPolynomial position_squared(cplx omega);

}  // namespace nhft
