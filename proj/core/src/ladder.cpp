#include "nhft/ladder.hpp"

#include <cmath>

#include "nhft/errors.hpp"

namespace nhft {

std::optional<LadderAction> apply(const LadderWord& word, unsigned n) {
  LadderAction act{n, 1};
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (*it == Ladder::Lower) {
      if (act.level == 0) return std::nullopt;
      act.squared *= act.level;
      --act.level;
    } else {
      ++act.level;
      act.squared *= act.level;
    }
  }
  return act;
}

cplx diagonal_element(const LadderPolynomial& p, unsigned n) {
  cplx sum{};
  for (const LadderTerm& term : p) {
    const auto act = apply(term.word, n);
    if (!act || act->level != n) continue;
    // words that return to n have a perfect-square product; sqrt is exact
    const auto root = static_cast<std::uint64_t>(std::llround(std::sqrt(static_cast<double>(act->squared))));
    if (root * root != act->squared) throw Error("diagonal_element: non-square diagonal product");
    sum += term.coefficient * static_cast<double>(root);
  }
  return sum;
}

LadderPolynomial position_squared(cplx omega) {
  if (omega == cplx{}) throw InvalidInput("position_squared: zero frequency");
  const cplx c = 1.0 / (2.0 * omega);
  using L = Ladder;
  return {
      {c, {L::Lower, L::Lower}},
      {c, {L::Lower, L::Raise}},
      {c, {L::Raise, L::Lower}},
      {c, {L::Raise, L::Raise}},
  };
}

}  // namespace nhft
