#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "ethlab/lattice.hpp"

namespace ethlab::cli {

class SelectorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Observable from a text expression.
///
///   expr   := term { '+' term }
///   term   := [number '*'] factor { '*' factor }
///   factor := name '(' site | "all" ')' | 'Q' | 'H' | 'I'
///
/// Names: sx, sy, sz on qubits; lambda1..lambda8 and q on qutrits. `all`
/// multiplies the local operator over every site. 'H' needs `hamiltonian`.
OperatorMatrix operator_selector(std::string_view expr, int L, int dim,
                                 const OperatorMatrix* hamiltonian = nullptr);

/// The expression with whitespace removed, used as a column label.
std::string selector_label(std::string_view expr);

}  // namespace ethlab::cli
