// Lowest levels of the fluxonium in the three-well regime (E_J/E_L = 21.74), with
// parity labels and the qutrit charge-operator decomposition.
#include <cstdio>

#include <fluxbic/fluxbic.hpp>

int main() {
  fluxbic::CircuitParams p;
  p.E_J = 10.0;
  p.E_C = 3.6;
  p.E_L = 0.46;

  const fluxbic::SpectralResult s = fluxbic::solve_spectrum(p, fluxbic::Numerics{});
  for (int i = 0; i < s.size(); ++i) std::printf("%d  %12.6f GHz  %s\n", i, s.energies[i], fluxbic::parity_name(s.parities[i]));

  const fluxbic::QutritBasis q = fluxbic::qutrit_basis_from_eigenstates(s);
  const auto n = fluxbic::decompose_operator(fluxbic::build_charge_operator(s.basis, p), q);
  for (const auto& [term, c] : n.coefficients) std::printf("n: %-12s %+.6f\n", term.c_str(), c);
}
