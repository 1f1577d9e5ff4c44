#pragma once

#include <complex>
#include <vector>

#include "semikernel/grid.hpp"

namespace semikernel {

/// Unnormalized forward / 1-over-N inverse n-D DFT of all m components of a
/// grid function (FFTW under the hood, component-strided).
void fftForward(GridFunction& u);
void fftInverse(GridFunction& u);

/// Standard DFT frequency for wrapped index i on axis k: 2 pi i' / (2 E_k),
/// plus pi/(2 E_k) when halfShift (so z = 0 is never on the lattice).
double fftFrequency(const Grid& g, int k, long long i, bool halfShift);

/// Multiply samples by prod_k exp(sign * i * pi x_k / (2 E_k)): the physical-
/// space half of moving to/from the half-shifted frequency lattice.
void applyHalfShiftPhase(GridFunction& u, int sign);

} // namespace semikernel
