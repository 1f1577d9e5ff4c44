#pragma once

#include "semikernel/fundsol.hpp"
#include "semikernel/grid.hpp"
#include "semikernel/operator_spec.hpp"

namespace semikernel {

/// Frequency lattice for the spectral operations. `standard` contains z = 0
/// (constants are annihilated exactly); `halfShifted` is the solver lattice,
/// on which no mode requires inverting L(0).
enum class Lattice { standard, halfShifted };

/// L u = sum A_alpha d^alpha u with spectral (discrete Fourier) derivatives.
GridFunction applyOperator(const OperatorSpec& spec, const GridFunction& u,
                           Lattice lattice = Lattice::standard);

struct SolveReport {
    double boundaryMax = 0.0;   // measured |f| on the box boundary
    bool decayWarning = false;  // boundary magnitude above the 1e-10 contract
};

/// u ~ Sf: transform f, multiply each mode by L(z)^{-1} on the half-shifted
/// lattice, transform back. Requires |gamma| > l and a semielliptic spec.
GridFunction solveFourier(const OperatorSpec& spec, const GridFunction& f,
                          SolveReport* report = nullptr);

struct ConvolutionConfig {
    int imagesPerAxis = 3;     // signed image sum for the lattice periodization
    int eulerDepth = 3;        // averaging passes accelerating the image series
    double avgRadiusHigh = 2.0; // rho(offset) below which cells get the fine rule
    double avgRadiusMid = 5.0;  // ... the coarse cell-average rule
    int gaussHigh = 12;
    int gaussMid = 4;
};

/// u = F * f as a direct discrete convolution, kernel queried from the table
/// and made consistent with the solver lattice by a signed image sum; the
/// singular cells near offset 0 are cell-averaged by local quadrature.
GridFunction solveConvolution(const OperatorSpec& spec, const GridFunction& f,
                              const KernelTable& table, const ConvolutionConfig& cfg = {},
                              SolveReport* report = nullptr);

/// sup-norm of (L u - f) over the interior 80% of the box.
double residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& f,
                Lattice lattice = Lattice::standard);

/// Default anisotropic grid for a spec: extent_k = halfWidth^{gamma_k}.
Grid defaultGrid(const OperatorSpec& spec, double halfWidth, int pointsPerAxis);

} // namespace semikernel
