#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semikernel/aniso.hpp"

namespace semikernel {

using CMat = Eigen::MatrixXcd;

/// Constant-coefficient operator L u = sum_{alpha.gamma = l} A_alpha d^alpha u.
/// Keys are validated exactly (rational alpha.gamma == l) and each unmixed
/// top-order key l_k e_k must be present with an invertible coefficient.
struct OperatorSpec {
    AnisoStructure structure;
    int m = 1;
    std::map<MultiIndex, CMat> coeffs;
    std::string name; // optional identifier for reports

    static OperatorSpec make(AnisoStructure st, std::map<MultiIndex, CMat> coeffs,
                             std::string name = "");
};

/// L(x) = sum A_alpha (ix)^alpha.
CMat symbolEval(const OperatorSpec& spec, std::span<const double> x);

/// L(x)^{-1} by dense solve; throws SemiellipticityError when L(x) is singular.
CMat symbolInverse(const OperatorSpec& spec, std::span<const double> x);

/// Exact derivative d^tau L of the matrix polynomial (term-wise power rule).
CMat symbolDerivative(const OperatorSpec& spec, const MultiIndex& tau, std::span<const double> x);

struct SymbolConstants {
    double c1 = 0, c2 = 0; // extrema of |L| (Frobenius) on the shell rho=1
    double c3 = 0, c4 = 0; // extrema of |L^{-1}|
    double minSingularValue = 0;
    std::vector<double> worstPoint; // argmin of the smallest singular value
    bool semielliptic = false;
    int samples = 0;
};

/// Minimizes the smallest singular value of L over a deterministic quasi-uniform
/// sample of the shell rho=1, then refines locally (derivative-free, fixed
/// iteration budget). Certification is up to sampling density only.
SymbolConstants checkSemielliptic(const OperatorSpec& spec, int samples,
                                  int refineIterations = 200, double threshold = 1e-10);

/// Adjoint operator: coefficients (-1)^{|alpha|} A_alpha^*.
OperatorSpec adjointOf(const OperatorSpec& spec);

struct GrowthBoundRow {
    MultiIndex alpha;
    Rat alphaDotGamma;
    bool identicallyZero = false; // alpha.gamma > l case of the derivative bound
    double supSymbol = 0;         // sup |d^a L| rho^{a.g - l} over shell samples
    double supInverse = 0;        // sup |d^a L^{-1}| rho^{l + a.g} (finite differences)
};

std::vector<GrowthBoundRow> verifyGrowthBounds(const OperatorSpec& spec,
                                               const std::vector<MultiIndex>& alphas, int samples);

/// Deterministic quasi-uniform points on the anisotropic shell rho = 1.
std::vector<std::vector<double>> shellSamples(const AnisoStructure& st, int count);

} // namespace semikernel
