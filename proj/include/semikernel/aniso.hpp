#pragma once

#include <functional>
#include <span>
#include <vector>

#include "semikernel/multiindex.hpp"
#include "semikernel/rational.hpp"

namespace semikernel {

/// Quasi-homogeneous structure: orders lvec = (l_1,...,l_n), l = max_k l_k,
/// gamma_k = l/l_k stored exactly. Immutable after construction.
struct AnisoStructure {
    int n = 0;              // spatial dimension
    int m = 1;              // system size (vector length of the functions acted on)
    std::vector<int> orders;
    int ell = 0;            // l = max_k l_k
    std::vector<Rat> gamma;
    Rat gammaNorm;          // sum_k gamma_k

    static AnisoStructure fromOrders(const std::vector<int>& orders, int systemSize = 1);

    double sigma(std::span<const double> x) const;      // sum_k x_k^{2 l_k}
    double rho(std::span<const double> x) const;        // sigma(x)^{1/(2l)}
    std::vector<double> dilate(double t, std::span<const double> x) const;

    Rat dotGamma(const MultiIndex& alpha) const;
    double gammaD(int k) const { return toDouble(gamma[k]); }

    // All alpha with alpha.gamma <= r, ordered by (alpha.gamma, reverse-lex).
    // Comparisons are exact rational.
    std::vector<MultiIndex> enumerateIndices(const Rat& r) const;

    bool operator==(const AnisoStructure& other) const {
        return orders == other.orders && m == other.m;
    }
};

struct CutoffSpec {
    double R = 0.0; // psi = 1 where rho <= R
    double S = 1.0; // psi = 0 where rho >= S
};

/// Smooth cutoff psi(x) = h((sigma(x) - R^{2l}) / (S^{2l} - R^{2l})) with h the
/// standard exp(-1/t) transition. Smooth everywhere since sigma is polynomial.
class Cutoff {
public:
    Cutoff(AnisoStructure st, CutoffSpec spec);
    double operator()(std::span<const double> x) const;
    const CutoffSpec& spec() const { return spec_; }

private:
    AnisoStructure st_;
    CutoffSpec spec_;
    double lo_, hi_; // R^{2l}, S^{2l}
};

struct ShellQuadOptions {
    double absTol = 1e-8;
    double relTol = 1e-8;
    int maxDepth = 24;        // adaptive 1-D recursion depth per axis
    int maxDyadicShells = 64; // dyadic continuation toward 0 or infinity
};

/// Integral of f over the anisotropic shell {r <= rho(x) <= R}, 0 < r < R < inf.
/// Dimension-recursive: the innermost axis interval is solved exactly against
/// the shell, outer axes use adaptive Gauss-Kronrod.
double shellQuad(const AnisoStructure& st, const std::function<double(std::span<const double>)>& f,
                 double r, double R, const ShellQuadOptions& opts = {});

/// I(r,R,s) = integral of rho^s over {r <= rho <= R}. R may be infinity
/// (requires s < -|gamma|), r may be 0 (requires s > -|gamma|); violations
/// raise DivergenceError. Divergence at the borderline exponent is detected
/// from non-decaying dyadic shell sums, not from the closed-form criterion.
double shellIntegral(const AnisoStructure& st, double r, double R, double s,
                     const ShellQuadOptions& opts = {});

/// K(x,xi,eta) = integral of rho(x-y)^xi (1+rho(y))^eta dy under (conds):
/// xi+|gamma|>0, eta+|gamma|>0, xi+eta+|gamma|<0. Integrated over the three
/// regions split at the rho(x-y) singularity.
double kKernel(const AnisoStructure& st, std::span<const double> x, double xi, double eta,
               const ShellQuadOptions& opts = {});

} // namespace semikernel
