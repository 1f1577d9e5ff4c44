#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "semikernel/operator_spec.hpp"

namespace semikernel {

struct QuadratureConfig {
    double sigmaCutoff = 34.0;      // Lambda: truncate where sigma(z) > Lambda/t
    int innerNodesPerAxis = 48;     // base midpoint nodes per axis
    int outerNodes = 12;            // Gauss-Legendre nodes per outer panel
    int outerSubstitutionExponent = 0; // fixed at 2l; 0 means "derive from spec"
    int outerPanels = 6;            // geometric panels in s on (0,1]
    int tailPanels = 3;             // panels in v for the t >= T tail
    double oscPointsPerWave = 6.0;  // oscillation sampling rule for e^{ix.z}
    long long maxInnerNodesPerAxis = 1 << 21;
    double splitScale = 1.0;        // T = splitScale * rho(x)^{2l}
    double refineTolerance = 1e-7;  // accepted relative drift between refinement levels

    void validate() const;
};

/// g_k(s,t) = (2 pi)^{-1} int e^{isr} e^{-t r^{2k}} dr, truncated where t r^{2k} > Lambda.
std::complex<double> gKernel(int k, double s, double t, const QuadratureConfig& cfg = {});

/// J_beta(x,t) = int e^{ix.z} (iz)^beta sigma(z) e^{-t sigma(z)} L(z)^{-1} dz
/// over the truncated box sigma(z) <= Lambda/t. The z=0 node is the (zero) limit.
CMat jEval(const OperatorSpec& spec, const MultiIndex& beta, std::span<const double> x, double t,
           const QuadratureConfig& cfg = {});

/// Shared-node evaluation for several beta at once (same integrand sweep).
std::vector<CMat> jEvalBatch(const OperatorSpec& spec, const std::vector<MultiIndex>& betas,
                             std::span<const double> x, double t, const QuadratureConfig& cfg = {});

/// F_beta(x) = (2 pi)^{-n} int_0^inf J_beta(x,t) dt, outer substitution
/// t = rho(x)^{2l} s^{2l}; the inner z-integral is always evaluated first.
CMat fEval(const OperatorSpec& spec, const MultiIndex& beta, std::span<const double> x,
           const QuadratureConfig& cfg = {});

std::vector<CMat> fEvalBatch(const OperatorSpec& spec, const std::vector<MultiIndex>& betas,
                             std::span<const double> x, const QuadratureConfig& cfg = {});

/// F_beta tabulated on the shell rho=1 and extended everywhere by the exact
/// homogeneity F_beta(s^gamma x) = s^{l - beta.gamma - |gamma|} F_beta(x).
class KernelTable {
public:
    KernelTable() = default;

    const MultiIndex& beta() const { return beta_; }
    int n() const { return st_.n; }
    int m() const { return m_; }
    double homogeneityExponent() const { return exponent_; }
    const AnisoStructure& structure() const { return st_; }
    std::uint64_t specHash() const { return specHash_; }
    int shellSampleCount() const { return static_cast<int>(values_.size()); }
    const std::vector<std::vector<double>>& shellPoints() const { return shellPoints_; }
    const std::vector<CMat>& values() const { return values_; }

    /// Value at arbitrary x != 0: interpolate on the shell, scale by
    /// rho(x)^{l - beta.gamma - |gamma|}.
    CMat query(std::span<const double> x) const;

    void save(const std::filesystem::path& path) const;
    static KernelTable load(const std::filesystem::path& path);

    friend KernelTable kernelTabulate(const OperatorSpec&, const MultiIndex&, int,
                                      const QuadratureConfig&, int);

private:
    MultiIndex beta_;
    AnisoStructure st_;
    int m_ = 1;
    double exponent_ = 0.0;
    std::uint64_t specHash_ = 0;
    QuadratureConfig cfg_;
    // n==2: values on uniform direction angles; n==3: lat-long direction grid
    int gridA_ = 0, gridB_ = 0;
    std::vector<std::vector<double>> shellPoints_;
    std::vector<CMat> values_;

    CMat interpolateDirection(std::span<const double> unitDirection) const;
};

KernelTable kernelTabulate(const OperatorSpec& spec, const MultiIndex& beta, int shellSamples,
                           const QuadratureConfig& cfg = {}, int threads = 1);

struct AnnihilationReport {
    double maxResidual = 0.0;   // max Frobenius norm of sum_a A_a F_a(x)
    double maxKernelNorm = 0.0; // max |F_a(x)| over terms and points
};

/// Evaluates sum over alpha of A_alpha F_alpha(x) from per-alpha derivative
/// tables (beta = alpha) at the given nonzero points.
AnnihilationReport verifyAnnihilation(const OperatorSpec& spec,
                                      const std::map<MultiIndex, KernelTable>& tables,
                                      const std::vector<std::vector<double>>& points);

/// FNV-1a hash of the canonical operator serialization (orders, m, coefficients).
std::uint64_t operatorHash(const OperatorSpec& spec);

} // namespace semikernel
