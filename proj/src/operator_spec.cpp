#include "semikernel/operator_spec.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "semikernel/errors.hpp"

namespace semikernel {

using namespace std::complex_literals;

OperatorSpec OperatorSpec::make(AnisoStructure st, std::map<MultiIndex, CMat> coeffs,
                                std::string name) {
    if (coeffs.empty()) throw DomainError("operator needs at least one coefficient");
    int m = static_cast<int>(coeffs.begin()->second.rows());
    for (const auto& [alpha, A] : coeffs) {
        if (alpha.dim() != st.n)
            throw DomainError("coefficient index " + alpha.str() + " has wrong dimension");
        for (int e : alpha.entries)
            if (e < 0) throw DomainError("multi-index entries must be nonnegative");
        if (A.rows() != m || A.cols() != m)
            throw DomainError("coefficient matrices must all be m x m");
        if (st.dotGamma(alpha) != Rat(st.ell))
            throw DomainError("coefficient index " + alpha.str() +
                              " violates alpha.gamma = l (exact rational check)");
    }
    // each unmixed derivative l_k e_k must appear with an invertible coefficient
    for (int k = 0; k < st.n; ++k) {
        MultiIndex unmixed = MultiIndex::unit(st.n, k, st.orders[k]);
        auto it = coeffs.find(unmixed);
        if (it == coeffs.end())
            throw DomainError("missing unmixed top-order term for axis " + std::to_string(k));
        Eigen::JacobiSVD<CMat> svd(it->second);
        double smin = svd.singularValues()(m - 1);
        double smax = svd.singularValues()(0);
        if (!(smin > 1e-12 * std::max(smax, 1.0)))
            throw DomainError("coefficient of unmixed term " + unmixed.str() +
                              " is not invertible");
    }
    OperatorSpec spec;
    spec.structure = std::move(st);
    spec.structure.m = m;
    spec.m = m;
    spec.coeffs = std::move(coeffs);
    spec.name = std::move(name);
    return spec;
}

namespace {

std::complex<double> monomial(std::span<const double> x, const MultiIndex& alpha) {
    std::complex<double> v = 1.0;
    for (int k = 0; k < alpha.dim(); ++k) {
        std::complex<double> ix(0.0, x[k]);
        for (int j = 0; j < alpha[k]; ++j) v *= ix;
    }
    return v;
}

} // namespace

CMat symbolEval(const OperatorSpec& spec, std::span<const double> x) {
    CMat L = CMat::Zero(spec.m, spec.m);
    for (const auto& [alpha, A] : spec.coeffs) L += monomial(x, alpha) * A;
    return L;
}

CMat symbolInverse(const OperatorSpec& spec, std::span<const double> x) {
    CMat L = symbolEval(spec, x);
    Eigen::FullPivLU<CMat> lu(L);
    if (!lu.isInvertible())
        throw SemiellipticityError("symbol is singular", std::vector<double>(x.begin(), x.end()));
    return lu.inverse();
}

CMat symbolDerivative(const OperatorSpec& spec, const MultiIndex& tau, std::span<const double> x) {
    CMat D = CMat::Zero(spec.m, spec.m);
    for (const auto& [alpha, A] : spec.coeffs) {
        // d^tau (ix)^alpha = i^{|alpha|} * prod alpha_k!/(alpha_k-tau_k)! x^{alpha-tau}
        bool vanish = false;
        double factor = 1.0;
        std::complex<double> mono = 1.0;
        for (int k = 0; k < spec.structure.n; ++k) {
            if (tau[k] > alpha[k]) {
                vanish = true;
                break;
            }
            for (int j = 0; j < tau[k]; ++j) factor *= (alpha[k] - j);
            for (int j = 0; j < alpha[k] - tau[k]; ++j) mono *= x[k];
        }
        if (vanish) continue;
        std::complex<double> ipow = std::pow(1.0i, alpha.order());
        D += ipow * factor * mono * A;
    }
    return D;
}

// --- shell sampling -------------------------------------------------------

namespace {

double radicalInverse(int base, int index) {
    double inv = 1.0 / base, result = 0.0, f = inv;
    while (index > 0) {
        result += f * (index % base);
        index /= base;
        f *= inv;
    }
    return result;
}

// inverse normal CDF (Acklam), plenty accurate for sampling directions
double invNormal(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    if (p > phigh) {
        q = std::sqrt(-2 * std::log(1 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

const int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19};

} // namespace

std::vector<std::vector<double>> shellSamples(const AnisoStructure& st, int count) {
    const int n = st.n;
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    if (n == 1) {
        pts.push_back({1.0});
        if (count > 1) pts.push_back({-1.0});
        return pts;
    }
    for (int i = 0; i < count; ++i) {
        std::vector<double> e(n);
        if (n == 2) {
            double th = 2.0 * std::numbers::pi * (i + 0.5) / count;
            e = {std::cos(th), std::sin(th)};
        } else {
            // Halton -> Gaussian -> normalize: deterministic quasi-uniform directions
            double norm2 = 0.0;
            for (int k = 0; k < n; ++k) {
                double u = radicalInverse(kPrimes[k % 8], i + 1);
                u = std::min(std::max(u, 1e-12), 1.0 - 1e-12);
                e[k] = invNormal(u);
                norm2 += e[k] * e[k];
            }
            double norm = std::sqrt(norm2);
            if (norm < 1e-12) {
                e.assign(n, 0.0);
                e[0] = 1.0;
            } else {
                for (double& v : e) v /= norm;
            }
        }
        double r = st.rho(e);
        pts.push_back(st.dilate(1.0 / r, e));
    }
    return pts;
}

namespace {

double smallestSingularValue(const CMat& L) {
    Eigen::JacobiSVD<CMat> svd(L);
    return svd.singularValues()(L.rows() - 1);
}

} // namespace

SymbolConstants checkSemielliptic(const OperatorSpec& spec, int samples, int refineIterations,
                                  double threshold) {
    if (samples < 1) throw DomainError("need at least one shell sample");
    const auto& st = spec.structure;
    SymbolConstants out;
    out.samples = samples;

    auto pts = shellSamples(st, samples);
    double bestSmin = std::numeric_limits<double>::infinity();
    std::vector<double> bestPt;
    out.c1 = std::numeric_limits<double>::infinity();
    out.c3 = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) {
        CMat L = symbolEval(spec, p);
        double nL = L.norm();
        out.c1 = std::min(out.c1, nL);
        out.c2 = std::max(out.c2, nL);
        double smin = smallestSingularValue(L);
        if (smin < bestSmin) {
            bestSmin = smin;
            bestPt = p;
        }
        if (smin > 1e-300) {
            Eigen::FullPivLU<CMat> lu(L);
            if (lu.isInvertible()) {
                double nI = lu.inverse().norm();
                out.c3 = std::min(out.c3, nI);
                out.c4 = std::max(out.c4, nI);
            }
        }
    }

    // local derivative-free refinement of the minimizer, re-projected to the shell
    std::vector<double> cur = bestPt;
    double curVal = bestSmin;
    double step = 0.5;
    for (int it = 0; it < refineIterations; ++it) {
        bool improved = false;
        for (int k = 0; k < st.n && !improved; ++k) {
            for (double sgn : {+1.0, -1.0}) {
                std::vector<double> cand = cur;
                cand[k] += sgn * step;
                double r = st.rho(cand);
                if (!(r > 0)) continue;
                cand = st.dilate(1.0 / r, cand);
                double v = smallestSingularValue(symbolEval(spec, cand));
                if (v < curVal) {
                    curVal = v;
                    cur = cand;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-12) break;
    }
    out.minSingularValue = curVal;
    out.worstPoint = cur;
    out.semielliptic = curVal >= threshold;
    return out;
}

OperatorSpec adjointOf(const OperatorSpec& spec) {
    std::map<MultiIndex, CMat> coeffs;
    for (const auto& [alpha, A] : spec.coeffs) {
        double sign = alpha.order() % 2 == 0 ? 1.0 : -1.0;
        coeffs[alpha] = sign * A.adjoint();
    }
    return OperatorSpec::make(spec.structure, std::move(coeffs),
                              spec.name.empty() ? "" : spec.name + "*");
}

std::vector<GrowthBoundRow> verifyGrowthBounds(const OperatorSpec& spec,
                                               const std::vector<MultiIndex>& alphas, int samples) {
    const auto& st = spec.structure;
    auto pts = shellSamples(st, samples);
    std::vector<GrowthBoundRow> rows;
    const double ell = st.ell;
    for (const auto& alpha : alphas) {
        GrowthBoundRow row;
        row.alpha = alpha;
        row.alphaDotGamma = st.dotGamma(alpha);
        if (row.alphaDotGamma > Rat(st.ell)) {
            // d^alpha L vanishes identically beyond the top anisotropic order
            row.identicallyZero = true;
            for (const auto& p : pts)
                row.supSymbol = std::max(row.supSymbol, symbolDerivative(spec, alpha, p).norm());
        } else {
            double ag = toDouble(row.alphaDotGamma);
            for (const auto& p : pts) {
                // on the shell rho = 1 so the rho powers are literal scale factors
                row.supSymbol = std::max(row.supSymbol, symbolDerivative(spec, alpha, p).norm());
                // finite differences for the inverse-symbol derivative
                CMat d = CMat::Zero(spec.m, spec.m);
                // nested central differences axis by axis
                std::function<CMat(std::vector<double>&, int)> fd = [&](std::vector<double>& y,
                                                                        int k) -> CMat {
                    if (k == st.n) return symbolInverse(spec, y);
                    CMat acc = CMat::Zero(spec.m, spec.m);
                    if (alpha[k] == 0) return fd(y, k + 1);
                    const double h = 1e-3;
                    // central difference of order alpha_k via binomial stencil
                    int a = alpha[k];
                    for (int j = 0; j <= a; ++j) {
                        double coeff = std::pow(-1.0, j);
                        double binom = 1.0;
                        for (int t = 0; t < j; ++t) binom = binom * (a - t) / (t + 1);
                        std::vector<double> yy = y;
                        yy[k] += (a / 2.0 - j) * h;
                        CMat inner = fd(yy, k + 1);
                        acc += coeff * binom * inner;
                    }
                    return acc / std::pow(h, a);
                };
                std::vector<double> y(p);
                d = fd(y, 0);
                row.supInverse = std::max(row.supInverse, d.norm() * std::pow(st.rho(p), ell + ag));
            }
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace semikernel
