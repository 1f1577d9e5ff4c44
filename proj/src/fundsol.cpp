#include "semikernel/fundsol.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <thread>

#include "semikernel/errors.hpp"
#include "semikernel/gauss.hpp"

namespace semikernel {

using std::numbers::pi;
using Cplx = std::complex<double>;

void QuadratureConfig::validate() const {
    if (!(sigmaCutoff >= 20.0))
        throw DomainError("sigmaCutoff must be >= 20 so the truncation error is <= 2e-9");
    if (innerNodesPerAxis < 8 || outerNodes < 8) throw DomainError("node counts must be >= 8");
    if (outerPanels < 1 || tailPanels < 1) throw DomainError("panel counts must be >= 1");
}

std::complex<double> gKernel(int k, double s, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    if (k < 1) throw DomainError("gKernel requires a positive integer k");
    if (!(t > 0.0)) throw DomainError("gKernel requires t > 0");
    const double B = std::pow(cfg.sigmaCutoff / t, 1.0 / (2.0 * k));
    double h = 2.0 * B / cfg.innerNodesPerAxis;
    if (s != 0.0) h = std::min(h, 2.0 * pi / (cfg.oscPointsPerWave * std::abs(s)));
    long long nn = std::llround(std::ceil(2.0 * B / h));
    nn = std::min<long long>(std::max<long long>(nn, cfg.innerNodesPerAxis),
                             cfg.maxInnerNodesPerAxis);
    h = 2.0 * B / static_cast<double>(nn);
    Cplx acc = 0.0, comp = 0.0;
    for (long long j = 0; j < nn; ++j) {
        double r = -B + (j + 0.5) * h;
        double damp = std::exp(-t * std::pow(r, 2 * k));
        Cplx term = std::polar(damp, s * r);
        Cplx y = term - comp;
        Cplx tmp = acc + y;
        comp = (tmp - acc) - y;
        acc = tmp;
    }
    return acc * h / (2.0 * pi);
}

// ---------------------------------------------------------------------------
// inner integral J_beta
// ---------------------------------------------------------------------------

namespace {

struct AxisTables {
    std::vector<double> z;            // node coordinates
    std::vector<double> sig;          // z^{2 l_k}
    std::vector<Cplx> phase;          // e^{i x_k z}
    // (iz)^p for every power p needed on this axis, indexed [power][node]
    std::map<int, std::vector<Cplx>> ipow;
    double weight = 0.0;              // node spacing
};

struct JPlan {
    std::vector<AxisTables> axes;
    std::vector<const CMat*> coeffA;        // operator coefficients, flattened
    std::vector<const MultiIndex*> coeffIdx;
    std::vector<MultiIndex> betas;
    double cutoff = 0.0; // Lambda / t
};

JPlan buildPlan(const OperatorSpec& spec, const std::vector<MultiIndex>& betas,
                std::span<const double> x, double t, const QuadratureConfig& cfg,
                double nodeScale) {
    const auto& st = spec.structure;
    JPlan plan;
    plan.betas = betas;
    plan.cutoff = cfg.sigmaCutoff / t;
    for (const auto& [alpha, A] : spec.coeffs) {
        plan.coeffIdx.push_back(&alpha);
        plan.coeffA.push_back(&A);
    }
    for (int k = 0; k < st.n; ++k) {
        AxisTables ax;
        const double B = std::pow(cfg.sigmaCutoff / t, 1.0 / (2.0 * st.orders[k]));
        double h = 2.0 * B / (cfg.innerNodesPerAxis * nodeScale);
        if (x[k] != 0.0)
            h = std::min(h, 2.0 * pi / (cfg.oscPointsPerWave * nodeScale * std::abs(x[k])));
        long long nn = std::llround(std::ceil(2.0 * B / h));
        nn = std::min<long long>(std::max<long long>(nn, 8), cfg.maxInnerNodesPerAxis);
        h = 2.0 * B / static_cast<double>(nn);
        ax.weight = h;
        ax.z.resize(nn);
        ax.sig.resize(nn);
        ax.phase.resize(nn);
        for (long long j = 0; j < nn; ++j) {
            double z = -B + (j + 0.5) * h;
            ax.z[j] = z;
            ax.sig[j] = std::pow(z, 2 * st.orders[k]);
            ax.phase[j] = std::polar(1.0, x[k] * z);
        }
        // powers needed on axis k: coefficient exponents and beta exponents
        std::vector<int> powers;
        for (const auto* a : plan.coeffIdx) powers.push_back((*a)[k]);
        for (const auto& b : betas) powers.push_back(b[k]);
        for (int p : powers) {
            if (ax.ipow.count(p)) continue;
            auto& tab = ax.ipow[p];
            tab.resize(nn);
            for (long long j = 0; j < nn; ++j) {
                Cplx iz(0.0, ax.z[j]);
                Cplx v = 1.0;
                for (int q = 0; q < p; ++q) v *= iz;
                tab[j] = v;
            }
        }
        plan.axes.push_back(std::move(ax));
    }
    return plan;
}

struct KahanMat {
    CMat sum, comp;
    explicit KahanMat(int m) : sum(CMat::Zero(m, m)), comp(CMat::Zero(m, m)) {}
    void add(const CMat& term) {
        CMat y = term - comp;
        CMat t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

std::vector<CMat> runPlan(const OperatorSpec& spec, const JPlan& plan, double t) {
    const auto& st = spec.structure;
    const int n = st.n;
    const int m = spec.m;
    const size_t nBeta = plan.betas.size();
    const size_t nCoeff = plan.coeffA.size();
    const bool scalar = m == 1;

    std::vector<KahanMat> acc(nBeta, KahanMat(m));
    std::vector<Cplx> scalarSum(nBeta, 0.0), scalarComp(nBeta, 0.0);

    // odometer over the outer n-1 axes; flat loop over the last axis
    std::vector<long long> idx(n, 0);
    std::vector<double> sigPartial(n + 1, 0.0);
    std::vector<Cplx> phasePartial(n + 1, 1.0);
    // per-coefficient and per-beta monomial partial products over outer axes
    std::vector<std::vector<Cplx>> coeffPartial(n + 1, std::vector<Cplx>(nCoeff, 1.0));
    std::vector<std::vector<Cplx>> betaPartial(n + 1, std::vector<Cplx>(nBeta, 1.0));

    const AxisTables& last = plan.axes[n - 1];
    const long long lastN = static_cast<long long>(last.z.size());
    double totalWeight = 1.0;
    for (const auto& ax : plan.axes) totalWeight *= ax.weight;

    CMat L(m, m), Minv(m, m);
    std::vector<const std::vector<Cplx>*> lastCoeffPow(nCoeff), lastBetaPow(nBeta);
    for (size_t c = 0; c < nCoeff; ++c) lastCoeffPow[c] = &last.ipow.at((*plan.coeffIdx[c])[n - 1]);
    for (size_t b = 0; b < nBeta; ++b) lastBetaPow[b] = &last.ipow.at(plan.betas[b][n - 1]);

    auto innerSweep = [&]() {
        const double sigOuter = sigPartial[n - 1];
        const Cplx phaseOuter = phasePartial[n - 1];
        const auto& coeffOuter = coeffPartial[n - 1];
        const auto& betaOuter = betaPartial[n - 1];
        for (long long j = 0; j < lastN; ++j) {
            double sigma = sigOuter + last.sig[j];
            if (sigma > plan.cutoff) continue;
            if (sigma == 0.0) continue; // integrand limit is zero at z=0
            double damp = sigma * std::exp(-t * sigma);
            Cplx phase = phaseOuter * last.phase[j];
            if (scalar) {
                Cplx Ls = 0.0;
                for (size_t c = 0; c < nCoeff; ++c)
                    Ls += coeffOuter[c] * (*lastCoeffPow[c])[j] * (*plan.coeffA[c])(0, 0);
                Cplx base = phase * (damp / Ls);
                for (size_t b = 0; b < nBeta; ++b) {
                    Cplx term = base * betaOuter[b] * (*lastBetaPow[b])[j];
                    Cplx y = term - scalarComp[b];
                    Cplx tt = scalarSum[b] + y;
                    scalarComp[b] = (tt - scalarSum[b]) - y;
                    scalarSum[b] = tt;
                }
            } else {
                L.setZero();
                for (size_t c = 0; c < nCoeff; ++c)
                    L += (coeffOuter[c] * (*lastCoeffPow[c])[j]) * (*plan.coeffA[c]);
                Minv = L.partialPivLu().inverse();
                Cplx base = phase * damp;
                for (size_t b = 0; b < nBeta; ++b)
                    acc[b].add((base * betaOuter[b] * (*lastBetaPow[b])[j]) * Minv);
            }
        }
    };

    // iterate outer axes
    std::function<void(int)> walk = [&](int k) {
        if (k == n - 1) {
            innerSweep();
            return;
        }
        const AxisTables& ax = plan.axes[k];
        for (long long j = 0; j < static_cast<long long>(ax.z.size()); ++j) {
            sigPartial[k + 1] = sigPartial[k] + ax.sig[j];
            if (sigPartial[k + 1] > plan.cutoff) continue;
            phasePartial[k + 1] = phasePartial[k] * ax.phase[j];
            for (size_t c = 0; c < nCoeff; ++c)
                coeffPartial[k + 1][c] =
                    coeffPartial[k][c] * ax.ipow.at((*plan.coeffIdx[c])[k])[j];
            for (size_t b = 0; b < nBeta; ++b)
                betaPartial[k + 1][b] = betaPartial[k][b] * ax.ipow.at(plan.betas[b][k])[j];
            walk(k + 1);
        }
    };
    walk(0);

    std::vector<CMat> out;
    out.reserve(nBeta);
    for (size_t b = 0; b < nBeta; ++b) {
        if (scalar) {
            CMat v(1, 1);
            v(0, 0) = scalarSum[b] * totalWeight;
            out.push_back(v);
        } else {
            out.push_back(acc[b].sum * totalWeight);
        }
    }
    return out;
}

} // namespace

std::vector<CMat> jEvalBatch(const OperatorSpec& spec, const std::vector<MultiIndex>& betas,
                             std::span<const double> x, double t, const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(t > 0.0)) throw DomainError("jEval requires t > 0");
    for (const auto& b : betas)
        if (b.dim() != spec.structure.n) throw DomainError("beta has wrong dimension");
    JPlan plan = buildPlan(spec, betas, x, t, cfg, 1.0);
    return runPlan(spec, plan, t);
}

CMat jEval(const OperatorSpec& spec, const MultiIndex& beta, std::span<const double> x, double t,
           const QuadratureConfig& cfg) {
    cfg.validate();
    if (!(t > 0.0)) throw DomainError("jEval requires t > 0");
    JPlan plan = buildPlan(spec, {beta}, x, t, cfg, 1.0);
    CMat coarse = runPlan(spec, plan, t)[0];
    JPlan fine = buildPlan(spec, {beta}, x, t, cfg, 1.4);
    CMat refined = runPlan(spec, fine, t)[0];
    double scale = std::max(refined.norm(), 1e-300);
    if ((refined - coarse).norm() > cfg.refineTolerance * std::max(scale, 1.0))
        throw AccuracyError("jEval did not converge between refinement levels");
    return refined;
}

// ---------------------------------------------------------------------------
// outer integral F_beta
// ---------------------------------------------------------------------------

std::vector<CMat> fEvalBatch(const OperatorSpec& spec, const std::vector<MultiIndex>& betas,
                             std::span<const double> x, const QuadratureConfig& cfg) {
    cfg.validate();
    const auto& st = spec.structure;
    if (st.gammaNorm <= Rat(st.ell))
        throw UnsupportedOperatorError("fEval requires |gamma| > l");
    const double r = st.rho(x);
    if (!(r > 0.0)) throw DomainError("fEval is undefined at x = 0");

    const int twoL = 2 * st.ell;
    const double T = cfg.splitScale * std::pow(r, twoL);
    std::vector<CMat> acc(betas.size(), CMat::Zero(spec.m, spec.m));

    auto addJ = [&](double t, double w) {
        auto J = jEvalBatch(spec, betas, x, t, cfg);
        for (size_t b = 0; b < betas.size(); ++b) acc[b] += w * J[b];
    };

    // part A: t in (0, T], substitution t = T s^{2l}, geometric panels in s
    for (int p = 0; p < cfg.outerPanels; ++p) {
        double lo = std::pow(2.0, -p - 1), hi = std::pow(2.0, -p);
        for (int q = 0; q < cfg.outerNodes; ++q) {
            auto [gs, gw] = gaussNode(cfg.outerNodes, q, lo, hi);
            double t = T * std::pow(gs, twoL);
            addJ(t, gw * twoL * T * std::pow(gs, twoL - 1));
        }
    }
    // part B: t in [T, inf), substitution t = T v^{-2l}, v in (0,1]
    for (int p = 0; p < cfg.tailPanels; ++p) {
        double lo = p + 1 == cfg.tailPanels ? 0.0 : std::pow(2.0, -p - 1);
        double hi = std::pow(2.0, -p);
        for (int q = 0; q < cfg.outerNodes; ++q) {
            auto [gv, gw] = gaussNode(cfg.outerNodes, q, lo, hi);
            double t = T * std::pow(gv, -twoL);
            addJ(t, gw * twoL * T * std::pow(gv, -twoL - 1));
        }
    }
    const double norm = std::pow(2.0 * pi, -st.n);
    for (auto& M : acc) M *= norm;
    return acc;
}

CMat fEval(const OperatorSpec& spec, const MultiIndex& beta, std::span<const double> x,
           const QuadratureConfig& cfg) {
    return fEvalBatch(spec, {beta}, x, cfg)[0];
}

// ---------------------------------------------------------------------------
// tabulation and homogeneity queries
// ---------------------------------------------------------------------------

std::uint64_t operatorHash(const OperatorSpec& spec) {
    std::string canon;
    for (int lk : spec.structure.orders) canon += std::to_string(lk) + ",";
    canon += "|m=" + std::to_string(spec.m) + "|";
    for (const auto& [alpha, A] : spec.coeffs) {
        canon += alpha.str() + ":";
        for (int i = 0; i < spec.m; ++i)
            for (int j = 0; j < spec.m; ++j) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g;", A(i, j).real(), A(i, j).imag());
                canon += buf;
            }
    }
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

namespace {

// Euclidean-unit representative on the dilation orbit of x: the unique t with
// |t^gamma x|_2 = 1. Monotone in t, solved by bisection.
std::vector<double> orbitDirection(const AnisoStructure& st, std::span<const double> x) {
    auto norm2 = [&](double t) {
        double s = 0.0;
        for (int k = 0; k < st.n; ++k) {
            double v = std::pow(t, st.gammaD(k)) * x[k];
            s += v * v;
        }
        return s;
    };
    double lo = 1.0, hi = 1.0;
    while (norm2(lo) > 1.0) lo *= 0.5;
    while (norm2(hi) < 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (norm2(mid) < 1.0 ? lo : hi) = mid;
    }
    return st.dilate(0.5 * (lo + hi), x);
}

} // namespace

CMat KernelTable::interpolateDirection(std::span<const double> e) const {
    if (st_.n == 2) {
        double th = std::atan2(e[1], e[0]);
        if (th < 0) th += 2.0 * pi;
        double pos = th / (2.0 * pi) * gridA_ - 0.5;
        double fl = std::floor(pos);
        double w = pos - fl;
        long i0 = (static_cast<long>(fl) % gridA_ + gridA_) % gridA_;
        long i1 = (i0 + 1) % gridA_;
        return (1.0 - w) * values_[i0] + w * values_[i1];
    }
    if (st_.n == 3) {
        double th = std::acos(std::clamp(e[2], -1.0, 1.0)); // polar in [0, pi]
        double ph = std::atan2(e[1], e[0]);
        if (ph < 0) ph += 2.0 * pi;
        double pa = th / pi * gridA_ - 0.5;
        double pb = ph / (2.0 * pi) * gridB_ - 0.5;
        long a0 = static_cast<long>(std::floor(pa));
        long b0 = static_cast<long>(std::floor(pb));
        double wa = pa - a0, wb = pb - b0;
        auto at = [&](long a, long b) -> const CMat& {
            a = std::clamp<long>(a, 0, gridA_ - 1); // clamp at poles
            b = (b % gridB_ + gridB_) % gridB_;
            return values_[a * gridB_ + b];
        };
        return (1 - wa) * ((1 - wb) * at(a0, b0) + wb * at(a0, b0 + 1)) +
               wa * ((1 - wb) * at(a0 + 1, b0) + wb * at(a0 + 1, b0 + 1));
    }
    throw DomainError("kernel tables support n = 2 or n = 3 only");
}

CMat KernelTable::query(std::span<const double> x) const {
    const double r = st_.rho(x);
    if (!(r > 0.0)) throw DomainError("kernel table query at x = 0");
    auto e = orbitDirection(st_, x);
    double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + (st_.n == 3 ? e[2] * e[2] : 0.0));
    for (auto& v : e) v /= en;
    return std::pow(r, exponent_) * interpolateDirection(e);
}

KernelTable kernelTabulate(const OperatorSpec& spec, const MultiIndex& beta, int shellSamples,
                           const QuadratureConfig& cfg, int threads) {
    cfg.validate();
    const auto& st = spec.structure;
    if (st.n != 2 && st.n != 3)
        throw DomainError("kernel tabulation supports n = 2 or n = 3 only");
    if (shellSamples < 4) throw DomainError("need at least 4 shell samples");

    KernelTable table;
    table.beta_ = beta;
    table.st_ = st;
    table.m_ = spec.m;
    table.specHash_ = operatorHash(spec);
    table.cfg_ = cfg;
    table.exponent_ = st.ell - toDouble(st.dotGamma(beta)) - toDouble(st.gammaNorm);

    std::vector<std::vector<double>> dirs;
    if (st.n == 2) {
        table.gridA_ = shellSamples;
        table.gridB_ = 1;
        for (int i = 0; i < shellSamples; ++i) {
            double th = 2.0 * pi * (i + 0.5) / shellSamples;
            dirs.push_back({std::cos(th), std::sin(th)});
        }
    } else {
        int na = std::max(4, static_cast<int>(std::lround(std::sqrt(shellSamples / 2.0))));
        int nb = 2 * na;
        table.gridA_ = na;
        table.gridB_ = nb;
        for (int a = 0; a < na; ++a)
            for (int b = 0; b < nb; ++b) {
                double th = pi * (a + 0.5) / na;
                double ph = 2.0 * pi * (b + 0.5) / nb;
                dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                std::cos(th)});
            }
    }

    const size_t total = dirs.size();
    table.shellPoints_.resize(total);
    table.values_.resize(total);
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= total) break;
            auto u = st.dilate(1.0 / st.rho(dirs[i]), dirs[i]);
            table.shellPoints_[i] = u;
            table.values_[i] = fEval(spec, beta, u, cfg);
        }
    };
    int nw = std::max(1, threads);
    if (nw == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& u : table.shellPoints_)
        if (std::abs(st.rho(u) - 1.0) > 1e-12)
            throw AccuracyError("tabulated shell point drifted off rho = 1");
    return table;
}

AnnihilationReport verifyAnnihilation(const OperatorSpec& spec,
                                      const std::map<MultiIndex, KernelTable>& tables,
                                      const std::vector<std::vector<double>>& points) {
    AnnihilationReport rep;
    for (const auto& x : points) {
        CMat acc = CMat::Zero(spec.m, spec.m);
        for (const auto& [alpha, A] : spec.coeffs) {
            auto it = tables.find(alpha);
            if (it == tables.end())
                throw DomainError("missing derivative kernel table for " + alpha.str());
            CMat Fa = it->second.query(x);
            rep.maxKernelNorm = std::max(rep.maxKernelNorm, Fa.norm());
            acc += A * Fa;
        }
        rep.maxResidual = std::max(rep.maxResidual, acc.norm());
    }
    return rep;
}

// ---------------------------------------------------------------------------
// serialization: magic, JSON-free textual header, raw little-endian doubles
// ---------------------------------------------------------------------------

void KernelTable::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot open " + path.string() + " for writing");
    os << "SKTB001\n";
    os << "n " << st_.n << "\nm " << m_ << "\n";
    os << "orders";
    for (int lk : st_.orders) os << ' ' << lk;
    os << "\nbeta";
    for (int b : beta_.entries) os << ' ' << b;
    char buf[340];
    std::snprintf(buf, sizeof buf,
                  "\nspec_hash %llu\nexponent %.17g\ngrid %d %d\n"
                  "cfg %.17g %d %d %d %d %.17g %lld %.17g %.17g\n",
                  static_cast<unsigned long long>(specHash_), exponent_, gridA_, gridB_,
                  cfg_.sigmaCutoff, cfg_.innerNodesPerAxis, cfg_.outerNodes, cfg_.outerPanels,
                  cfg_.tailPanels, cfg_.oscPointsPerWave, cfg_.maxInnerNodesPerAxis,
                  cfg_.splitScale, cfg_.refineTolerance);
    os << buf;
    os << "count " << values_.size() << "\ndata\n";
    auto writeDouble = [&](double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); };
    for (const auto& p : shellPoints_)
        for (double v : p) writeDouble(v);
    for (const auto& M : values_)
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j) {
                writeDouble(M(i, j).real());
                writeDouble(M(i, j).imag());
            }
}

KernelTable KernelTable::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DomainError("cannot open " + path.string());
    std::string magic;
    std::getline(is, magic);
    if (magic != "SKTB001") throw DomainError("bad kernel table magic in " + path.string());
    KernelTable t;
    std::string key;
    int n = 0;
    is >> key >> n;
    is >> key >> t.m_;
    is >> key; // orders
    std::vector<int> orders(n);
    for (int& v : orders) is >> v;
    t.st_ = AnisoStructure::fromOrders(orders, t.m_);
    is >> key; // beta
    t.beta_.entries.resize(n);
    for (int& v : t.beta_.entries) is >> v;
    unsigned long long h;
    is >> key >> h;
    t.specHash_ = h;
    is >> key >> t.exponent_;
    is >> key >> t.gridA_ >> t.gridB_;
    is >> key >> t.cfg_.sigmaCutoff >> t.cfg_.innerNodesPerAxis >> t.cfg_.outerNodes >>
        t.cfg_.outerPanels >> t.cfg_.tailPanels >> t.cfg_.oscPointsPerWave >>
        t.cfg_.maxInnerNodesPerAxis >> t.cfg_.splitScale >> t.cfg_.refineTolerance;
    size_t count;
    is >> key >> count;
    is >> key; // data
    is.get(); // newline
    auto readDouble = [&]() {
        double v;
        is.read(reinterpret_cast<char*>(&v), sizeof v);
        return v;
    };
    t.shellPoints_.assign(count, std::vector<double>(n));
    for (auto& p : t.shellPoints_)
        for (double& v : p) v = readDouble();
    t.values_.assign(count, CMat(t.m_, t.m_));
    for (auto& M : t.values_)
        for (int i = 0; i < t.m_; ++i)
            for (int j = 0; j < t.m_; ++j) {
                double re = readDouble();
                double im = readDouble();
                M(i, j) = Cplx(re, im);
            }
    if (!is) throw DomainError("truncated kernel table file " + path.string());
    return t;
}

} // namespace semikernel
