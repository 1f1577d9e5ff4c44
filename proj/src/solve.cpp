#include "semikernel/solve.hpp"

#include <cmath>

#include "semikernel/errors.hpp"
#include "semikernel/fft.hpp"
#include "semikernel/gauss.hpp"

namespace semikernel {

namespace {

void checkGridDim(const OperatorSpec& spec, const GridFunction& u) {
    if (u.grid.n() != spec.structure.n)
        throw DomainError("grid dimension does not match the operator");
    if (u.m != spec.m) throw DomainError("grid function has wrong system size");
}

// multiply each frequency mode by a matrix-valued multiplier M(z)
template <typename MultiplierFn>
void applyMultiplier(GridFunction& uh, bool halfShift, const MultiplierFn& mult) {
    const int n = uh.grid.n();
    const int m = uh.m;
    std::vector<long long> idx(n);
    std::vector<double> z(n);
    Eigen::VectorXcd vec(m), out(m);
    for (long long p = 0; p < uh.grid.total(); ++p) {
        uh.grid.unflatten(p, idx);
        for (int k = 0; k < n; ++k) z[k] = fftFrequency(uh.grid, k, idx[k], halfShift);
        for (int c = 0; c < m; ++c) vec(c) = uh.at(p, c);
        mult(z, vec, out);
        for (int c = 0; c < m; ++c) uh.at(p, c) = out(c);
    }
}

} // namespace

GridFunction applyOperator(const OperatorSpec& spec, const GridFunction& u, Lattice lattice) {
    checkGridDim(spec, u);
    GridFunction w = u;
    const bool shifted = lattice == Lattice::halfShifted;
    if (shifted) applyHalfShiftPhase(w, -1);
    fftForward(w);
    applyMultiplier(w, shifted,
                    [&](std::span<const double> z, const Eigen::VectorXcd& in,
                        Eigen::VectorXcd& out) { out = symbolEval(spec, z) * in; });
    fftInverse(w);
    if (shifted) applyHalfShiftPhase(w, +1);
    return w;
}

GridFunction solveFourier(const OperatorSpec& spec, const GridFunction& f, SolveReport* report) {
    checkGridDim(spec, f);
    if (spec.structure.gammaNorm <= Rat(spec.structure.ell))
        throw UnsupportedOperatorError("solver requires |gamma| > l");
    SolveReport rep;
    rep.boundaryMax = f.boundaryMaxAbs();
    rep.decayWarning = rep.boundaryMax > 1e-10 * std::max(f.maxAbs(), 1e-300);
    if (report) *report = rep;

    GridFunction u = f;
    applyHalfShiftPhase(u, -1);
    fftForward(u);
    applyMultiplier(u, true,
                    [&](std::span<const double> z, const Eigen::VectorXcd& in,
                        Eigen::VectorXcd& out) {
                        CMat L = symbolEval(spec, z);
                        out = L.partialPivLu().solve(in);
                    });
    fftInverse(u);
    applyHalfShiftPhase(u, +1);
    return u;
}

// ---------------------------------------------------------------------------
// direct convolution with the tabulated kernel
// ---------------------------------------------------------------------------

namespace {

// Antiperiodized kernel value at a physical offset: signed image sum per axis,
// accelerated by repeated averaging of the partial sums (the image series along
// slowly decaying axes is alternating with slowly varying terms).
CMat antiperiodizedKernel(const KernelTable& table, const Grid& g,
                          const std::vector<double>& offset, const ConvolutionConfig& cfg) {
    const int n = g.n();
    const int M = cfg.imagesPerAxis;
    // recursion over axes: at axis k, build partial sums in the image count
    std::function<CMat(int, std::vector<double>&)> level = [&](int k,
                                                               std::vector<double>& w) -> CMat {
        if (k == n) return table.query(w);
        std::vector<CMat> partial;
        CMat acc;
        for (int j = 0; j <= M; ++j) {
            double sign = j % 2 == 0 ? 1.0 : -1.0;
            w[k] = offset[k] + 2.0 * g.extents[k] * j;
            CMat term = sign * level(k + 1, w);
            if (j > 0) {
                w[k] = offset[k] - 2.0 * g.extents[k] * j;
                term += sign * level(k + 1, w);
            }
            acc = j == 0 ? term : CMat(acc + term);
            partial.push_back(acc);
        }
        w[k] = offset[k];
        for (int e = 0; e < cfg.eulerDepth && partial.size() > 1; ++e) {
            for (size_t i = 0; i + 1 < partial.size(); ++i)
                partial[i] = 0.5 * (partial[i] + partial[i + 1]);
            partial.pop_back();
        }
        return partial.back();
    };
    std::vector<double> w(offset);
    return level(0, w);
}

} // namespace

GridFunction solveConvolution(const OperatorSpec& spec, const GridFunction& f,
                              const KernelTable& table, const ConvolutionConfig& cfg,
                              SolveReport* report) {
    checkGridDim(spec, f);
    if (table.beta().order() != 0) throw DomainError("convolution needs the beta = 0 table");
    if (table.specHash() != operatorHash(spec))
        throw DomainError("kernel table was tabulated for a different operator");
    SolveReport rep;
    rep.boundaryMax = f.boundaryMaxAbs();
    rep.decayWarning = rep.boundaryMax > 1e-10 * std::max(f.maxAbs(), 1e-300);
    if (report) *report = rep;

    const Grid& g = f.grid;
    const int n = g.n();
    const int m = f.m;
    const auto& st = spec.structure;

    // kernel samples at offsets in prod_k [0, 2 E_k): the negacyclic-consistent
    // sampling of the antiperiodic kernel
    GridFunction K = GridFunction::zeros(g, m * m);
    std::vector<long long> idx(n);
    std::vector<double> off(n), offMin(n);
    for (long long p = 0; p < g.total(); ++p) {
        g.unflatten(p, idx);
        for (int k = 0; k < n; ++k) {
            off[k] = idx[k] * g.h(k); // offset in [0, 2E)
            offMin[k] = off[k] > g.extents[k] ? off[k] - 2.0 * g.extents[k] : off[k];
        }
        double rMin = st.rho(offMin);
        CMat val;
        if (rMin <= cfg.avgRadiusMid) {
            // graded cell average: the kernel varies at sub-cell scale here
            int rule = rMin <= cfg.avgRadiusHigh ? cfg.gaussHigh : cfg.gaussMid;
            val = CMat::Zero(m, m);
            std::vector<double> y(n);
            std::vector<int> q(n, 0);
            for (;;) {
                double wgt = 1.0;
                for (int k = 0; k < n; ++k) {
                    auto [gx, gw] = gaussNode(rule, q[k], -0.5 * g.h(k), 0.5 * g.h(k));
                    y[k] = off[k] + gx;
                    wgt *= gw / g.h(k);
                }
                val += wgt * antiperiodizedKernel(table, g, y, cfg);
                int k = n - 1;
                while (k >= 0 && ++q[k] == rule) q[k--] = 0;
                if (k < 0) break;
            }
        } else {
            val = antiperiodizedKernel(table, g, off, cfg);
        }
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) K.at(p, i * m + j) = val(i, j);
    }

    // negacyclic convolution via the half-shifted lattice: kernel and data are
    // phased, multiplied mode-by-mode (matrix times vector), unphased
    GridFunction Kh = K;
    applyHalfShiftPhase(Kh, -1);
    fftForward(Kh);
    GridFunction u = f;
    applyHalfShiftPhase(u, -1);
    fftForward(u);
    Eigen::MatrixXcd Km(m, m);
    Eigen::VectorXcd vin(m);
    for (long long p = 0; p < g.total(); ++p) {
        for (int i = 0; i < m; ++i) {
            vin(i) = u.at(p, i);
            for (int j = 0; j < m; ++j) Km(i, j) = Kh.at(p, i * m + j);
        }
        Eigen::VectorXcd vout = Km * vin;
        for (int i = 0; i < m; ++i) u.at(p, i) = vout(i);
    }
    fftInverse(u);
    applyHalfShiftPhase(u, +1);
    // the product of two phased transforms leaves a factor i per axis behind
    std::complex<double> corr = 1.0;
    for (int k = 0; k < n; ++k) corr *= std::complex<double>(0.0, -1.0);
    corr *= g.cellVolume();
    for (auto& v : u.values) v *= corr;
    return u;
}

double residual(const OperatorSpec& spec, const GridFunction& u, const GridFunction& f,
                Lattice lattice) {
    if (!(u.grid == f.grid) || u.m != f.m) throw DomainError("residual needs matching grids");
    GridFunction Lu = applyOperator(spec, u, lattice);
    const Grid& g = u.grid;
    const int n = g.n();
    std::vector<long long> idx(n);
    double mx = 0.0;
    for (long long p = 0; p < g.total(); ++p) {
        g.unflatten(p, idx);
        bool interior = true;
        for (int k = 0; k < n; ++k) {
            long long margin = g.points[k] / 10;
            if (idx[k] < margin || idx[k] >= g.points[k] - margin) interior = false;
        }
        if (!interior) continue;
        double s = 0.0;
        for (int c = 0; c < u.m; ++c) s += std::norm(Lu.at(p, c) - f.at(p, c));
        mx = std::max(mx, std::sqrt(s));
    }
    return mx;
}

Grid defaultGrid(const OperatorSpec& spec, double halfWidth, int pointsPerAxis) {
    Grid g;
    const auto& st = spec.structure;
    for (int k = 0; k < st.n; ++k) {
        g.extents.push_back(std::pow(halfWidth, st.gammaD(k)));
        g.points.push_back(pointsPerAxis);
    }
    g.validate();
    return g;
}

} // namespace semikernel
