#include "semikernel/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace semikernel {

namespace {

std::mutex planMutex; // FFTW planning is not thread-safe

void runFft(GridFunction& u, int sign) {
    const int n = u.grid.n();
    std::vector<int> dims(u.grid.points.begin(), u.grid.points.end());
    auto* data = reinterpret_cast<fftw_complex*>(u.values.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planMutex);
        plan = fftw_plan_many_dft(n, dims.data(), u.m, data, nullptr, u.m, 1, data, nullptr, u.m,
                                  1, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planMutex);
        fftw_destroy_plan(plan);
    }
}

} // namespace

void fftForward(GridFunction& u) { runFft(u, FFTW_FORWARD); }

void fftInverse(GridFunction& u) {
    runFft(u, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(u.grid.total());
    for (auto& v : u.values) v *= scale;
}

double fftFrequency(const Grid& g, int k, long long i, bool halfShift) {
    const long long N = g.points[k];
    long long wrapped = i <= N / 2 - 1 ? i : i - N; // wrap to [-N/2, N/2)
    double base = std::numbers::pi / g.extents[k];  // fundamental 2 pi / (2 E)
    double z = base * static_cast<double>(wrapped);
    if (halfShift) z += 0.5 * base;
    return z;
}

void applyHalfShiftPhase(GridFunction& u, int sign) {
    const int n = u.grid.n();
    std::vector<std::vector<std::complex<double>>> phases(n);
    for (int k = 0; k < n; ++k) {
        phases[k].resize(u.grid.points[k]);
        double delta = 0.5 * std::numbers::pi / u.grid.extents[k];
        for (int i = 0; i < u.grid.points[k]; ++i)
            phases[k][i] = std::polar(1.0, sign * delta * u.grid.coord(k, i));
    }
    std::vector<long long> idx(n);
    for (long long p = 0; p < u.grid.total(); ++p) {
        u.grid.unflatten(p, idx);
        std::complex<double> ph = 1.0;
        for (int k = 0; k < n; ++k) ph *= phases[k][idx[k]];
        for (int c = 0; c < u.m; ++c) u.at(p, c) *= ph;
    }
}

} // namespace semikernel
