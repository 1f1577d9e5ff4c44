#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace semikernel {

/// Uniform tensor grid on the box prod_k [-extent_k, extent_k), points
/// x_k(i) = -extent_k + i * h_k with h_k = 2 extent_k / points_k.
struct Grid {
    std::vector<double> extents;
    std::vector<int> points;

    int n() const { return static_cast<int>(extents.size()); }
    double h(int k) const { return 2.0 * extents[k] / points[k]; }
    double coord(int k, long long i) const { return -extents[k] + i * h(k); }
    long long total() const {
        long long t = 1;
        for (int p : points) t *= p;
        return t;
    }
    double cellVolume() const {
        double v = 1.0;
        for (int k = 0; k < n(); ++k) v *= h(k);
        return v;
    }
    void validate() const;
    bool operator==(const Grid&) const = default;

    /// row-major flat index <-> per-axis indices
    long long flatten(std::span<const long long> idx) const;
    void unflatten(long long flat, std::span<long long> idx) const;
};

/// Complex m-vector samples on a Grid; values laid out point-major
/// (row-major over axes), components innermost.
struct GridFunction {
    Grid grid;
    int m = 1;
    std::vector<std::complex<double>> values;

    static GridFunction zeros(Grid g, int m = 1);
    /// sample a callable f(x) -> vector<complex> (size m) on every grid point
    static GridFunction sample(Grid g, int m,
                               const std::function<std::vector<std::complex<double>>(
                                   std::span<const double>)>& f);

    std::complex<double>& at(long long point, int comp) { return values[point * m + comp]; }
    const std::complex<double>& at(long long point, int comp) const {
        return values[point * m + comp];
    }

    double maxAbs() const;
    /// max Euclidean norm of the m-vector over boundary faces (outermost cells)
    double boundaryMaxAbs() const;

    void save(const std::filesystem::path& path) const;
    static GridFunction load(const std::filesystem::path& path);
    /// CSV export of 1-D or 2-D data (real and imaginary parts per component)
    void exportCsv(const std::filesystem::path& path) const;
};

} // namespace semikernel
