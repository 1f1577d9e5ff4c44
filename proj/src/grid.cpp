#include "semikernel/grid.hpp"

#include <cmath>
#include <fstream>

#include "semikernel/errors.hpp"

namespace semikernel {

void Grid::validate() const {
    if (extents.size() != points.size() || extents.empty())
        throw DomainError("grid extents/points size mismatch");
    for (double e : extents)
        if (!(e > 0.0)) throw DomainError("grid extents must be positive");
    for (int p : points)
        if (p < 8) throw DomainError("grid needs at least 8 points per axis");
}

long long Grid::flatten(std::span<const long long> idx) const {
    long long f = 0;
    for (int k = 0; k < n(); ++k) f = f * points[k] + idx[k];
    return f;
}

void Grid::unflatten(long long flat, std::span<long long> idx) const {
    for (int k = n() - 1; k >= 0; --k) {
        idx[k] = flat % points[k];
        flat /= points[k];
    }
}

GridFunction GridFunction::zeros(Grid g, int m) {
    g.validate();
    GridFunction u;
    u.grid = std::move(g);
    u.m = m;
    u.values.assign(u.grid.total() * m, {0.0, 0.0});
    return u;
}

GridFunction GridFunction::sample(Grid g, int m,
                                  const std::function<std::vector<std::complex<double>>(
                                      std::span<const double>)>& f) {
    GridFunction u = zeros(std::move(g), m);
    const int n = u.grid.n();
    std::vector<long long> idx(n, 0);
    std::vector<double> x(n);
    for (long long p = 0; p < u.grid.total(); ++p) {
        u.grid.unflatten(p, idx);
        for (int k = 0; k < n; ++k) x[k] = u.grid.coord(k, idx[k]);
        auto v = f(x);
        for (int c = 0; c < m; ++c) u.at(p, c) = v[c];
    }
    return u;
}

double GridFunction::maxAbs() const {
    double mx = 0.0;
    for (long long p = 0; p < grid.total(); ++p) {
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += std::norm(at(p, c));
        mx = std::max(mx, s);
    }
    return std::sqrt(mx);
}

double GridFunction::boundaryMaxAbs() const {
    const int n = grid.n();
    std::vector<long long> idx(n);
    double mx = 0.0;
    for (long long p = 0; p < grid.total(); ++p) {
        grid.unflatten(p, idx);
        bool onBoundary = false;
        for (int k = 0; k < n; ++k)
            if (idx[k] == 0 || idx[k] == grid.points[k] - 1) onBoundary = true;
        if (!onBoundary) continue;
        double s = 0.0;
        for (int c = 0; c < m; ++c) s += std::norm(at(p, c));
        mx = std::max(mx, s);
    }
    return std::sqrt(mx);
}

void GridFunction::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DomainError("cannot open " + path.string() + " for writing");
    os << "SKGF001\n";
    os << "n " << grid.n() << "\nm " << m << "\npoints";
    for (int p : grid.points) os << ' ' << p;
    os << "\nextents";
    char buf[64];
    for (double e : grid.extents) {
        std::snprintf(buf, sizeof buf, " %.17g", e);
        os << buf;
    }
    os << "\nlayout row-major interleaved-re-im\ndata\n";
    for (const auto& v : values) {
        double re = v.real(), im = v.imag();
        os.write(reinterpret_cast<const char*>(&re), sizeof re);
        os.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
}

GridFunction GridFunction::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DomainError("cannot open " + path.string());
    std::string magic;
    std::getline(is, magic);
    if (magic != "SKGF001") throw DomainError("bad grid function magic in " + path.string());
    std::string key;
    int n = 0, m = 0;
    is >> key >> n >> key >> m;
    GridFunction u;
    u.m = m;
    is >> key;
    u.grid.points.resize(n);
    for (int& p : u.grid.points) is >> p;
    is >> key;
    u.grid.extents.resize(n);
    for (double& e : u.grid.extents) is >> e;
    std::getline(is, key); // rest of extents line
    std::getline(is, key); // layout
    std::getline(is, key); // data
    u.grid.validate();
    u.values.resize(u.grid.total() * m);
    for (auto& v : u.values) {
        double re, im;
        is.read(reinterpret_cast<char*>(&re), sizeof re);
        is.read(reinterpret_cast<char*>(&im), sizeof im);
        v = {re, im};
    }
    if (!is) throw DomainError("truncated grid function file " + path.string());
    return u;
}

void GridFunction::exportCsv(const std::filesystem::path& path) const {
    const int n = grid.n();
    if (n > 2) throw DomainError("CSV export supports 1-D and 2-D grids only");
    std::ofstream os(path);
    if (!os) throw DomainError("cannot open " + path.string() + " for writing");
    os << (n == 1 ? "x0" : "x0,x1");
    for (int c = 0; c < m; ++c) os << ",re" << c << ",im" << c;
    os << "\n";
    std::vector<long long> idx(n);
    char buf[64];
    for (long long p = 0; p < grid.total(); ++p) {
        grid.unflatten(p, idx);
        for (int k = 0; k < n; ++k) {
            std::snprintf(buf, sizeof buf, "%.10g", grid.coord(k, idx[k]));
            os << (k ? "," : "") << buf;
        }
        for (int c = 0; c < m; ++c) {
            std::snprintf(buf, sizeof buf, ",%.10g,%.10g", at(p, c).real(), at(p, c).imag());
            os << buf;
        }
        os << "\n";
    }
}

} // namespace semikernel
