#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace semikernel {

/// Gauss-Legendre nodes/weights on [-1,1], computed once per order by Newton
/// iteration and cached.
inline const std::pair<std::vector<double>, std::vector<double>>& gaussRule(int n) {
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double p0, p1, dp;
        for (int iter = 0; iter < 100; ++iter) {
            p0 = 1.0;
            p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

/// q-th node/weight of the n-point rule mapped to [lo, hi].
inline std::pair<double, double> gaussNode(int n, int q, double lo, double hi) {
    const auto& [x, w] = gaussRule(n);
    double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    return {mid + half * x[q], half * w[q]};
}

} // namespace semikernel
