#pragma once

#include <compare>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace semikernel {

// Multi-index alpha = (alpha_1, ..., alpha_n) of nonnegative integers.
struct MultiIndex {
    std::vector<int> entries;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> e) : entries(std::move(e)) {}
    MultiIndex(std::initializer_list<int> e) : entries(e) {}

    static MultiIndex zero(int n) { return MultiIndex(std::vector<int>(n, 0)); }
    static MultiIndex unit(int n, int k, int value = 1) {
        MultiIndex a = zero(n);
        a.entries[k] = value;
        return a;
    }

    int dim() const { return static_cast<int>(entries.size()); }
    int operator[](int k) const { return entries[k]; }
    int& operator[](int k) { return entries[k]; }

    // |alpha| = alpha_1 + ... + alpha_n
    int order() const { return std::accumulate(entries.begin(), entries.end(), 0); }

    MultiIndex plus(const MultiIndex& other) const {
        MultiIndex r = *this;
        for (int k = 0; k < dim(); ++k) r.entries[k] += other.entries[k];
        return r;
    }

    bool operator==(const MultiIndex& other) const = default;
    auto operator<=>(const MultiIndex& other) const { return entries <=> other.entries; }

    std::string str() const;
};

} // namespace semikernel
