#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace folio::testing {

// Brute force over every way of choosing which pooled positions belong to
// the first sample. Values must be distinct.
struct Enumerated {
    double u1 = 0;
    double p_greater = 0;
    double p_less = 0;
    double p_two_sided = 0;
};

inline Enumerated enumerate_exact(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double v) { return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin() + 1); };
    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    auto u_of = [&](const std::vector<bool>& in_a) {
        double r = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (in_a[i]) r += static_cast<double>(i + 1);
        return r - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    };
    double r1 = 0;
    for (double v : a) r1 += rank(v);
    Enumerated out;
    out.u1 = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const double u2 = static_cast<double>(n1 * n2) - out.u1;
    const double big = std::max(out.u1, u2);

    std::vector<bool> in_a(n, false);
    std::fill(in_a.end() - static_cast<std::ptrdiff_t>(n1), in_a.end(), true);
    double total = 0, ge = 0, le = 0, ge_big = 0;
    do {
        double u = u_of(in_a);
        total += 1;
        ge += u >= out.u1 ? 1 : 0;
        le += u <= out.u1 ? 1 : 0;
        ge_big += u >= big ? 1 : 0;
    } while (std::next_permutation(in_a.begin(), in_a.end()));
    out.p_greater = ge / total;
    out.p_less = le / total;
    out.p_two_sided = std::min(1.0, 2.0 * ge_big / total);
    return out;
}

}  // namespace folio::testing
