#include "folio/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

namespace folio::eval {
namespace {

// Upper tail of the standard normal.
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<double>(), p); }

// c[0] + c[1] x + c[2] x^2 + ...
double poly(std::initializer_list<double> c, double x) {
    double out = 0.0;
    double pw = 1.0;
    for (double k : c) {
        out += k * pw;
        pw *= x;
    }
    return out;
}

double clip01(double p) { return std::clamp(p, 0.0, 1.0); }

double mean(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string_view to_string(Alternative a) {
    switch (a) {
        case Alternative::two_sided: return "two_sided";
        case Alternative::greater: return "greater";
        case Alternative::less: return "less";
    }
    return "two_sided";
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::mann_whitney_exact: return "mann_whitney_exact";
        case Method::mann_whitney_normal_approx: return "mann_whitney_normal_approx";
        case Method::shapiro_wilk: return "shapiro_wilk";
    }
    return "mann_whitney_exact";
}

Alternative alternative_from_string(std::string_view s) {
    if (s == "two_sided" || s == "two-sided") return Alternative::two_sided;
    if (s == "greater") return Alternative::greater;
    if (s == "less") return Alternative::less;
    throw ValidationError("InvalidAlternative", "unknown alternative '" + std::string(s) + "'");
}

RankData rank_with_ties(std::span<const double> values) {
    if (values.empty()) throw EmptyInput("cannot rank an empty sample");
    RankData r;
    r.values.assign(values.begin(), values.end());
    r.ranks.assign(values.size(), 0.0);
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        // Positions i..j share the average of ranks i+1..j+1.
        double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) r.ranks[order[k]] = avg;
        if (j > i) r.tie_groups.push_back(j - i + 1);
        i = j + 1;
    }
    return r;
}

std::vector<double> u_distribution(std::size_t n1, std::size_t n2) {
    // f[m][n][u]: arrangements of m + n values with U = u. The largest value
    // belongs either to the first sample (adding n to U) or to the second.
    const std::size_t max_u = n1 * n2;
    std::vector<std::vector<std::vector<double>>> f(
        n1 + 1, std::vector<std::vector<double>>(n2 + 1, std::vector<double>(max_u + 1, 0.0)));
    for (std::size_t m = 0; m <= n1; ++m) {
        for (std::size_t n = 0; n <= n2; ++n) {
            if (m == 0 || n == 0) {
                f[m][n][0] = 1.0;
                continue;
            }
            for (std::size_t u = 0; u <= m * n; ++u) {
                double v = f[m][n - 1][u];
                if (u >= n) v += f[m - 1][n][u - n];
                f[m][n][u] = v;
            }
        }
    }
    return f[n1][n2];
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, Alternative alternative) {
    if (a.empty() || b.empty()) throw EmptyInput("Mann-Whitney U needs two non-empty samples");
    const auto n1 = a.size();
    const auto n2 = b.size();
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = rank_with_ties(pooled);
    double r1 = 0.0;
    for (std::size_t i = 0; i < n1; ++i) r1 += ranks.ranks[i];
    const double u1 = r1 - static_cast<double>(n1 * (n1 + 1)) / 2.0;
    const double u2 = static_cast<double>(n1 * n2) - u1;

    TestResult out;
    out.statistic = u1;
    out.n1 = n1;
    out.n2 = n2;

    if (n1 + n2 <= kExactLimit && ranks.tie_groups.empty()) {
        out.method = Method::mann_whitney_exact;
        const auto dist = u_distribution(n1, n2);
        const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
        // U is an integer without ties.
        const auto u = static_cast<std::size_t>(std::llround(u1));
        double le = 0.0;
        double ge = 0.0;
        for (std::size_t k = 0; k < dist.size(); ++k) {
            if (k <= u) le += dist[k];
            if (k >= u) ge += dist[k];
        }
        switch (alternative) {
            case Alternative::greater: out.p_value = ge / total; break;
            case Alternative::less: out.p_value = le / total; break;
            case Alternative::two_sided: out.p_value = clip01(2.0 * std::min(le, ge) / total); break;
        }
        return out;
    }

    out.method = Method::mann_whitney_normal_approx;
    const double n = static_cast<double>(n1 + n2);
    double tie_term = 0.0;
    for (auto t : ranks.tie_groups) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    out.tie_correction_applied = !ranks.tie_groups.empty();
    const double mu = static_cast<double>(n1 * n2) / 2.0;
    const double var = static_cast<double>(n1 * n2) / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        out.p_value = 1.0;
        return out;
    }
    const double sigma = std::sqrt(var);
    double u = alternative == Alternative::greater ? u1 : alternative == Alternative::less ? u2 : std::max(u1, u2);
    double p = normal_sf((u - mu - 0.5) / sigma);
    if (alternative == Alternative::two_sided) p *= 2.0;
    out.p_value = clip01(p);
    return out;
}

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 5000)
        throw SampleSizeOutOfRange("Shapiro-Wilk needs 3 to 5000 values, got " + std::to_string(n));
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    if (x.back() - x.front() <= 0.0) throw DegenerateSample("sample has zero range");

    const double an = static_cast<double>(n);
    const std::size_t nn2 = n / 2;
    std::vector<double> a(nn2 + 1, 0.0);  // 1-based

    if (n == 3) {
        a[1] = std::sqrt(0.5);
    } else {
        const double an25 = an + 0.25;
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= nn2; ++i) {
            a[i] = normal_quantile((static_cast<double>(i) - 0.375) / an25);
            summ2 += a[i] * a[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly({0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056}, rsn) - a[1] / ssumm2;
        std::size_t i1;
        double fac;
        if (n > 5) {
            i1 = 3;
            const double a2 = -a[2] / ssumm2 + poly({0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633}, rsn);
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[2] = a2;
        } else {
            i1 = 2;
            fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
        }
        a[1] = a1;
        for (std::size_t i = i1; i <= nn2; ++i) a[i] = -a[i] / fac;
    }

    // W is the squared correlation of the ordered sample with the coefficients.
    const double xbar = mean(x);
    double ssq = 0.0;
    for (double v : x) ssq += (v - xbar) * (v - xbar);
    double num = 0.0;
    for (std::size_t i = 1; i <= nn2; ++i) num += a[i] * (x[n - i] - x[i - 1]);
    double w = std::min(1.0, num * num / ssq);

    TestResult out;
    out.method = Method::shapiro_wilk;
    out.statistic = w;
    out.n1 = n;

    if (n == 3) {
        constexpr double pi6 = 1.90985931710274;
        constexpr double stqr = 1.04719755119660;
        out.p_value = clip01(std::max(0.0, pi6 * (std::asin(std::sqrt(w)) - stqr)));
        return out;
    }
    double w1 = std::log(1.0 - w);
    double m;
    double s;
    if (n <= 11) {
        const double gamma = poly({-2.273, 0.459}, an);
        if (w1 >= gamma) {
            out.p_value = 1e-99;
            return out;
        }
        w1 = -std::log(gamma - w1);
        m = poly({0.544, -0.39978, 0.025054, -6.714e-4}, an);
        s = std::exp(poly({1.3822, -0.77857, 0.062767, -0.0020322}, an));
    } else {
        const double xx = std::log(an);
        m = poly({-1.5861, -0.31082, -0.083751, 0.0038915}, xx);
        s = std::exp(poly({-0.4803, -0.082676, 0.0030302}, xx));
    }
    out.p_value = clip01(normal_sf((w1 - m) / s));
    return out;
}

EfficacyReport efficacy_analysis(std::span<const double> group_a, std::span<const double> group_b, double alpha) {
    if (group_a.empty() || group_b.empty()) throw EmptyInput("efficacy analysis needs two non-empty groups");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("InvalidAlpha", "alpha must lie in (0, 1)");
    EfficacyReport r;
    r.alpha = alpha;
    r.n_a = group_a.size();
    r.n_b = group_b.size();
    r.mean_a = mean(group_a);
    r.mean_b = mean(group_b);

    bool unknown = false;
    const auto gate = [&](std::span<const double> g, const char* name) -> std::optional<TestResult> {
        try {
            return shapiro_wilk(g);
        } catch (const ValidationError& e) {
            unknown = true;
            r.notes.push_back(std::string("normality of group ") + name + " cannot be tested: " + e.what());
            return std::nullopt;
        }
    };
    r.normality_a = gate(group_a, "a");
    r.normality_b = gate(group_b, "b");
    r.normality_rejected = (r.normality_a && r.normality_a->p_value < alpha) ||
                           (r.normality_b && r.normality_b->p_value < alpha);

    if (r.normality_rejected || unknown) {
        r.method = "mann_whitney";
        r.test = mann_whitney_u(group_a, group_b, Alternative::two_sided);
        r.significant = r.test->p_value < alpha;
    } else {
        r.method = "none";
        r.notes.push_back("normality not rejected for either group; a parametric test would apply and is not run");
    }
    return r;
}

Json to_json(const TestResult& r) {
    return {{"statistic", r.statistic},
            {"p_value", r.p_value},
            {"method", to_string(r.method)},
            {"n1", r.n1},
            {"n2", r.n2},
            {"tie_correction_applied", r.tie_correction_applied}};
}

Json to_json(const RankData& r) { return {{"values", r.values}, {"ranks", r.ranks}, {"tie_groups", r.tie_groups}}; }

Json to_json(const EfficacyReport& r) {
    return {{"alpha", r.alpha},
            {"n_a", r.n_a},
            {"n_b", r.n_b},
            {"mean_a", r.mean_a},
            {"mean_b", r.mean_b},
            {"normality_a", r.normality_a ? to_json(*r.normality_a) : Json(nullptr)},
            {"normality_b", r.normality_b ? to_json(*r.normality_b) : Json(nullptr)},
            {"normality_rejected", r.normality_rejected},
            {"method", r.method},
            {"test", r.test ? to_json(*r.test) : Json(nullptr)},
            {"significant", r.significant},
            {"notes", r.notes}};
}

}  // namespace folio::eval
