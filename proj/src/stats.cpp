#include "railsync/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace railsync {

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty series");
    double s = 0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double median(std::vector<double> xs) {
    if (xs.empty()) throw std::invalid_argument("median of empty series");
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    if (n % 2 == 1) return xs[n / 2];
    return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("linear_fit needs two equally sized series of length >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    if (sxx == 0) throw std::invalid_argument("linear_fit: x has zero variance");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    // An exact fit counts as R^2 = 1 even for a constant series.
    if (ss_res <= 1e-12 * std::max(1.0, ss_tot)) fit.r2 = 1.0;
    else if (ss_tot == 0) fit.r2 = 0.0;
    else fit.r2 = 1.0 - ss_res / ss_tot;
    return fit;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("pearson needs two equally sized series of length >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0 || syy == 0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

bool paired_greater_than(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("paired test needs equal sizes >= 2");
    const std::size_t n = a.size();
    double md = 0;
    for (std::size_t i = 0; i < n; ++i) md += a[i] - b[i];
    md /= static_cast<double>(n);
    double var = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i] - md;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (var == 0) return md > 0;
    const double t = md / std::sqrt(var / static_cast<double>(n));
    // t(0.99, df = 99); conservative for larger samples.
    return t > 2.3646;
}

}  // namespace railsync
