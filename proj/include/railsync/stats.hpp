#pragma once

#include <optional>
#include <span>
#include <vector>

namespace railsync {

double mean(std::span<const double> xs);
double median(std::vector<double> xs);  // average of the two middle values for even n

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;  // 1.0 when the residual is exactly zero (incl. constant series)
};

// Least-squares line through (x, y); requires >= 2 points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

// Pearson correlation; absent when either series has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// One-sided paired t-test for mean(a - b) > 0 at significance 0.01.
// Uses the t critical value for 99 degrees of freedom, conservative for n > 100.
bool paired_greater_than(std::span<const double> a, std::span<const double> b);

}  // namespace railsync
