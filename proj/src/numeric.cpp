#include "homsim/numeric.hpp"

#include <cmath>

#include "homsim/errors.hpp"

namespace homsim {

MinimumLocation parabolic_minimum(std::span<const double> x, std::span<const double> y, double tie_tolerance)
{
    if (x.size() != y.size() || x.size() < 3) throw ShapeError("minimum search needs at least three points");
    std::size_t best = 0;
    for (std::size_t k = 1; k < y.size(); ++k)
        if (y[k] < y[best]) best = k;

    MinimumLocation out;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const std::size_t gap = k > best ? k - best : best - k;
        if (gap > 1 && std::abs(y[k] - y[best]) <= tie_tolerance) out.ambiguous = true;
    }
    if (best == 0 || best + 1 == y.size()) throw ShapeError("minimum lies on the edge of the scan");

    const double x0 = x[best - 1], x1 = x[best], x2 = x[best + 1];
    const double y0 = y[best - 1], y1 = y[best], y2 = y[best + 1];
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    out.position = x1;
    out.value = y1;
    if (curvature > 0.0) {
        // Newton form: p(x) = y0 + d01 (x - x0) + curvature (x - x0)(x - x1).
        const double vertex = 0.5 * (x0 + x1) - 0.5 * d01 / curvature;
        out.position = vertex;
        out.value = y0 + d01 * (vertex - x0) + curvature * (vertex - x0) * (vertex - x1);
    }
    return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw FitError("line fit needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += x[k];
        my += y[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (x[k] - mx) * (x[k] - mx);
        sxy += (x[k] - mx) * (y[k] - my);
    }
    if (!(sxx > 0.0)) throw FitError("line fit needs distinct abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = y[k] - (fit.intercept + fit.slope * x[k]);
        ss += r * r;
    }
    if (n > 2) {
        fit.residual_sigma = std::sqrt(ss / (n - 2));
        fit.slope_stderr = fit.residual_sigma / std::sqrt(sxx);
    }
    return fit;
}

}  // namespace homsim
