#include "relseg/tsp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace relseg {

namespace {

void check_mode_width(double mode, double width) {
    if (!(mode > 0.0 && mode < 1.0)) {
        throw std::domain_error("TSP mode must lie in (0, 1), got " + std::to_string(mode));
    }
    if (!(width > 0.0 && width <= 1.0)) {
        throw std::domain_error("TSP width must lie in (0, 1], got " + std::to_string(width));
    }
}

} // namespace

double power_of(double x, double p) {
    if (x <= 0.0) {
        return 0.0;
    }
    return std::exp(p * std::log(x));
}

TspSupport tsp_support(double mode, double width) {
    check_mode_width(mode, width);
    double lower = std::max(0.0, std::min(1.0 - width, mode - 0.5 * width));
    double upper = std::min(1.0, lower + width);
    return {lower, upper};
}

TspComponent::TspComponent(double mode, double width, double power)
    : mode_{mode}, width_{width}, power_{power}, support_{tsp_support(mode, width)} {
    if (!(power > 1.0) || !std::isfinite(power)) {
        throw std::domain_error("TSP power must be > 1, got " + std::to_string(power));
    }
    // The window follows the mode only while it is not clipped at 0 or 1.
    double shift = mode - 0.5 * width;
    support_slope_ = (shift > 0.0 && shift <= 1.0 - width) ? 1.0 : 0.0;
}

double tsp_pdf(double u, const TspComponent& c) {
    const auto [a, b] = c.support();
    const double m = c.mode();
    const double n = c.power();
    if (u <= a || u >= b) {
        return 0.0;
    }
    const double scale = n / (b - a);
    if (u <= m) {
        return scale * power_of((u - a) / (m - a), n - 1.0);
    }
    return scale * power_of((b - u) / (b - m), n - 1.0);
}

double tsp_cdf(double u, const TspComponent& c) {
    return tsp_cdf_with_dmode(u, c).cdf;
}

double tsp_cdf_dmode(double u, const TspComponent& c) {
    return tsp_cdf_with_dmode(u, c).dmode;
}

TspValue tsp_cdf_with_dmode(double u, const TspComponent& c) {
    const auto [a, b] = c.support();
    if (u <= a) {
        return {0.0, 0.0};
    }
    if (u >= b) {
        return {1.0, 0.0};
    }
    const double m = c.mode();
    const double n = c.power();
    const double span = b - a;
    const double slope = c.support_slope();
    // Both branches share the form F = edge + sign * (side/span) * ratio^n and
    // dF/dm = -(n slope ratio^(n-1) + (n-1)(1-slope) ratio^n) / span.
    if (u <= m) {
        const double ratio = (u - a) / (m - a);
        const double pw1 = power_of(ratio, n - 1.0);
        const double pw = pw1 * ratio;
        return {(m - a) / span * pw, -(n * slope * pw1 + (n - 1.0) * (1.0 - slope) * pw) / span};
    }
    const double ratio = (b - u) / (b - m);
    const double pw1 = power_of(ratio, n - 1.0);
    const double pw = pw1 * ratio;
    return {1.0 - (b - m) / span * pw, -(n * slope * pw1 + (n - 1.0) * (1.0 - slope) * pw) / span};
}

} // namespace relseg
