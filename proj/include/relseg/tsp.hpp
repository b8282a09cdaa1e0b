#pragma once

namespace relseg {

/// Support [lower, upper] of a width-limited TSP component inside [0, 1].
struct TspSupport {
    double lower;
    double upper;
};

/// Three-parameter two-sided power distribution on a subinterval of [0, 1].
///
/// The component is a symmetric power kernel of width `width` centred at
/// `mode`; the window is shifted (and becomes asymmetric) only when it would
/// leave the unit interval. Only the unimodal regime is representable, so the
/// constructor rejects mode outside (0, 1), width outside (0, 1] and power <= 1.
class TspComponent {
public:
    TspComponent(double mode, double width, double power);

    double mode() const { return mode_; }
    double width() const { return width_; }
    double power() const { return power_; }
    const TspSupport& support() const { return support_; }

    /// d(lower)/d(mode); equal to d(upper)/d(mode). Left-sided at clipping
    /// boundaries.
    double support_slope() const { return support_slope_; }

private:
    double mode_;
    double width_;
    double power_;
    TspSupport support_;
    double support_slope_;
};

/// a = max(0, min(1 - w, m - w/2)), b = min(1, a + w).
/// Throws std::domain_error for m outside (0, 1) or w outside (0, 1].
TspSupport tsp_support(double mode, double width);

double tsp_pdf(double u, const TspComponent& c);
double tsp_cdf(double u, const TspComponent& c);

/// Total derivative of the cdf with respect to the mode, including the
/// movement of the support with the mode.
double tsp_cdf_dmode(double u, const TspComponent& c);

struct TspValue {
    double cdf;
    double dmode;
};

/// cdf and its mode derivative in one pass (shares the power evaluation).
TspValue tsp_cdf_with_dmode(double u, const TspComponent& c);

/// x^p for x >= 0 computed as exp(p log x), with 0^p := 0.
double power_of(double x, double p);

} // namespace relseg
