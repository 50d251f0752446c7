#pragma once

#include <vector>

namespace icelines {

/// Even-degree Legendre polynomial p_degree(y) on [-1, 1] (three-term recurrence).
/// Throws DomainError for odd or negative degree, or |y| > 1.
[[nodiscard]] double legendre_eval(int degree, double y);

/// d/dy p_degree(y), even degree only.
[[nodiscard]] double legendre_derivative(int degree, double y);

/// Antiderivative of p_degree normalised so that it vanishes at y = 0:
/// P_0(y) = y and P_n(y) = (p_{n+1}(y) - p_{n-1}(y)) / (2n + 1) for n >= 2.
[[nodiscard]] double legendre_antiderivative(int degree, double y);

struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
[[nodiscard]] GaussLegendreRule gauss_legendre(int n);

/// The fixed 64-point rule used for all spectral projections.
[[nodiscard]] const GaussLegendreRule& gauss_legendre_64();

/// Annual-mean insolation distribution s(y) at obliquity beta (degrees),
/// normalised to unit global mean. Evaluated by quadrature over the orbit.
[[nodiscard]] double annual_mean_insolation(double y, double beta_deg);

/// Truncated even-Legendre expansion of the annual-mean insolation:
/// s(y) = sum_m s_coeffs[m] * p_{2m}(y).
struct InsolationModel {
    int M = 0;
    double beta = 0.0;  // degrees
    std::vector<double> s_coeffs;

    bool operator==(const InsolationModel&) const = default;
};

/// Project the annual-mean distribution onto p_0 ... p_{2M}. s_0 is pinned to 1.
/// Requires 0 <= beta < 90 and M >= 1.
[[nodiscard]] InsolationModel insolation_coeffs(double beta, int M);

[[nodiscard]] double insolation(double y, const InsolationModel& model);
[[nodiscard]] double insolation_derivative(double y, const InsolationModel& model);

/// Exact integral of the truncated s(y) over [eta_S, eta_N]; eta_S == eta_N gives 0.
[[nodiscard]] double insolation_integral(double eta_S, double eta_N, const InsolationModel& model);

}  // namespace icelines
