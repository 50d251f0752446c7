#include "icelines/legendre.hpp"

#include "icelines/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace icelines {

namespace {

void require_even(int degree) {
    if (degree < 0 || degree % 2 != 0) {
        throw DomainError("Legendre degree must be even and non-negative, got " +
                          std::to_string(degree));
    }
}

void require_unit_interval(double y) {
    if (!(std::abs(y) <= 1.0)) {
        throw DomainError("argument outside [-1, 1]: " + std::to_string(y));
    }
}

// p_n(y) for any n >= 0, no domain checks.
double legendre_p(int n, double y) {
    if (n == 0) {
        return 1.0;
    }
    double prev = 1.0;
    double curr = y;
    for (int k = 1; k < n; ++k) {
        const double next = ((2.0 * k + 1.0) * y * curr - k * prev) / (k + 1.0);
        prev = curr;
        curr = next;
    }
    return curr;
}

// p'_n via p'_{k+1} = p'_{k-1} + (2k+1) p_k, regular at the poles.
double legendre_dp(int n, double y) {
    if (n == 0) {
        return 0.0;
    }
    double dprev = 0.0;  // p'_0
    double dcurr = 1.0;  // p'_1
    double pprev = 1.0;  // p_0
    double pcurr = y;    // p_1
    for (int k = 1; k < n; ++k) {
        const double dnext = dprev + (2.0 * k + 1.0) * pcurr;
        const double pnext = ((2.0 * k + 1.0) * y * pcurr - k * pprev) / (k + 1.0);
        dprev = dcurr;
        dcurr = dnext;
        pprev = pcurr;
        pcurr = pnext;
    }
    return dcurr;
}

template <class F>
double integrate_gl64(F&& f, double lo, double hi) {
    const auto& rule = gauss_legendre_64();
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

}  // namespace

double legendre_eval(int degree, double y) {
    require_even(degree);
    require_unit_interval(y);
    return legendre_p(degree, y);
}

double legendre_derivative(int degree, double y) {
    require_even(degree);
    require_unit_interval(y);
    return legendre_dp(degree, y);
}

double legendre_antiderivative(int degree, double y) {
    require_even(degree);
    if (degree == 0) {
        return y;
    }
    return (legendre_p(degree + 1, y) - legendre_p(degree - 1, y)) / (2.0 * degree + 1.0);
}

GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) {
        throw DomainError("Gauss-Legendre rule needs at least one node");
    }
    GaussLegendreRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            const double dx = legendre_p(n, x) / legendre_dp(n, x);
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double dp = legendre_dp(n, x);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        rule.nodes[lo] = -x;
        rule.nodes[hi] = x;
        rule.weights[lo] = w;
        rule.weights[hi] = w;
    }
    return rule;
}

const GaussLegendreRule& gauss_legendre_64() {
    static const GaussLegendreRule rule = gauss_legendre(64);
    return rule;
}

double annual_mean_insolation(double y, double beta_deg) {
    require_unit_interval(y);
    const double beta = beta_deg * std::numbers::pi / 180.0;
    const double cos_lat = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double sb = std::sin(beta);
    const double cb = std::cos(beta);
    // Daily-mean insolation integrated over the orbital longitude; the integrand
    // is even in the longitude, so integrate over half the orbit and double.
    const double orbit = integrate_gl64(
        [&](double lon) {
            const double c = cos_lat * sb * std::cos(lon) - y * cb;
            return std::sqrt(std::max(0.0, 1.0 - c * c));
        },
        0.0, std::numbers::pi);
    return 4.0 / (std::numbers::pi * std::numbers::pi) * orbit;
}

InsolationModel insolation_coeffs(double beta, int M) {
    if (!(beta >= 0.0 && beta < 90.0)) {
        throw DomainError("obliquity must lie in [0, 90) degrees");
    }
    if (M < 1) {
        throw DomainError("insolation truncation order must be >= 1");
    }
    InsolationModel model;
    model.M = M;
    model.beta = beta;
    model.s_coeffs.assign(static_cast<std::size_t>(M) + 1, 0.0);
    model.s_coeffs[0] = 1.0;

    // Project in colatitude (y = cos theta) so the polar sqrt behaviour becomes smooth;
    // split where polar night begins, since the distribution has a kink there.
    const double b = beta * std::numbers::pi / 180.0;
    std::vector<double> cuts{0.0, b, std::numbers::pi - b, std::numbers::pi};
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    for (int m = 1; m <= M; ++m) {
        double projection = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            projection += integrate_gl64(
                [&](double theta) {
                    const double y = std::clamp(std::cos(theta), -1.0, 1.0);
                    return annual_mean_insolation(y, beta) * legendre_p(2 * m, y) *
                           std::sin(theta);
                },
                cuts[k], cuts[k + 1]);
        }
        model.s_coeffs[static_cast<std::size_t>(m)] = 0.5 * (4.0 * m + 1.0) * projection;
    }
    return model;
}

double insolation(double y, const InsolationModel& model) {
    require_unit_interval(y);
    double sum = 0.0;
    for (std::size_t m = 0; m < model.s_coeffs.size(); ++m) {
        sum += model.s_coeffs[m] * legendre_p(2 * static_cast<int>(m), y);
    }
    return sum;
}

double insolation_derivative(double y, const InsolationModel& model) {
    require_unit_interval(y);
    double sum = 0.0;
    for (std::size_t m = 1; m < model.s_coeffs.size(); ++m) {
        sum += model.s_coeffs[m] * legendre_dp(2 * static_cast<int>(m), y);
    }
    return sum;
}

double insolation_integral(double eta_S, double eta_N, const InsolationModel& model) {
    require_unit_interval(eta_S);
    require_unit_interval(eta_N);
    if (eta_S > eta_N) {
        throw DomainError("insolation_integral requires eta_S <= eta_N");
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < model.s_coeffs.size(); ++m) {
        const int degree = 2 * static_cast<int>(m);
        sum += model.s_coeffs[m] *
               (legendre_antiderivative(degree, eta_N) - legendre_antiderivative(degree, eta_S));
    }
    return sum;
}

}  // namespace icelines
