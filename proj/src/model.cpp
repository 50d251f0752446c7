#include "icelines/model.hpp"

#include "icelines/errors.hpp"

#include <cmath>
#include <string>

namespace icelines {

std::string_view to_string(Branch branch) noexcept {
    return branch == Branch::Advance ? "advance" : "retreat";
}

Branch opposite(Branch branch) noexcept {
    return branch == Branch::Advance ? Branch::Retreat : Branch::Advance;
}

void ModelParams::validate() const {
    const auto fail = [](const std::string& msg) { throw ConfigError("invalid parameters: " + msg); };
    for (double x : {R, Q, A, B, C, alpha1, alpha2, T_cS, T_cN_plus, T_cN_minus, rho, a, b, b_minus,
                     b_plus, eps}) {
        if (!std::isfinite(x)) {
            fail("non-finite value");
        }
    }
    if (!(R > 0 && Q > 0 && B > 0 && C > 0)) fail("R, Q, B, C must be positive");
    if (!(rho > 0)) fail("rho must be positive");
    if (!(eps > 0)) fail("eps must be positive");
    if (!(a > 0)) fail("a must be positive");
    if (!(alpha1 < alpha2)) fail("alpha1 < alpha2 required");
    if (!(b_minus < b && b < b_plus)) fail("b_minus < b < b_plus required");
    if (!(T_cN_plus < T_cN_minus)) fail("T_cN_plus < T_cN_minus required");
    if (insolation.s_coeffs.empty() || insolation.s_coeffs.size() != std::size_t(insolation.M) + 1) {
        fail("insolation coefficients missing or inconsistent with M");
    }
    if (insolation.s_coeffs[0] != 1.0) fail("insolation must be normalised (s_0 = 1)");
}

ModelParams default_params() {
    ModelParams p;
    p.insolation = insolation_coeffs(23.5, 1);
    return p;
}

DerivedConstants derive(const ModelParams& params) {
    DerivedConstants d;
    const auto& s = params.insolation.s_coeffs;
    d.L = params.Q / (params.B + params.C);
    d.alpha0 = 0.5 * (params.alpha1 + params.alpha2);
    d.z_star = d.L * s.at(0) * (params.alpha1 - params.alpha2);
    for (std::size_t m = 1; m < s.size(); ++m) {
        d.u_star.push_back(d.L * s[m] * (1.0 - params.alpha2));
        d.v_star.push_back(d.L * s[m] * (1.0 - params.alpha1));
    }
    return d;
}

double distance(const ClimateState4& lhs, const ClimateState4& rhs) noexcept {
    const double dw = lhs.w - rhs.w;
    const double ds = lhs.eta_S - rhs.eta_S;
    const double dn = lhs.eta_N - rhs.eta_N;
    const double dx = lhs.xi_N - rhs.xi_N;
    return std::sqrt(dw * dw + ds * ds + dn * dn + dx * dx);
}

bool in_interior(const ClimateState3& s) noexcept {
    return std::isfinite(s.w) && -1.0 < s.eta_S && s.eta_S < s.eta_N && s.eta_N < 1.0;
}

bool in_interior(const ClimateState4& s) noexcept {
    return in_interior(s.reduced()) && -1.0 < s.xi_N && s.xi_N < 1.0;
}

double critical_temperature_north(Branch branch, const ModelParams& params) noexcept {
    return branch == Branch::Advance ? params.T_cN_minus : params.T_cN_plus;
}

double ablation_rate(Branch branch, const ModelParams& params) noexcept {
    return branch == Branch::Advance ? params.b_minus : params.b_plus;
}

double w_nullcline(double eta_S, double eta_N, const ModelParams& p) {
    const double L = p.Q / (p.B + p.C);
    const double alpha0 = 0.5 * (p.alpha1 + p.alpha2);
    const double s0 = p.insolation.s_coeffs.at(0);
    const double integral = insolation_integral(eta_S, eta_N, p.insolation);
    return (p.Q * s0 * (1.0 - alpha0) - p.A +
            0.5 * p.C * L * s0 * (p.alpha1 - p.alpha2) * (1.0 - integral)) /
           p.B;
}

double ice_line_nullcline(double eta, double T_c, const ModelParams& p) {
    const double L = p.Q / (p.B + p.C);
    const double alpha0 = 0.5 * (p.alpha1 + p.alpha2);
    return -L * (1.0 - alpha0) * (insolation(eta, p.insolation) - 1.0) + T_c;
}

Vec3 rhs3(const ClimateState3& s, double T_cS, double T_cN, const ModelParams& p) {
    return {-(p.B / p.R) * (s.w - w_nullcline(s.eta_S, s.eta_N, p)),
            -p.rho * (s.w - ice_line_nullcline(s.eta_S, T_cS, p)),
            p.rho * (s.w - ice_line_nullcline(s.eta_N, T_cN, p))};
}

Vec4 rhs4(Branch branch, const ClimateState4& s, const ModelParams& p) {
    const Vec3 head = rhs3(s.reduced(), p.T_cS, critical_temperature_north(branch, p), p);
    const double ablation = ablation_rate(branch, p);
    return {head[0], head[1], head[2],
            p.eps * (ablation * (s.eta_N - s.xi_N) - p.a * (1.0 - s.eta_N))};
}

namespace {

double mode_sum(const std::vector<double>& coeffs, double y) {
    double sum = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        sum += coeffs[m] * legendre_eval(2 * static_cast<int>(m), y);
    }
    return sum;
}

double mode_integral(const std::vector<double>& coeffs, double lo, double hi) {
    double sum = 0.0;
    for (std::size_t m = 0; m < coeffs.size(); ++m) {
        const int degree = 2 * static_cast<int>(m);
        sum += coeffs[m] * (legendre_antiderivative(degree, hi) - legendre_antiderivative(degree, lo));
    }
    return sum;
}

void require_ordered_lines(double eta_S, double eta_N) {
    if (!(-1.0 <= eta_S && eta_S <= eta_N && eta_N <= 1.0)) {
        throw DomainError("albedo lines must satisfy -1 <= eta_S <= eta_N <= 1");
    }
}

}  // namespace

double TemperatureProfile::operator()(double y) const {
    if (!(std::abs(y) <= 1.0)) {
        throw DomainError("latitude outside [-1, 1]");
    }
    if (y < eta_S) return mode_sum(u, y);
    if (y == eta_S) return 0.5 * (mode_sum(u, y) + mode_sum(v, y));
    if (y < eta_N) return mode_sum(v, y);
    if (y == eta_N) return 0.5 * (mode_sum(v, y) + mode_sum(w, y));
    return mode_sum(w, y);
}

TemperatureProfile temperature_profile(double w, double eta_S, double eta_N, const ModelParams& p) {
    require_ordered_lines(eta_S, eta_N);
    const DerivedConstants d = derive(p);
    TemperatureProfile prof;
    prof.eta_S = eta_S;
    prof.eta_N = eta_N;
    const double u0 = w + 0.5 * d.z_star;
    const double v0 = w - 0.5 * d.z_star;
    prof.u.push_back(u0);
    prof.v.push_back(v0);
    prof.w.push_back(u0);
    for (std::size_t m = 0; m < d.u_star.size(); ++m) {
        prof.u.push_back(d.u_star[m]);
        prof.v.push_back(d.v_star[m]);
        prof.w.push_back(d.u_star[m]);
    }
    const double scale = d.L * (1.0 - d.alpha0);
    prof.at_eta_S = w + scale * (insolation(eta_S, p.insolation) - 1.0);
    prof.at_eta_N = w + scale * (insolation(eta_N, p.insolation) - 1.0);
    const double s0 = p.insolation.s_coeffs.at(0);
    prof.mean = w - 0.5 * d.L * s0 * (p.alpha2 - p.alpha1) *
                        (1.0 - insolation_integral(eta_S, eta_N, p.insolation));
    return prof;
}

std::vector<double> SpectralState::flatten() const {
    std::vector<double> flat;
    flat.reserve(u.size() + v.size() + w_modes.size() + 2);
    flat.insert(flat.end(), u.begin(), u.end());
    flat.insert(flat.end(), v.begin(), v.end());
    flat.insert(flat.end(), w_modes.begin(), w_modes.end());
    flat.push_back(eta_S);
    flat.push_back(eta_N);
    return flat;
}

SpectralState SpectralState::unflatten(const std::vector<double>& flat, int M) {
    const auto n = static_cast<std::size_t>(M) + 1;
    if (flat.size() != 3 * n + 2) {
        throw DomainError("spectral state has wrong dimension for M = " + std::to_string(M));
    }
    SpectralState s;
    const auto at = [&](std::size_t i) { return flat.begin() + static_cast<std::ptrdiff_t>(i); };
    s.u.assign(at(0), at(n));
    s.v.assign(at(n), at(2 * n));
    s.w_modes.assign(at(2 * n), at(3 * n));
    s.eta_S = flat[3 * n];
    s.eta_N = flat[3 * n + 1];
    return s;
}

SpectralState spectral_rhs(const SpectralState& s, double T_cS, double T_cN, const ModelParams& p) {
    const auto n = p.insolation.s_coeffs.size();
    if (s.u.size() != n || s.v.size() != n || s.w_modes.size() != n) {
        throw DomainError("spectral state truncation does not match the insolation model");
    }
    require_ordered_lines(s.eta_S, s.eta_N);
    const auto& sc = p.insolation.s_coeffs;

    const double mean = 0.5 * (mode_integral(s.u, -1.0, s.eta_S) +
                               mode_integral(s.v, s.eta_S, s.eta_N) +
                               mode_integral(s.w_modes, s.eta_N, 1.0));

    SpectralState ds;
    ds.u.resize(n);
    ds.v.resize(n);
    ds.w_modes.resize(n);
    const double BC = p.B + p.C;
    for (std::size_t m = 0; m < n; ++m) {
        const double forcing_ice = p.Q * sc[m] * (1.0 - p.alpha2);
        const double forcing_open = p.Q * sc[m] * (1.0 - p.alpha1);
        const double global = m == 0 ? p.C * mean - p.A : 0.0;
        ds.u[m] = (forcing_ice - BC * s.u[m] + global) / p.R;
        ds.v[m] = (forcing_open - BC * s.v[m] + global) / p.R;
        ds.w_modes[m] = (forcing_ice - BC * s.w_modes[m] + global) / p.R;
    }

    double T_south = 0.0;
    double T_north = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const int degree = 2 * static_cast<int>(m);
        T_south += 0.5 * (s.u[m] + s.v[m]) * legendre_eval(degree, s.eta_S);
        T_north += 0.5 * (s.v[m] + s.w_modes[m]) * legendre_eval(degree, s.eta_N);
    }
    ds.eta_S = p.rho * (T_cS - T_south);
    ds.eta_N = p.rho * (T_north - T_cN);
    return ds;
}

}  // namespace icelines
