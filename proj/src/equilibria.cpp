#include "icelines/equilibria.hpp"

#include "icelines/errors.hpp"
#include "icelines/switching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace icelines {

std::string_view to_string(Stability s) noexcept {
    switch (s) {
        case Stability::StableNode:
            return "stable node";
        case Stability::Saddle:
            return "saddle";
        case Stability::Other:
            return "other";
    }
    return "other";
}

std::string_view to_string(FilippovClass c) noexcept {
    switch (c) {
        case FilippovClass::Regular:
            return "regular";
        case FilippovClass::Virtual:
            return "virtual";
        case FilippovClass::Boundary:
            return "boundary";
        case FilippovClass::NotApplicable:
            return "n/a";
    }
    return "n/a";
}

ClimateState3 EquilibriumReport::state3() const {
    if (point.size() < 3) {
        throw DomainError("equilibrium report has no point");
    }
    return {point[0], point[1], point[2]};
}

ClimateState4 EquilibriumReport::state4() const {
    if (point.size() != 4) {
        throw DomainError("equilibrium report is not four-dimensional");
    }
    return {point[0], point[1], point[2], point[3]};
}

Matrix3 jacobian3(const ClimateState3& s, double /*T_cS*/, double /*T_cN*/, const ModelParams& p) {
    // Critical temperatures only shift G, so they drop out of the derivatives.
    const double L = p.Q / (p.B + p.C);
    const double alpha0 = 0.5 * (p.alpha1 + p.alpha2);
    const double s0 = p.insolation.s_coeffs.at(0);
    const double k = 0.5 * p.C * L * s0 * (p.alpha1 - p.alpha2) / p.B;
    const double dF_dS = k * insolation(s.eta_S, p.insolation);
    const double dF_dN = -k * insolation(s.eta_N, p.insolation);
    const double dG_dS = -L * (1.0 - alpha0) * insolation_derivative(s.eta_S, p.insolation);
    const double dG_dN = -L * (1.0 - alpha0) * insolation_derivative(s.eta_N, p.insolation);
    const double relax = p.B / p.R;
    Matrix3 J{};
    J[0] = {-relax, relax * dF_dS, relax * dF_dN};
    J[1] = {-p.rho, p.rho * dG_dS, 0.0};
    J[2] = {p.rho, 0.0, -p.rho * dG_dN};
    return J;
}

namespace {

struct Cubic {
    double c2, c1, c0;  // lambda^3 + c2 lambda^2 + c1 lambda + c0

    std::complex<double> operator()(std::complex<double> x) const { return ((x + c2) * x + c1) * x + c0; }
    std::complex<double> derivative(std::complex<double> x) const { return (3.0 * x + 2.0 * c2) * x + c1; }

    std::complex<double> polish(std::complex<double> x) const {
        for (int i = 0; i < 4; ++i) {
            const auto d = derivative(x);
            if (std::abs(d) == 0.0) break;
            const auto next = x - (*this)(x) / d;
            if (!(std::abs((*this)(next)) < std::abs((*this)(x)))) break;
            x = next;
        }
        return x;
    }
};

Cubic characteristic_coeffs(const Matrix3& m) {
    const double tr = m[0][0] + m[1][1] + m[2][2];
    const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] + m[0][0] * m[2][2] -
                          m[0][2] * m[2][0] + m[1][1] * m[2][2] - m[1][2] * m[2][1];
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    return {-tr, minors, -det};
}

bool is_real(std::complex<double> z) { return std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z)); }

// Gaussian elimination with partial pivoting; false if singular.
bool solve3(Matrix3 a, std::array<double, 3> b, std::array<double, 3>& x) {
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (std::abs(a[piv][col]) < 1e-300) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int r = 2; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < 3; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return true;
}

double max_norm(const Vec3& v) {
    return std::max({std::abs(v[0]), std::abs(v[1]), std::abs(v[2])});
}

bool evaluable(const ClimateState3& s) {
    return std::isfinite(s.w) && -1.0 <= s.eta_S && s.eta_S <= s.eta_N && s.eta_N <= 1.0;
}

std::vector<std::vector<double>> to_rows(const Matrix3& m) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : m) rows.emplace_back(r.begin(), r.end());
    return rows;
}

// Damped Newton; returns true on convergence to an interior root.
bool newton3(ClimateState3& s, double T_cS, double T_cN, const ModelParams& p) {
    Vec3 f = rhs3(s, T_cS, T_cN, p);
    double norm = max_norm(f);
    for (int iter = 0; iter < 60 && norm > 1e-14; ++iter) {
        const Matrix3 J = jacobian3(s, T_cS, T_cN, p);
        std::array<double, 3> dx{};
        if (!solve3(J, {-f[0], -f[1], -f[2]}, dx)) return false;
        bool improved = false;
        for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
            const ClimateState3 trial{s.w + lambda * dx[0], s.eta_S + lambda * dx[1],
                                      s.eta_N + lambda * dx[2]};
            if (!evaluable(trial)) continue;
            const Vec3 ft = rhs3(trial, T_cS, T_cN, p);
            if (max_norm(ft) < norm) {
                s = trial;
                f = ft;
                norm = max_norm(ft);
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    return norm < 1e-9 && in_interior(s);
}

}  // namespace

std::complex<double> characteristic3(const Matrix3& m, std::complex<double> lambda) {
    // det(M - lambda I) = -(lambda^3 + c2 lambda^2 + c1 lambda + c0)
    return -characteristic_coeffs(m)(lambda);
}

std::array<std::complex<double>, 3> eigenvalues3(const Matrix3& m) {
    const Cubic cubic = characteristic_coeffs(m);
    const double a = cubic.c2;
    const double p = cubic.c1 - a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - a * cubic.c1 / 3.0 + cubic.c0;
    const double shift = -a / 3.0;
    const double disc = 0.25 * q * q + p * p * p / 27.0;

    std::array<std::complex<double>, 3> roots;
    if (disc <= 0.0 && p < 0.0) {
        const double r = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(1.5 * q / p * std::sqrt(-3.0 / p), -1.0, 1.0);
        const double phi = std::acos(arg);
        for (int k = 0; k < 3; ++k) {
            roots[static_cast<std::size_t>(k)] =
                r * std::cos(phi / 3.0 - 2.0 * std::numbers::pi * k / 3.0) + shift;
        }
    } else {
        const double sq = std::sqrt(std::max(disc, 0.0));
        const double t = std::cbrt(-0.5 * q + sq) + std::cbrt(-0.5 * q - sq);
        const double real_root = cubic.polish(t + shift).real();
        // deflate: lambda^2 + b lambda + c
        const double b = a + real_root;
        const double c = cubic.c1 + real_root * b;
        const double d = 0.25 * b * b - c;
        roots[0] = real_root;
        if (d < 0.0) {
            roots[1] = {-0.5 * b, std::sqrt(-d)};
            roots[2] = {-0.5 * b, -std::sqrt(-d)};
        } else {
            const double big = -0.5 * b - std::copysign(std::sqrt(d), b);
            roots[1] = big;
            roots[2] = big != 0.0 ? c / big : 0.0;
        }
    }
    for (auto& r : roots) {
        r = cubic.polish(r);
        if (is_real(r)) r = r.real();
    }
    std::sort(roots.begin(), roots.end(), [](auto x, auto y) {
        return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
    });
    return roots;
}

Stability classify_stability(const std::vector<std::complex<double>>& eigenvalues) {
    bool any_pos = false;
    bool any_neg = false;
    for (const auto& z : eigenvalues) {
        if (!is_real(z) || z.real() == 0.0) return Stability::Other;
        (z.real() < 0.0 ? any_neg : any_pos) = true;
    }
    if (any_neg && !any_pos) return Stability::StableNode;
    if (any_neg && any_pos) return Stability::Saddle;
    return Stability::Other;
}

std::vector<EquilibriumReport> find_equilibria3(double T_cS, double T_cN, const ModelParams& p) {
    constexpr int grid = 9;
    constexpr double lo = -0.99;
    constexpr double hi = 0.99;
    std::vector<ClimateState3> roots;
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double eta_S = lo + (hi - lo) * i / (grid - 1);
            const double eta_N = lo + (hi - lo) * j / (grid - 1);
            if (!(eta_S < eta_N)) continue;
            ClimateState3 s{w_nullcline(eta_S, eta_N, p), eta_S, eta_N};
            if (!newton3(s, T_cS, T_cN, p)) continue;
            const bool seen = std::any_of(roots.begin(), roots.end(), [&](const ClimateState3& r) {
                return std::hypot(r.w - s.w, r.eta_S - s.eta_S, r.eta_N - s.eta_N) < 1e-6;
            });
            if (!seen) roots.push_back(s);
        }
    }
    std::sort(roots.begin(), roots.end(), [](const auto& x, const auto& y) { return x.w < y.w; });

    std::vector<EquilibriumReport> reports;
    for (const auto& s : roots) {
        EquilibriumReport rep;
        rep.point = {s.w, s.eta_S, s.eta_N};
        const Matrix3 J = jacobian3(s, T_cS, T_cN, p);
        rep.jacobian = to_rows(J);
        const auto ev = eigenvalues3(J);
        rep.eigenvalues.assign(ev.begin(), ev.end());
        rep.stability = classify_stability(rep.eigenvalues);
        rep.residual = max_norm(rhs3(s, T_cS, T_cN, p));
        reports.push_back(std::move(rep));
    }
    return reports;
}

EquilibriumReport lift_to_4d(Branch branch, const EquilibriumReport& eq3, const ModelParams& p) {
    const ClimateState3 s = eq3.state3();
    const double T_cN = critical_temperature_north(branch, p);
    const double residual3 = max_norm(rhs3(s, p.T_cS, T_cN, p));
    if (!(residual3 < 1e-9)) {
        throw DomainError("point is not an equilibrium of the " + std::string(to_string(branch)) +
                          " reduced field (residual " + std::to_string(residual3) + ")");
    }
    const double ablation = ablation_rate(branch, p);
    const double ratio = p.a / ablation;
    const ClimateState4 s4{s.w, s.eta_S, s.eta_N, (1.0 + ratio) * s.eta_N - ratio};

    EquilibriumReport rep;
    rep.point = {s4.w, s4.eta_S, s4.eta_N, s4.xi_N};
    rep.branch = branch;
    const Matrix3 J = jacobian3(s, p.T_cS, T_cN, p);
    rep.jacobian = to_rows(J);
    for (auto& row : rep.jacobian) row.push_back(0.0);
    rep.jacobian.push_back({0.0, 0.0, p.eps * (ablation + p.a), -p.eps * ablation});
    const auto ev = eigenvalues3(J);
    rep.eigenvalues.assign(ev.begin(), ev.end());
    rep.eigenvalues.emplace_back(-p.eps * ablation, 0.0);
    rep.stability = classify_stability(rep.eigenvalues);
    const Vec4 f = rhs4(branch, s4, p);
    rep.residual = std::max({std::abs(f[0]), std::abs(f[1]), std::abs(f[2]), std::abs(f[3])});
    rep.filippov_class = classify_equilibrium(s4, branch, p);
    return rep;
}

FilippovClass classify_equilibrium(const ClimateState4& point, Branch branch, const ModelParams& p,
                                   double tol) {
    const double h = mass_balance(point, p);
    if (std::abs(h) < tol) return FilippovClass::Boundary;
    const bool in_retreat_region = h > 0.0;
    const bool own = (branch == Branch::Retreat) == in_retreat_region;
    return own ? FilippovClass::Regular : FilippovClass::Virtual;
}

std::vector<EquilibriumReport> branch_equilibria(Branch branch, const ModelParams& p) {
    std::vector<EquilibriumReport> lifted;
    for (const auto& eq : find_equilibria3(p.T_cS, critical_temperature_north(branch, p), p)) {
        lifted.push_back(lift_to_4d(branch, eq, p));
    }
    return lifted;
}

void verify_insolation_anchor() {
    static constexpr std::array<Vec3, 2> reference{{{-17.118, -0.249, 0.249}, {5.188, -0.955, 0.955}}};
    const ModelParams p = default_params();
    const auto found = find_equilibria3(-10.0, -10.0, p);
    bool ok = found.size() == reference.size();
    for (std::size_t i = 0; ok && i < found.size(); ++i) {
        for (std::size_t k = 0; k < 3; ++k) {
            ok = ok && std::abs(found[i].point[k] - reference[i][k]) < 5e-3;
        }
    }
    if (!ok) {
        throw SolverError("insolation coefficient s_2 = " + std::to_string(p.insolation.s_coeffs.at(1)) +
                          " does not reproduce the reference symmetric equilibria");
    }
}

}  // namespace icelines
