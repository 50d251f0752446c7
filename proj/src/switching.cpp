#include "icelines/switching.hpp"

#include "icelines/errors.hpp"

#include <cmath>
#include <string>

namespace icelines {

double mass_balance(const ClimateState4& s, const ModelParams& p) noexcept {
    return (p.a + p.b) * s.eta_N - p.b * s.xi_N - p.a;
}

double sigma_ice_edge(double eta_N, const ModelParams& p) {
    if (!(std::abs(eta_N) <= 1.0)) {
        throw DomainError("eta_N outside [-1, 1]");
    }
    const double ratio = p.a / p.b;
    return (1.0 + ratio) * eta_N - ratio;
}

ClimateState4 lift_to_sigma(const ClimateState3& s, const ModelParams& p) {
    return {s.w, s.eta_S, s.eta_N, sigma_ice_edge(s.eta_N, p)};
}

double tangency_w(Branch branch, double eta_N, const ModelParams& p) {
    const double T_c = critical_temperature_north(branch, p);
    const double ablation = ablation_rate(branch, p);
    return ice_line_nullcline(eta_N, T_c, p) +
           p.a * p.eps * (1.0 - eta_N) * (ablation - p.b) / (p.rho * (p.a + p.b));
}

double epsilon_bound(const ModelParams& p) {
    if (!(p.T_cN_minus > p.T_cN_plus)) {
        throw DomainError("epsilon bound needs T_cN_minus > T_cN_plus");
    }
    return (p.T_cN_minus - p.T_cN_plus) * p.rho * (p.a + p.b) / (2.0 * p.a * (p.b_plus - p.b_minus));
}

bool separation_holds(const ModelParams& p, int grid_points) {
    if (grid_points < 2) {
        throw DomainError("separation grid needs at least two points");
    }
    for (int i = 0; i < grid_points; ++i) {
        const double eta = -1.0 + 2.0 * i / (grid_points - 1);
        if (!(tangency_w(Branch::Retreat, eta, p) < tangency_w(Branch::Advance, eta, p))) {
            return false;
        }
    }
    return true;
}

Vec4 switching_normal(const ModelParams& p) noexcept {
    return {0.0, 0.0, 1.0 + p.a / p.b, -1.0};
}

double normal_flux(Branch branch, const ClimateState4& s, const ModelParams& p) {
    const Vec4 f = rhs4(branch, s, p);
    const Vec4 n = switching_normal(p);
    return f[2] * n[2] + f[3] * n[3];
}

std::string_view to_string(SigmaLabel label) noexcept {
    switch (label) {
        case SigmaLabel::CrossingPlus:
            return "crossing_plus";
        case SigmaLabel::CrossingMinus:
            return "crossing_minus";
        case SigmaLabel::Sliding:
            return "sliding";
        case SigmaLabel::TangencyPlus:
            return "tangency_plus";
        case SigmaLabel::TangencyMinus:
            return "tangency_minus";
    }
    return "sliding";
}

SigmaClass classify_sigma_point(const ClimateState4& s, const ModelParams& p, double on_sigma_tol) {
    const double h = mass_balance(s, p);
    if (!(std::abs(h) < on_sigma_tol)) {
        throw DomainError("point is not on the switching surface (h = " + std::to_string(h) + ")");
    }
    SigmaClass cls;
    cls.margin_plus = s.w - tangency_w(Branch::Retreat, s.eta_N, p);
    cls.margin_minus = s.w - tangency_w(Branch::Advance, s.eta_N, p);
    if (std::abs(cls.margin_plus) < tangency_band) {
        cls.label = SigmaLabel::TangencyPlus;
    } else if (std::abs(cls.margin_minus) < tangency_band) {
        cls.label = SigmaLabel::TangencyMinus;
    } else if (cls.margin_plus < 0.0 && cls.margin_minus < 0.0) {
        cls.label = SigmaLabel::CrossingPlus;
    } else if (cls.margin_plus > 0.0 && cls.margin_minus > 0.0) {
        cls.label = SigmaLabel::CrossingMinus;
    } else {
        // between the curves; attracting instead of repelling when they are out of order
        cls.label = SigmaLabel::Sliding;
    }
    return cls;
}

Branch region_branch(const ClimateState4& s, const ModelParams& p, double on_sigma_tol) {
    const double h = mass_balance(s, p);
    if (h >= on_sigma_tol) return Branch::Retreat;
    if (h <= -on_sigma_tol) return Branch::Advance;
    const SigmaClass cls = classify_sigma_point(s, p, on_sigma_tol);
    if (cls.label == SigmaLabel::CrossingPlus) return Branch::Advance;
    if (cls.label == SigmaLabel::CrossingMinus) return Branch::Retreat;
    throw SolverError("state lies on the switching surface outside the crossing regions (" +
                      std::string(to_string(cls.label)) + ")");
}

}  // namespace icelines
