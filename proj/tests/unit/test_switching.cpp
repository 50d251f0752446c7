#include "icelines/errors.hpp"
#include "icelines/switching.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace icelines;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const ModelParams P = default_params();
const double S2 = P.insolation.s_coeffs[1];

// ordering threshold: h_+ - h_- = (T+ - T-) + a eps (1 - eta)(b+ - b-) / (rho (a + b)) is
// largest at eta = -1
double bound_oracle(const ModelParams& p) {
    return (p.T_cN_minus - p.T_cN_plus) * p.rho * (p.a + p.b) / (2.0 * p.a * (p.b_plus - p.b_minus));
}

// field dotted with (0, 0, 1 + a/b, -1), evaluated on the surface from closed forms
double flux_oracle(double w, double eta_N, double Tc, double b_branch, const ModelParams& p) {
    const double eta_dot = p.rho * (w - oracle::G(eta_N, Tc, S2));
    const double xi = (1.0 + p.a / p.b) * eta_N - p.a / p.b;
    const double xi_dot = p.eps * (b_branch * (eta_N - xi) - p.a * (1.0 - eta_N));
    return (1.0 + p.a / p.b) * eta_dot - xi_dot;
}

}  // namespace

TEST_CASE("mass balance and the surface ice edge") {
    const ClimateState4 s{0.0, -0.5, 0.4, 0.1};
    CHECK_THAT(mass_balance(s, P), WithinAbs(2.8 * 0.4 - 1.75 * 0.1 - 1.05, 1e-15));
    CHECK_THAT(sigma_ice_edge(1.0, P), WithinAbs(1.0, 1e-15));
    CHECK_THAT(sigma_ice_edge(0.0, P), WithinAbs(-0.6, 1e-15));
    CHECK_THROWS_AS(sigma_ice_edge(1.5, P), DomainError);
    for (double eta : {-0.9, -0.2, 0.3, 0.99}) {
        const ClimateState4 on = lift_to_sigma({1.0, -0.95, eta}, P);
        CHECK(std::abs(mass_balance(on, P)) < 1e-14);
        CHECK(on.w == 1.0);
        CHECK(on.eta_N == eta);
    }
    const Vec4 n = switching_normal(P);
    CHECK(n[0] == 0.0);
    CHECK(n[1] == 0.0);
    CHECK_THAT(n[2], WithinAbs(1.6, 1e-15));
    CHECK(n[3] == -1.0);
}

TEST_CASE("epsilon bound") {
    CHECK_THAT(epsilon_bound(P), WithinAbs(0.5714, 1e-4));
    CHECK_THAT(epsilon_bound(P), WithinRel(bound_oracle(P), 1e-14));
    auto q = P;
    q.T_cN_minus = -8.0;
    CHECK_THAT(epsilon_bound(q), WithinRel(bound_oracle(q), 1e-14));
    q.T_cN_minus = q.T_cN_plus;
    CHECK_THROWS_AS(epsilon_bound(q), DomainError);
}

TEST_CASE("tangency curves") {
    for (double eta : {-0.8, 0.0, 0.6}) {
        const double shift_plus = P.a * P.eps * (1 - eta) * (P.b_plus - P.b) / (P.rho * (P.a + P.b));
        const double shift_minus = P.a * P.eps * (1 - eta) * (P.b_minus - P.b) / (P.rho * (P.a + P.b));
        CHECK_THAT(tangency_w(Branch::Retreat, eta, P), WithinAbs(oracle::G(eta, -10.0, S2) + shift_plus, 1e-12));
        CHECK_THAT(tangency_w(Branch::Advance, eta, P), WithinAbs(oracle::G(eta, -5.0, S2) + shift_minus, 1e-12));
        // each branch's flux vanishes on its own tangency curve
        const ClimateState4 on_plus = lift_to_sigma({tangency_w(Branch::Retreat, eta, P), -0.9, eta}, P);
        CHECK(std::abs(normal_flux(Branch::Retreat, on_plus, P)) < 1e-12);
        const ClimateState4 on_minus = lift_to_sigma({tangency_w(Branch::Advance, eta, P), -0.9, eta}, P);
        CHECK(std::abs(normal_flux(Branch::Advance, on_minus, P)) < 1e-12);
    }
}

TEST_CASE("separation below the bound") {
    auto q = P;
    const double bound = epsilon_bound(q);
    for (double eps : {0.01, 0.03, 0.1, 0.3, 0.95 * bound}) {
        q.eps = eps;
        CHECK(separation_holds(q));
        for (int i = 0; i <= 200; ++i) {
            const double eta = -1.0 + 0.01 * i;
            CHECK(tangency_w(Branch::Retreat, eta, q) < tangency_w(Branch::Advance, eta, q));
        }
    }
    q.eps = 1.05 * bound;
    CHECK_FALSE(separation_holds(q));
    q.eps = 0.3;
    q.T_cN_minus = -8.0;
    CHECK_FALSE(separation_holds(q));
}

TEST_CASE("sign table on random surface points") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> eta_dist(-0.94, 0.99);
    std::uniform_real_distribution<double> w_dist(-25.0, 15.0);
    int counts[3] = {0, 0, 0};
    for (int i = 0; i < 1000; ++i) {
        const double eta = eta_dist(rng);
        const double w = w_dist(rng);
        const ClimateState4 s = lift_to_sigma({w, -0.95, eta}, P);
        const double f_plus = flux_oracle(w, eta, P.T_cN_plus, P.b_plus, P);
        const double f_minus = flux_oracle(w, eta, P.T_cN_minus, P.b_minus, P);
        CHECK_THAT(normal_flux(Branch::Retreat, s, P), WithinAbs(f_plus, 1e-9));
        CHECK_THAT(normal_flux(Branch::Advance, s, P), WithinAbs(f_minus, 1e-9));
        if (std::min(std::abs(f_plus), std::abs(f_minus)) < 1e-6) continue;
        const SigmaClass c = classify_sigma_point(s, P);
        if (f_plus < 0.0 && f_minus < 0.0) {
            CHECK(c.label == SigmaLabel::CrossingPlus);
            CHECK(region_branch(s, P) == Branch::Advance);
            ++counts[0];
        } else if (f_plus > 0.0 && f_minus > 0.0) {
            CHECK(c.label == SigmaLabel::CrossingMinus);
            CHECK(region_branch(s, P) == Branch::Retreat);
            ++counts[1];
        } else {
            CHECK(c.label == SigmaLabel::Sliding);
            CHECK_THROWS_AS(region_branch(s, P), SolverError);
            ++counts[2];
        }
    }
    CHECK(counts[0] > 0);
    CHECK(counts[1] > 0);
    CHECK(counts[2] > 0);
}

TEST_CASE("classification of reference points") {
    const double eta = 0.5;
    const double lo = tangency_w(Branch::Retreat, eta, P);
    const double hi = tangency_w(Branch::Advance, eta, P);
    const auto at = [&](double w) { return classify_sigma_point(lift_to_sigma({w, -0.9, eta}, P), P); };
    CHECK(at(lo - 1.0).label == SigmaLabel::CrossingPlus);
    CHECK(at(hi + 1.0).label == SigmaLabel::CrossingMinus);
    CHECK(at(0.5 * (lo + hi)).label == SigmaLabel::Sliding);
    CHECK(at(lo).label == SigmaLabel::TangencyPlus);
    CHECK(at(hi).label == SigmaLabel::TangencyMinus);
    const SigmaClass c = at(lo - 1.0);
    CHECK_THAT(c.margin_plus, WithinAbs(-1.0, 1e-12));
    CHECK(to_string(SigmaLabel::CrossingPlus) == "crossing_plus");
    CHECK(to_string(SigmaLabel::Sliding) == "sliding");

    const ClimateState4 off{0.0, -0.5, 0.5, 0.0};
    CHECK_THROWS_AS(classify_sigma_point(off, P), DomainError);
    CHECK(region_branch(off, P) == (mass_balance(off, P) > 0 ? Branch::Retreat : Branch::Advance));
}
