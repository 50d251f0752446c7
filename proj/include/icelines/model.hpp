#pragma once

#include "icelines/legendre.hpp"

#include <array>
#include <functional>
#include <string_view>
#include <vector>

namespace icelines {

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

/// Northern Hemisphere regime. Advance pairs (T_cN_minus, b_minus), Retreat pairs
/// (T_cN_plus, b_plus).
enum class Branch { Advance, Retreat };

[[nodiscard]] std::string_view to_string(Branch branch) noexcept;
[[nodiscard]] Branch opposite(Branch branch) noexcept;

/// Energy-balance, albedo-line and mass-balance constants. Time unit is the year.
struct ModelParams {
    double R = 1.0;        // heat capacity
    double Q = 343.0;      // mean insolation, W m^-2
    double A = 202.0;      // W m^-2
    double B = 1.9;        // W m^-2 K^-1
    double C = 3.04;       // W m^-2 K^-1
    double alpha1 = 0.32;  // equatorward of the albedo lines
    double alpha2 = 0.62;  // poleward of the albedo lines
    double T_cS = -10.0;
    double T_cN_plus = -10.0;   // retreat
    double T_cN_minus = -5.0;   // advance
    double rho = 0.3;           // K^-1 yr^-1
    double a = 1.05;            // accumulation
    double b = 1.75;            // critical ablation
    double b_minus = 1.5;       // glacial ablation
    double b_plus = 5.0;        // interglacial ablation
    double eps = 0.03;          // yr^-1
    InsolationModel insolation;

    bool operator==(const ModelParams&) const = default;

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
};

/// Reference constants with the insolation projected at 23.5 degrees, M = 1.
[[nodiscard]] ModelParams default_params();

struct DerivedConstants {
    double L = 0.0;       // Q / (B + C)
    double alpha0 = 0.0;  // mean albedo at an ice line
    double z_star = 0.0;  // equilibrium u_0 - v_0
    std::vector<double> u_star;  // index m - 1 holds the 2m mode, m >= 1
    std::vector<double> v_star;
};

[[nodiscard]] DerivedConstants derive(const ModelParams& params);

struct ClimateState3 {
    double w = 0.0;
    double eta_S = 0.0;
    double eta_N = 0.0;

    [[nodiscard]] Vec3 to_array() const noexcept { return {w, eta_S, eta_N}; }
    [[nodiscard]] static ClimateState3 from_array(const Vec3& v) noexcept { return {v[0], v[1], v[2]}; }
    bool operator==(const ClimateState3&) const = default;
};

struct ClimateState4 {
    double w = 0.0;
    double eta_S = 0.0;
    double eta_N = 0.0;
    double xi_N = 0.0;

    [[nodiscard]] Vec4 to_array() const noexcept { return {w, eta_S, eta_N, xi_N}; }
    [[nodiscard]] static ClimateState4 from_array(const Vec4& v) noexcept {
        return {v[0], v[1], v[2], v[3]};
    }
    [[nodiscard]] ClimateState3 reduced() const noexcept { return {w, eta_S, eta_N}; }
    bool operator==(const ClimateState4&) const = default;
};

[[nodiscard]] double distance(const ClimateState4& lhs, const ClimateState4& rhs) noexcept;

/// Strict interior of the reduced / full state space.
[[nodiscard]] bool in_interior(const ClimateState3& state) noexcept;
[[nodiscard]] bool in_interior(const ClimateState4& state) noexcept;

[[nodiscard]] double critical_temperature_north(Branch branch, const ModelParams& params) noexcept;
[[nodiscard]] double ablation_rate(Branch branch, const ModelParams& params) noexcept;

/// Value of w on the w-nullcline, i.e. the relaxation target of the global temperature.
[[nodiscard]] double w_nullcline(double eta_S, double eta_N, const ModelParams& params);

/// Value of w on an ice-line nullcline with critical temperature T_c.
[[nodiscard]] double ice_line_nullcline(double eta, double T_c, const ModelParams& params);

/// Reduced (w, eta_S, eta_N) field with separate southern/northern critical temperatures.
[[nodiscard]] Vec3 rhs3(const ClimateState3& state, double T_cS, double T_cN,
                        const ModelParams& params);

/// Full field of one branch; components 1-3 coincide with rhs3 at that branch's T_cN.
[[nodiscard]] Vec4 rhs4(Branch branch, const ClimateState4& state, const ModelParams& params);

/// Piecewise-polynomial temperature reconstructed from the reduced state.
struct TemperatureProfile {
    std::vector<double> u;  // poleward of eta_S
    std::vector<double> v;  // between the albedo lines
    std::vector<double> w;  // poleward of eta_N
    double eta_S = 0.0;
    double eta_N = 0.0;
    double mean = 0.0;
    double at_eta_S = 0.0;
    double at_eta_N = 0.0;

    /// T(y); at an albedo line returns the average of the two adjacent pieces.
    [[nodiscard]] double operator()(double y) const;
};

[[nodiscard]] TemperatureProfile temperature_profile(double w, double eta_S, double eta_N,
                                                     const ModelParams& params);

/// Unreduced mode system: u_{2m}, v_{2m}, w_{2m} for m = 0..M plus both albedo lines.
struct SpectralState {
    std::vector<double> u;
    std::vector<double> v;
    std::vector<double> w_modes;
    double eta_S = 0.0;
    double eta_N = 0.0;

    [[nodiscard]] std::vector<double> flatten() const;
    [[nodiscard]] static SpectralState unflatten(const std::vector<double>& flat, int M);
};

[[nodiscard]] SpectralState spectral_rhs(const SpectralState& state, double T_cS, double T_cN,
                                         const ModelParams& params);

}  // namespace icelines
