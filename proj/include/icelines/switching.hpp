#pragma once

#include "icelines/model.hpp"

#include <string_view>

namespace icelines {

/// Mass balance h = (a+b) eta_N - b xi_N - a. Positive on the retreat side.
[[nodiscard]] double mass_balance(const ClimateState4& state, const ModelParams& params) noexcept;

/// Ice edge on the switching surface, xi_N = (1 + a/b) eta_N - a/b.
[[nodiscard]] double sigma_ice_edge(double eta_N, const ModelParams& params);

/// Place a reduced state on the switching surface by slaving xi_N to eta_N.
[[nodiscard]] ClimateState4 lift_to_sigma(const ClimateState3& state, const ModelParams& params);

/// Value of w at which the branch field is tangent to the switching surface.
/// Retreat gives the upper-branch curve h_+, Advance the lower one h_-.
[[nodiscard]] double tangency_w(Branch branch, double eta_N, const ModelParams& params);

/// Largest eps for which the two tangency curves stay ordered on all of [-1, 1].
[[nodiscard]] double epsilon_bound(const ModelParams& params);

/// True when h_+ < h_- on an evenly spaced eta_N grid over [-1, 1].
[[nodiscard]] bool separation_holds(const ModelParams& params, int grid_points = 201);

/// Normal (0, 0, 1 + a/b, -1); a positive multiple of grad h.
[[nodiscard]] Vec4 switching_normal(const ModelParams& params) noexcept;

/// Branch field dotted with the switching normal.
[[nodiscard]] double normal_flux(Branch branch, const ClimateState4& state, const ModelParams& params);

enum class SigmaLabel { CrossingPlus, CrossingMinus, Sliding, TangencyPlus, TangencyMinus };

[[nodiscard]] std::string_view to_string(SigmaLabel label) noexcept;

struct SigmaClass {
    SigmaLabel label = SigmaLabel::Sliding;
    double margin_plus = 0.0;   // w - h_+(eta_N)
    double margin_minus = 0.0;  // w - h_-(eta_N)
};

inline constexpr double tangency_band = 1e-9;

/// Classify a point of the switching surface. Crossing-plus points are left by the
/// advance flow (both fields point to h < 0), crossing-minus points by the retreat
/// flow. Throws DomainError if |h| >= on_sigma_tol.
[[nodiscard]] SigmaClass classify_sigma_point(const ClimateState4& state, const ModelParams& params,
                                              double on_sigma_tol = 1e-12);

/// Branch whose region contains the state (h > 0 retreat, h < 0 advance). On the
/// surface itself the branch is the one that carries the trajectory away from it.
[[nodiscard]] Branch region_branch(const ClimateState4& state, const ModelParams& params,
                                   double on_sigma_tol = 1e-12);

}  // namespace icelines
