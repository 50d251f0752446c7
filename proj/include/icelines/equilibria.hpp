#pragma once

#include "icelines/model.hpp"

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

namespace icelines {

using Matrix3 = std::array<std::array<double, 3>, 3>;

enum class Stability { StableNode, Saddle, Other };
enum class FilippovClass { Regular, Virtual, Boundary, NotApplicable };

[[nodiscard]] std::string_view to_string(Stability s) noexcept;
[[nodiscard]] std::string_view to_string(FilippovClass c) noexcept;

struct EquilibriumReport {
    std::vector<double> point;  // (w, eta_S, eta_N) or (w, eta_S, eta_N, xi_N)
    std::vector<std::vector<double>> jacobian;
    // For lifted points the last entry is the ice-edge eigenvalue -eps * b_branch.
    std::vector<std::complex<double>> eigenvalues;
    Stability stability = Stability::Other;
    FilippovClass filippov_class = FilippovClass::NotApplicable;
    std::optional<Branch> branch;
    double residual = 0.0;  // max-norm of the field at the point

    [[nodiscard]] ClimateState3 state3() const;
    [[nodiscard]] ClimateState4 state4() const;
};

/// Analytic Jacobian of rhs3.
[[nodiscard]] Matrix3 jacobian3(const ClimateState3& state, double T_cS, double T_cN,
                                const ModelParams& params);

/// Roots of the characteristic cubic, Newton-polished, sorted by real then imaginary part.
[[nodiscard]] std::array<std::complex<double>, 3> eigenvalues3(const Matrix3& m);

/// det(m - lambda I).
[[nodiscard]] std::complex<double> characteristic3(const Matrix3& m, std::complex<double> lambda);

[[nodiscard]] Stability classify_stability(const std::vector<std::complex<double>>& eigenvalues);

/// Interior equilibria of rhs3, deduplicated and sorted by w. Empty when no seed converges.
[[nodiscard]] std::vector<EquilibriumReport> find_equilibria3(double T_cS, double T_cN,
                                                              const ModelParams& params);

/// Append the slaved ice edge to an equilibrium of the matching branch's reduced field.
/// Throws DomainError when eq3 is not an equilibrium of that field.
[[nodiscard]] EquilibriumReport lift_to_4d(Branch branch, const EquilibriumReport& eq3,
                                           const ModelParams& params);

/// Regular if the point lies in its own branch's region, virtual if in the other one,
/// boundary if |h| < tol.
[[nodiscard]] FilippovClass classify_equilibrium(const ClimateState4& point, Branch branch,
                                                 const ModelParams& params, double tol = 1e-12);

/// Equilibria of the branch's reduced field (T_cS with the branch's T_cN), lifted and classified.
[[nodiscard]] std::vector<EquilibriumReport> branch_equilibria(Branch branch, const ModelParams& params);

/// Guards the projected insolation coefficient: the default parameter set must
/// reproduce the two reference equilibria of the symmetric case. Throws SolverError.
void verify_insolation_anchor();

}  // namespace icelines
