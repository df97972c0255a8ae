#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hopflab/drift_functionals.hpp"
#include "hopflab/solver.hpp"

namespace hopflab {

/// Modulus-parametrized coefficient family for the scans:
/// a(x) = (1 + eps * sigma_a(|x|) * h(x)) I with h = h_sign * cos(angle
/// about x^rho); eps = 0 degenerates to the identity. The drift rides along.
struct CoefficientFamily {
    std::string label = "identity";
    double nu = 0.5;
    double eps = 0.0;
    std::optional<Modulus> a_sigma;
    int h_sign = 1;
    Drift drift = Drift::zero();

    CoefficientField instantiate(int n) const;

    static CoefficientFamily identity();
    static CoefficientFamily dini();      // Power(1/2) leading + near-boundary drift
    static CoefficientFamily non_dini();  // LogPower(1/2) leading, exploratory
};

struct MeshPolicy {
    int nr = 64;
    int na = 96;
    int nt = 64;
};

/// The three normal-derivative quantities of the perturbation chain at the
/// origin, plus the barrier derivative itself.
struct ChainTerms {
    double psi_term = 0.0;     // D_n psi_0(0), frozen-coefficient anchor
    double z_minus_psi = 0.0;  // |D_n z(0) - D_n psi_0(0)|
    double v_minus_z = 0.0;    // |D_n v(0) - D_n z(0)|
    double dnv0 = 0.0;         // D_n v(0)
};

/// Frozen-coefficient lower-bound anchor: solves the constant-coefficient
/// annulus problem and returns D_n psi_0(0); identity matrices short-circuit
/// to the harmonic closed form.
double constant_coefficient_lower_bound(double rho, const Matrix& A0, int n,
                                        const MeshPolicy& mesh, double R = 1.0);

/// Solves the z / psi / v triple on one mesh and measures the chain.
ChainTerms perturbation_chain(double rho, const CoefficientFamily& family, int n,
                              const MeshPolicy& mesh, double R = 1.0);

struct HopfScanRow {
    double rho = 0.0;
    double dnv0 = 0.0;
    double c = 0.0;  // rho * D_n v(0)
    double psi_term = 0.0;
    double z_minus_psi = 0.0;
    double v_minus_z = 0.0;
    std::string status = "ok";
};

struct HopfScanReport {
    std::string family_label;
    MeshPolicy mesh;
    std::vector<HopfScanRow> rows;  // sorted by rho descending
};

/// Scans c(rho) = rho D_n v(0) across the grid; rows run concurrently,
/// failures mark the row and the scan continues.
HopfScanReport hopf_constant_scan(const CoefficientFamily& family,
                                  std::span<const double> rho_grid, const MeshPolicy& mesh,
                                  int n = 2, double R = 1.0);
HopfScanReport hopf_constant_scan_serial(const CoefficientFamily& family,
                                         std::span<const double> rho_grid,
                                         const MeshPolicy& mesh, int n = 2, double R = 1.0);

/// Parabolic analogue, c_p(rho) = rho D_n v~(0;0) from the cylinder runs.
HopfScanReport parabolic_hopf_scan(const CoefficientFamily& family,
                                   std::span<const double> rho_grid, const MeshPolicy& mesh,
                                   int n = 2, double R = 1.0,
                                   TimeScheme scheme = TimeScheme::CrankNicolson);

struct T1Analysis {
    double norm = 0.0;           // max-row-sum of the assembled discrete T1
    int dim = 0;                 // n x (interior nodes)
    bool inverse_checked = false;
    double inverse_norm = 0.0;   // ||(I+T1)^{-1}||_inf when checked
    double solve_residual = 0.0; // residual of (I+T1) w = -T1 Dz when checked
};

/// Assembles the discrete T1 (rows: gradients of Green columns of L_0 at
/// interior nodes; columns weighted by b and cell volumes) and returns its
/// max-row-sum norm. Mesh capped at 64x96.
double estimate_T1_norm(double rho, const Drift& b, const MeshPolicy& mesh, double R = 1.0);

/// Norm plus the Neumann-series checks on the materialized dense operator;
/// requires a small mesh (interior nodes <= ~1600).
T1Analysis analyze_T1(double rho, const Drift& b, const MeshPolicy& mesh, double R = 1.0,
                      bool with_inverse = true);

}  // namespace hopflab
