#include "hopflab/experiments.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "internal.hpp"

namespace hopflab {

CoefficientField CoefficientFamily::instantiate(int n) const {
    CoefficientField f = eps > 0.0
                             ? CoefficientField::isotropic(n, eps, *a_sigma, h_sign, nu)
                             : CoefficientField::identity(n, nu);
    f.drift = drift;
    return f;
}

CoefficientFamily CoefficientFamily::identity() { return {}; }

CoefficientFamily CoefficientFamily::dini() {
    CoefficientFamily fam;
    fam.label = "dini-power-0.5";
    fam.eps = 0.45;
    fam.a_sigma = Modulus::power(0.5);
    fam.h_sign = 1;
    fam.drift = Drift::near_boundary(0.5, Modulus::power(0.5));
    return fam;
}

CoefficientFamily CoefficientFamily::non_dini() {
    CoefficientFamily fam;
    fam.label = "non-dini-logpower-0.5";
    fam.eps = 0.45;
    fam.a_sigma = Modulus::log_power(0.5);
    fam.h_sign = 1;
    return fam;
}

double constant_coefficient_lower_bound(double rho, const Matrix& A0, int n,
                                        const MeshPolicy& mesh, double R) {
    bool is_identity = true;
    for (int i = 0; i < n && is_identity; ++i)
        for (int j = 0; j < n && is_identity; ++j)
            if (A0[i][j] != (i == j ? 1.0 : 0.0)) is_identity = false;
    if (is_identity) return n == 2 ? 1.0 / (rho * std::log(2.0)) : 1.0 / rho;

    CoefficientField f = CoefficientField::frozen(n, A0, 0.5);
    AnnulusProblem p = AnnulusProblem::make(n, rho, mesh.nr, mesh.na, f, R);
    const DiscreteField v = solve_annulus(p);
    return normal_derivative_origin(v, rho);
}

ChainTerms perturbation_chain(double rho, const CoefficientFamily& family, int n,
                              const MeshPolicy& mesh, double R) {
    const CoefficientField field = family.instantiate(n);

    AnnulusProblem v_problem = AnnulusProblem::make(n, rho, mesh.nr, mesh.na, field, R);

    AnnulusProblem z_problem = v_problem;
    z_problem.coefficients.drift = Drift::zero();

    AnnulusProblem psi_problem = v_problem;
    psi_problem.coefficients = freeze_at(v_problem.coefficients, Point{0.0, 0.0, 0.0});

    const double dn_v = normal_derivative_origin(solve_annulus(v_problem), rho);
    const double dn_z = normal_derivative_origin(solve_annulus(z_problem), rho);
    const double dn_psi = normal_derivative_origin(solve_annulus(psi_problem), rho);

    ChainTerms out;
    out.psi_term = dn_psi;
    out.z_minus_psi = std::abs(dn_z - dn_psi);
    out.v_minus_z = std::abs(dn_v - dn_z);
    out.dnv0 = dn_v;
    return out;
}

namespace {

std::vector<double> sorted_descending(std::span<const double> grid) {
    std::vector<double> v(grid.begin(), grid.end());
    std::sort(v.rbegin(), v.rend());
    return v;
}

HopfScanRow elliptic_row(double rho, const CoefficientFamily& family, const MeshPolicy& mesh,
                         int n, double R) {
    HopfScanRow row;
    row.rho = rho;
    try {
        CoefficientField probe = family.instantiate(n);
        probe.center[n - 1] = rho;
        probe.validate(rho);
        const ChainTerms chain = perturbation_chain(rho, family, n, mesh, R);
        row.dnv0 = chain.dnv0;
        row.c = rho * chain.dnv0;
        row.psi_term = chain.psi_term;
        row.z_minus_psi = chain.z_minus_psi;
        row.v_minus_z = chain.v_minus_z;
    } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

HopfScanRow parabolic_row(double rho, const CoefficientFamily& family, const MeshPolicy& mesh,
                          int n, double R, TimeScheme scheme) {
    HopfScanRow row;
    row.rho = rho;
    try {
        CoefficientField field = family.instantiate(n);
        field.center[n - 1] = rho;
        field.validate(rho);
        CylinderProblem v_problem = CylinderProblem::make(n, rho, mesh.nr, mesh.na, mesh.nt,
                                                          field, R);
        v_problem.scheme = scheme;

        CylinderProblem z_problem = v_problem;
        z_problem.coefficients.drift = Drift::zero();

        CylinderProblem psi_problem = v_problem;
        psi_problem.coefficients = freeze_at(v_problem.coefficients, Point{0.0, 0.0, 0.0});

        const double dn_v = normal_derivative_origin(solve_cylinder(v_problem), rho);
        const double dn_z = normal_derivative_origin(solve_cylinder(z_problem), rho);
        const double dn_psi = normal_derivative_origin(solve_cylinder(psi_problem), rho);

        row.dnv0 = dn_v;
        row.c = rho * dn_v;
        row.psi_term = dn_psi;
        row.z_minus_psi = std::abs(dn_z - dn_psi);
        row.v_minus_z = std::abs(dn_v - dn_z);
    } catch (const std::exception& e) {
        row.status = std::string("failed: ") + e.what();
    }
    return row;
}

}  // namespace

HopfScanReport hopf_constant_scan(const CoefficientFamily& family,
                                  std::span<const double> rho_grid, const MeshPolicy& mesh,
                                  int n, double R) {
    HopfScanReport report;
    report.family_label = family.label;
    report.mesh = mesh;
    const std::vector<double> grid = sorted_descending(rho_grid);
    report.rows.resize(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < grid.size(); ++k)
        report.rows[k] = elliptic_row(grid[k], family, mesh, n, R);
    return report;
}

HopfScanReport hopf_constant_scan_serial(const CoefficientFamily& family,
                                         std::span<const double> rho_grid,
                                         const MeshPolicy& mesh, int n, double R) {
    HopfScanReport report;
    report.family_label = family.label;
    report.mesh = mesh;
    for (double rho : sorted_descending(rho_grid))
        report.rows.push_back(elliptic_row(rho, family, mesh, n, R));
    return report;
}

HopfScanReport parabolic_hopf_scan(const CoefficientFamily& family,
                                   std::span<const double> rho_grid, const MeshPolicy& mesh,
                                   int n, double R, TimeScheme scheme) {
    HopfScanReport report;
    report.family_label = family.label;
    report.mesh = mesh;
    const std::vector<double> grid = sorted_descending(rho_grid);
    report.rows.resize(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t k = 0; k < grid.size(); ++k)
        report.rows[k] = parabolic_row(grid[k], family, mesh, n, R, scheme);
    return report;
}

// ---------------------------------------------------------------------------
// Discrete T1 operator
// ---------------------------------------------------------------------------

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Factorized L_0 on the zero-data annulus plus per-node drift and volume
// weights; Green columns are produced on demand from one factorization.
struct T1Workspace {
    AnnulusProblem problem;
    Eigen::SparseLU<SpMat> lu;
    std::vector<double> vol;           // dual-cell volume at node l
    std::vector<double> b0, b1;        // drift components at node l
    int M = 0;

    explicit T1Workspace(double rho, const Drift& b, const MeshPolicy& mesh_policy, double R) {
        if (mesh_policy.nr > 64 || mesh_policy.na > 96)
            throw std::domain_error("T1 mesh capped at 64x96");
        problem = AnnulusProblem::make(2, rho, mesh_policy.nr, mesh_policy.na,
                                       CoefficientField::identity(2, 0.5), R);
        problem.inner_value = 0.0;
        problem.outer_value = 0.0;
        const AnnulusMesh& mesh = problem.mesh;
        M = mesh.num_interior();

        detail::AnnulusSystem sys = detail::assemble_annulus(problem, /*include_drift=*/false);
        lu.analyzePattern(sys.A);
        lu.factorize(sys.A);
        if (lu.info() != Eigen::Success)
            throw SolverError("T1 factorization failed", std::numeric_limits<double>::infinity());

        vol.assign(M, 0.0);
        b0.assign(M, 0.0);
        b1.assign(M, 0.0);
        const int nj = mesh.num_angular_nodes();
        for (int i = 1; i < mesh.nr; ++i)
            for (int j = 0; j < nj; ++j) {
                const int l = mesh.interior_index(i, j);
                vol[l] = mesh.radius(i) * mesh.dr() * mesh.da();
                const Point bv = b.vector(problem.domain, mesh.position(i, j));
                b0[l] = bv[0];
                b1[l] = bv[1];
            }
    }

    // Gradients of the Green column with source l at every interior node:
    // writes 2M values (component 0, then component 1).
    void green_gradients(int l, double* g0, double* g1) const {
        const AnnulusMesh& mesh = problem.mesh;
        const int nj = mesh.num_angular_nodes();
        Eigen::VectorXd e = Eigen::VectorXd::Zero(M);
        e[l] = 1.0;
        const Eigen::VectorXd g = lu.solve(e);
        DiscreteField f;
        f.mesh = mesh;
        f.values.assign(mesh.num_nodes(), 0.0);
        for (int i = 1; i < mesh.nr; ++i)
            for (int j = 0; j < nj; ++j) f.at(i, j) = g[mesh.interior_index(i, j)];
        for (int i = 1; i < mesh.nr; ++i)
            for (int j = 0; j < nj; ++j) {
                const int m = mesh.interior_index(i, j);
                const Point grad = f.gradient(i, j);
                g0[m] = grad[0];
                g1[m] = grad[1];
            }
    }
};

}  // namespace

double estimate_T1_norm(double rho, const Drift& b, const MeshPolicy& mesh, double R) {
    if (b.family() == DriftFamily::Zero) return 0.0;
    const T1Workspace ws(rho, b, mesh, R);
    const int M = ws.M;

    // Row sums accumulate in fixed column order: columns are solved in
    // blocks (parallel inside a block), then folded serially, so the result
    // is bit-identical for any thread count.
    std::vector<double> row0(M, 0.0), row1(M, 0.0);
    constexpr int kBlock = 128;
    std::vector<double> g0(static_cast<std::size_t>(kBlock) * M);
    std::vector<double> g1(static_cast<std::size_t>(kBlock) * M);
    for (int start = 0; start < M; start += kBlock) {
        const int count = std::min(kBlock, M - start);
#pragma omp parallel for schedule(dynamic)
        for (int c = 0; c < count; ++c)
            ws.green_gradients(start + c, &g0[static_cast<std::size_t>(c) * M],
                               &g1[static_cast<std::size_t>(c) * M]);
        for (int c = 0; c < count; ++c) {
            const int l = start + c;
            const double w = (std::abs(ws.b0[l]) + std::abs(ws.b1[l])) * ws.vol[l];
            if (w == 0.0) continue;
            const double* gc0 = &g0[static_cast<std::size_t>(c) * M];
            const double* gc1 = &g1[static_cast<std::size_t>(c) * M];
            for (int m = 0; m < M; ++m) {
                row0[m] += std::abs(gc0[m]) * w;
                row1[m] += std::abs(gc1[m]) * w;
            }
        }
    }
    double best = 0.0;
    for (int m = 0; m < M; ++m) best = std::max({best, row0[m], row1[m]});
    return best;
}

T1Analysis analyze_T1(double rho, const Drift& b, const MeshPolicy& mesh, double R,
                      bool with_inverse) {
    T1Analysis out;
    if (b.family() == DriftFamily::Zero) {
        out.norm = 0.0;
        out.inverse_checked = with_inverse;
        out.inverse_norm = 1.0;
        return out;
    }
    const T1Workspace ws(rho, b, mesh, R);
    const int M = ws.M;
    const int dim = 2 * M;
    out.dim = dim;
    if (with_inverse && dim > 4000)
        throw std::domain_error("T1 inverse check needs a small mesh (dim <= 4000)");

    // T[(k,m),(i,l)] = grad_k green_l(x_m) * b_i(y_l) * vol_l
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<double> g0(M), g1(M);
    for (int l = 0; l < M; ++l) {
        ws.green_gradients(l, g0.data(), g1.data());
        const double w = ws.vol[l];
        for (int m = 0; m < M; ++m) {
            T(m, l) = g0[m] * ws.b0[l] * w;
            T(m, M + l) = g0[m] * ws.b1[l] * w;
            T(M + m, l) = g1[m] * ws.b0[l] * w;
            T(M + m, M + l) = g1[m] * ws.b1[l] * w;
        }
    }

    out.norm = T.cwiseAbs().rowwise().sum().maxCoeff();

    if (with_inverse) {
        // Dz from the actual barrier-precursor solve (data 1 inside, 0 outside).
        AnnulusProblem z_problem = ws.problem;
        z_problem.inner_value = 1.0;
        z_problem.outer_value = 0.0;
        const DiscreteField z = solve_annulus(z_problem);
        const AnnulusMesh& amesh = ws.problem.mesh;
        const int nj = amesh.num_angular_nodes();
        Eigen::VectorXd dz(dim);
        for (int i = 1; i < amesh.nr; ++i)
            for (int j = 0; j < nj; ++j) {
                const int m = amesh.interior_index(i, j);
                const Point g = z.gradient(i, j);
                dz[m] = g[0];
                dz[M + m] = g[1];
            }

        Eigen::MatrixXd IT = Eigen::MatrixXd::Identity(dim, dim) + T;
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(IT);
        const Eigen::VectorXd rhs = -(T * dz);
        const Eigen::VectorXd w = lu.solve(rhs);
        const double rhs_norm = rhs.norm();
        out.solve_residual = rhs_norm == 0.0 ? 0.0 : (IT * w - rhs).norm() / rhs_norm;
        const Eigen::MatrixXd inv = lu.inverse();
        out.inverse_norm = inv.cwiseAbs().rowwise().sum().maxCoeff();
        out.inverse_checked = true;
    }
    return out;
}

}  // namespace hopflab
