#include "hopflab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "internal.hpp"

namespace hopflab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

constexpr double kResidualContract = 1e-10;

double relative_residual(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    const double bn = b.norm();
    if (bn == 0.0) return (A * x).norm();
    return (A * x - b).norm() / bn;
}

Eigen::VectorXd direct_solve(const SpMat& A, const Eigen::VectorXd& b, double* residual_out) {
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw SolverError("sparse factorization failed", std::numeric_limits<double>::infinity());
    Eigen::VectorXd x = lu.solve(b);
    const double res = relative_residual(A, x, b);
    if (residual_out) *residual_out = res;
    if (!(res <= kResidualContract))
        throw SolverError("linear solve missed the 1e-10 residual contract", res);
    return x;
}

struct PolarTensor {
    double arr, art, att;
};

// Coefficient tensor in the local polar frame at radius r, angle a about
// the annulus center.
PolarTensor polar_tensor(const CoefficientField& coeff, const AnnulusMesh& mesh, double r,
                         double a) {
    Point pos;
    if (mesh.n == 2)
        pos = {r * std::sin(a), mesh.rho - r * std::cos(a), 0.0};
    else
        pos = {r * std::sin(a), 0.0, mesh.rho - r * std::cos(a)};

    if (coeff.isotropic_kind()) {
        const double g = coeff.scalar(pos);
        return {g, 0.0, g};
    }
    // Scalar frozen matrices take the same arithmetic path as the isotropic
    // kinds, so freezing an isotropic field reproduces its system bit-exactly.
    const double g0 = coeff.A0[0][0];
    bool scalar_matrix = true;
    for (int i = 0; i < mesh.n && scalar_matrix; ++i)
        for (int j = 0; j < mesh.n && scalar_matrix; ++j)
            if (coeff.A0[i][j] != (i == j ? g0 : 0.0)) scalar_matrix = false;
    if (scalar_matrix || mesh.n == 3) return {g0, 0.0, g0};

    const double er0 = std::sin(a), er1 = -std::cos(a);
    const double et0 = std::cos(a), et1 = std::sin(a);
    const Matrix& A = coeff.A0;
    const double a00 = A[0][0], a01 = A[0][1], a11 = A[1][1];
    const double arr = er0 * (a00 * er0 + a01 * er1) + er1 * (a01 * er0 + a11 * er1);
    const double art = er0 * (a00 * et0 + a01 * et1) + er1 * (a01 * et0 + a11 * et1);
    const double att = et0 * (a00 * et0 + a01 * et1) + et1 * (a01 * et0 + a11 * et1);
    return {arr, art, att};
}

}  // namespace

// Conservative second-order discretization of L = -div(a grad) [+ b . grad]
// on the annulus, in integrated (flux-balance) form. Dirichlet rings are
// eliminated into boundary_rhs. Drift uses central differences, switching to
// upwind per direction when the cell Peclet number exceeds 2.
detail::AnnulusSystem detail::assemble_annulus(const AnnulusProblem& problem,
                                               bool include_drift) {
    const AnnulusMesh& mesh = problem.mesh;
    const CoefficientField& coeff = problem.coefficients;
    const int n = mesh.n;
    const int nj = mesh.num_angular_nodes();
    const int N = mesh.num_interior();
    const double dr = mesh.dr(), da = mesh.da();

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(N) * 12);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N);

    if (n == 3 && include_drift && coeff.drift.family() == DriftFamily::Constant) {
        const Point& bv = coeff.drift.constant_vector();
        if (bv[0] != 0.0 || bv[1] != 0.0)
            throw std::domain_error(
                "n = 3 axisymmetric solves need an e_n-aligned constant drift");
    }

    auto bval = [&](int i, int j) {
        if (problem.dirichlet) return problem.dirichlet(mesh.position(i, j));
        return i == 0 ? problem.inner_value : problem.outer_value;
    };

    for (int i = 1; i < mesh.nr; ++i) {
        for (int j = 0; j < nj; ++j) {
            const int row = mesh.interior_index(i, j);
            auto add = [&](int i2, int j2, double coef) {
                if (coef == 0.0) return;
                if (n == 2) {
                    j2 = (j2 % nj + nj) % nj;
                } else {
                    // Axis reflection: the meridian continues across the pole
                    // onto itself, d/dphi vanishes there by symmetry.
                    if (j2 < 0) j2 = -j2;
                    if (j2 >= nj) j2 = 2 * (nj - 1) - j2;
                }
                if (mesh.is_interior(i2))
                    trips.emplace_back(row, mesh.interior_index(i2, j2), coef);
                else
                    rhs[row] -= coef * bval(i2, j2);
            };

            const double r = mesh.radius(i);
            const double a = mesh.angle(j);

            if (n == 2) {
                for (int s : {+1, -1}) {  // radial faces, contribution -s*F*da
                    const double rf = r + s * 0.5 * dr;
                    const PolarTensor T = polar_tensor(coeff, mesh, rf, a);
                    const double w = da * rf * T.arr / dr;
                    add(i, j, w);
                    add(i + s, j, -w);
                    const double m = s * T.art / 4.0;  // da cancels
                    add(i, j + 1, -m);
                    add(i + s, j + 1, -m);
                    add(i, j - 1, m);
                    add(i + s, j - 1, m);
                }
                for (int s : {+1, -1}) {  // angular faces, contribution -s*G*dr
                    const double af = a + s * 0.5 * da;
                    const PolarTensor T = polar_tensor(coeff, mesh, r, af);
                    const double w = dr * (T.att / r) / da;
                    add(i, j, w);
                    add(i, j + s, -w);
                    const double m = s * T.art / 4.0;  // dr cancels
                    add(i + 1, j, -m);
                    add(i + 1, j + s, -m);
                    add(i - 1, j, m);
                    add(i - 1, j + s, m);
                }
            } else {
                const double phi_lo = std::max(0.0, a - 0.5 * da);
                const double phi_hi = std::min(M_PI, a + 0.5 * da);
                const double w_phi = std::cos(phi_lo) - std::cos(phi_hi);
                for (int s : {+1, -1}) {
                    const double rf = r + s * 0.5 * dr;
                    const double g = polar_tensor(coeff, mesh, rf, a).arr;
                    const double w = 2.0 * M_PI * rf * rf * w_phi * g / dr;
                    add(i, j, w);
                    add(i + s, j, -w);
                }
                for (int s : {+1, -1}) {
                    const double af = a + s * 0.5 * da;
                    if (af <= 0.0 || af >= M_PI) continue;  // pole: zero-area face
                    const double g = polar_tensor(coeff, mesh, r, af).arr;
                    const double w = 2.0 * M_PI * std::sin(af) * dr * g / da;
                    add(i, j, w);
                    add(i, j + s, -w);
                }
            }

            if (!include_drift || coeff.drift.family() == DriftFamily::Zero) continue;

            const Point pos = mesh.position(i, j);
            const Point bv = coeff.drift.vector(problem.domain, pos);
            double br, bt;
            if (n == 2) {
                const double er0 = std::sin(a), er1 = -std::cos(a);
                br = bv[0] * er0 + bv[1] * er1;
                bt = bv[0] * std::cos(a) + bv[1] * std::sin(a);
            } else {
                const double er0 = std::sin(a), er2 = -std::cos(a);
                br = bv[0] * er0 + bv[2] * er2;
                bt = bv[0] * std::cos(a) + bv[2] * std::sin(a);
            }
            if (br == 0.0 && bt == 0.0) continue;

            const double vol = n == 2
                                   ? r * dr * da
                                   : 2.0 * M_PI * r * r * dr *
                                         (std::cos(std::max(0.0, a - 0.5 * da)) -
                                          std::cos(std::min(M_PI, a + 0.5 * da)));
            const PolarTensor Tn = polar_tensor(coeff, mesh, r, a);

            // radial advection
            if (br != 0.0) {
                const double pe = std::abs(br) * dr / std::max(Tn.arr, 1e-300);
                if (pe <= 2.0) {
                    const double w = vol * br / (2.0 * dr);
                    add(i + 1, j, w);
                    add(i - 1, j, -w);
                } else if (br > 0.0) {
                    const double w = vol * br / dr;
                    add(i, j, w);
                    add(i - 1, j, -w);
                } else {
                    const double w = vol * br / dr;
                    add(i + 1, j, w);
                    add(i, j, -w);
                }
            }
            // angular advection
            if (bt != 0.0) {
                const double pe = std::abs(bt) * r * da / std::max(Tn.att, 1e-300);
                if (pe <= 2.0) {
                    const double w = vol * bt / (r * 2.0 * da);
                    add(i, j + 1, w);
                    add(i, j - 1, -w);
                } else if (bt > 0.0) {
                    const double w = vol * bt / (r * da);
                    add(i, j, w);
                    add(i, j - 1, -w);
                } else {
                    const double w = vol * bt / (r * da);
                    add(i, j + 1, w);
                    add(i, j, -w);
                }
            }
        }
    }

    detail::AnnulusSystem sys;
    sys.A.resize(N, N);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    sys.boundary_rhs = std::move(rhs);
    return sys;
}

namespace {

DiscreteField field_from_solution(const AnnulusProblem& problem, const Eigen::VectorXd& u,
                                  double residual) {
    const AnnulusMesh& mesh = problem.mesh;
    DiscreteField f;
    f.mesh = mesh;
    f.residual = residual;
    f.values.assign(mesh.num_nodes(), 0.0);
    const int nj = mesh.num_angular_nodes();
    for (int j = 0; j < nj; ++j) {
        if (problem.dirichlet) {
            f.at(0, j) = problem.dirichlet(mesh.position(0, j));
            f.at(mesh.nr, j) = problem.dirichlet(mesh.position(mesh.nr, j));
        } else {
            f.at(0, j) = problem.inner_value;
            f.at(mesh.nr, j) = problem.outer_value;
        }
    }
    for (int i = 1; i < mesh.nr; ++i)
        for (int j = 0; j < nj; ++j) f.at(i, j) = u[mesh.interior_index(i, j)];
    return f;
}

}  // namespace

AnnulusProblem AnnulusProblem::make(int n, double rho, int nr, int na, CoefficientField coeff,
                                    double R) {
    if (n < 2 || n > 3) throw std::domain_error("annulus problems support n in {2,3}");
    if (!(rho > 0.0 && rho <= R / 2.0))
        throw std::domain_error("annulus needs 0 < rho <= R/2");
    if (nr < 4 || na < 4) throw std::domain_error("annulus mesh needs nr, na >= 4");
    AnnulusProblem p;
    p.mesh = AnnulusMesh{n, rho, nr, na};
    coeff.n = n;
    coeff.center = Point{0.0, 0.0, 0.0};
    coeff.center[n - 1] = rho;
    p.coefficients = std::move(coeff);
    p.domain = DomainModel{DomainKind::Elliptic, n, R, Modulus::power(1.0)};
    return p;
}

CylinderProblem CylinderProblem::make(int n, double rho, int nr, int na, int nt,
                                      CoefficientField coeff, double R) {
    if (n < 1 || n > 2) throw std::domain_error("cylinder problems support spatial n in {1,2}");
    if (!(rho > 0.0 && rho <= R / 2.0))
        throw std::domain_error("cylinder needs 0 < rho <= R/2");
    if (nr < 4 || nt < 1 || (n == 2 && (na < 4 || na % 2 != 0)))
        throw std::domain_error("cylinder mesh needs nr >= 4, nt >= 1, even na >= 4");
    CylinderProblem p;
    p.mesh = DiscMesh{n, rho, nr, na};
    coeff.n = n;
    coeff.center = Point{0.0, 0.0, 0.0};
    coeff.center[n - 1] = rho;
    p.coefficients = std::move(coeff);
    p.domain = DomainModel{DomainKind::Parabolic, n, R, Modulus::power(1.0)};
    p.nt = nt;
    return p;
}

double cutoff_phi(double s) {
    const double x = std::abs(s);
    if (x <= 0.5) return 1.0;
    if (x >= 0.75) return 0.0;
    const double u = (x - 0.5) / 0.25;
    return 1.0 - (((6.0 * u - 15.0) * u + 10.0) * u * u * u);
}

Point DiscreteField::gradient(int i, int j) const {
    if (!mesh.is_interior(i)) throw std::domain_error("gradient at a boundary ring node");
    const int nj = mesh.num_angular_nodes();
    const double dr = mesh.dr(), da = mesh.da();
    const double r = mesh.radius(i);
    const double du_dr = (at(i + 1, j) - at(i - 1, j)) / (2.0 * dr);
    double du_da;
    if (mesh.n == 2) {
        du_da = (at(i, (j + 1) % nj) - at(i, (j - 1 + nj) % nj)) / (2.0 * da);
    } else {
        const int jp = j + 1 >= nj ? 2 * (nj - 1) - (j + 1) : j + 1;
        const int jm = j - 1 < 0 ? 1 : j - 1;
        du_da = (at(i, jp) - at(i, jm)) / (2.0 * da);
        if (j == 0 || j == nj - 1) du_da = 0.0;  // axis symmetry
    }
    const double a = mesh.angle(j);
    Point g{0.0, 0.0, 0.0};
    const double gr = du_dr, gt = du_da / r;
    if (mesh.n == 2) {
        g[0] = gr * std::sin(a) + gt * std::cos(a);
        g[1] = -gr * std::cos(a) + gt * std::sin(a);
    } else {
        g[0] = gr * std::sin(a) + gt * std::cos(a);
        g[2] = -gr * std::cos(a) + gt * std::sin(a);
    }
    return g;
}

double DiscreteField::max_abs_gradient() const {
    double best = 0.0;
    const int nj = mesh.num_angular_nodes();
    for (int i = 1; i < mesh.nr; ++i)
        for (int j = 0; j < nj; ++j) best = std::max(best, norm(gradient(i, j), 3));
    return best;
}

DiscreteField solve_annulus(const AnnulusProblem& problem) {
    detail::AnnulusSystem sys = detail::assemble_annulus(problem, /*include_drift=*/true);
    double residual = 0.0;
    const Eigen::VectorXd u = direct_solve(sys.A, sys.boundary_rhs, &residual);
    return field_from_solution(problem, u, residual);
}

DiscreteField discrete_green_column(const AnnulusProblem& problem, int src_i, int src_j) {
    const AnnulusMesh& mesh = problem.mesh;
    if (!mesh.is_interior(src_i) || src_j < 0 || src_j >= mesh.num_angular_nodes())
        throw std::domain_error("green column source must be an interior node");
    AnnulusProblem zero_bc = problem;
    zero_bc.inner_value = 0.0;
    zero_bc.outer_value = 0.0;
    zero_bc.dirichlet = nullptr;
    detail::AnnulusSystem sys = detail::assemble_annulus(zero_bc, /*include_drift=*/false);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(mesh.num_interior());
    delta[mesh.interior_index(src_i, src_j)] = 1.0;  // integrated point source
    double residual = 0.0;
    const Eigen::VectorXd u = direct_solve(sys.A, delta, &residual);
    return field_from_solution(zero_bc, u, residual);
}

double normal_derivative_origin(const DiscreteField& field, double rho) {
    const AnnulusMesh& mesh = field.mesh;
    if (std::abs(mesh.rho - rho) > 1e-12 * std::max(1.0, rho))
        throw std::domain_error("field mesh does not place the origin on its outer ring");
    const double dr = mesh.dr();
    // One-sided second order along the theta = 0 ray; D_n = -d/dr there.
    // Grouped as differences so constant fields give an exact zero.
    const double u0 = field.at(mesh.nr, 0);
    const double u1 = field.at(mesh.nr - 1, 0);
    const double u2 = field.at(mesh.nr - 2, 0);
    return (3.0 * (u1 - u0) + (u1 - u2)) / (2.0 * dr);
}

// --------------------------------------------------------------------------
// Parabolic cylinder solver (cell-centered FV disc/interval + theta-method)
// --------------------------------------------------------------------------

namespace {

struct DiscSystem {
    SpMat A;              // stiffness, integrated form
    Eigen::VectorXd vol;  // cell volumes (mass diagonal)
};

// Cell-centered FV discretization of -div(a grad u) + b . grad u on the disc
// (n = 2, staggered off the origin) or interval (n = 1). Lateral walls are
// homogeneous Dirichlet, imposed through half-cell face fluxes; wall terms
// in the drift stencils drop for the same reason. The drift is evaluated at
// time `t_eval` (d_p-weighted families are time dependent).
DiscSystem assemble_disc(const CylinderProblem& problem, bool include_drift, double t_eval) {
    const DiscMesh& mesh = problem.mesh;
    const CoefficientField& coeff = problem.coefficients;
    const int n = mesh.n;
    const int nj = mesh.num_angular();
    const int N = mesh.num_cells();
    const double dr = mesh.dr(), da = mesh.da();

    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(N) * 8);
    Eigen::VectorXd vol(N);

    auto scalar_at = [&](double r, double a) {
        Point pos = n == 1 ? Point{r, 0.0, 0.0}
                           : Point{r * std::sin(a), mesh.rho - r * std::cos(a), 0.0};
        return coeff.scalar(pos);
    };

    for (int i = 0; i < mesh.nr; ++i) {
        for (int j = 0; j < nj; ++j) {
            const int row = mesh.cell_index(i, j);
            auto add = [&](int i2, int j2, double coef) {
                if (coef == 0.0) return;
                j2 = nj == 1 ? 0 : (j2 % nj + nj) % nj;
                trips.emplace_back(row, mesh.cell_index(i2, j2), coef);
            };

            const double r = mesh.radius(i);
            const double a = mesh.angle(j);
            vol[row] = n == 1 ? dr : r * dr * da;

            // Diffusive face fluxes.
            const bool outer_wall = i == mesh.nr - 1;
            const bool inner_wall = n == 1 && i == 0;  // n=2 inner face has zero area
            for (int s : {+1, -1}) {
                if (n == 2 && s < 0 && i == 0) continue;
                const bool wall = (s > 0 && outer_wall) || (s < 0 && inner_wall);
                const double rf = wall ? (s > 0 ? (n == 1 ? 2.0 * mesh.rho : mesh.rho) : 0.0)
                                       : r + s * 0.5 * dr;
                const double g = scalar_at(rf, a);
                const double face = n == 1 ? 1.0 : rf * da;
                const double h = wall ? 0.5 * dr : dr;
                const double w = face * g / h;
                add(i, j, w);
                if (!wall) add(i + s, j, -w);  // wall value 0 drops
            }
            if (n == 2) {
                for (int s : {+1, -1}) {
                    const double g = scalar_at(r, a + s * 0.5 * da);
                    const double w = dr * g / (r * da);
                    add(i, j, w);
                    add(i, j + s, -w);
                }
            }

            if (!include_drift || coeff.drift.family() == DriftFamily::Zero) continue;

            const Point pos = mesh.position(i, j);
            const Point bv = coeff.drift.vector(problem.domain, pos, t_eval);
            double br, bt;
            if (n == 1) {
                br = bv[0];
                bt = 0.0;
            } else {
                br = bv[0] * std::sin(a) - bv[1] * std::cos(a);
                bt = bv[0] * std::cos(a) + bv[1] * std::sin(a);
            }
            if (br == 0.0 && bt == 0.0) continue;

            const double g0 = scalar_at(r, a);
            const double cvol = vol[row];

            if (br != 0.0) {
                // Radial neighbors: walls sit half a cell away with value 0;
                // for n = 2 the minus neighbor of the first ring is the
                // across-origin mirror cell one full spacing away.
                const bool plus_wall = outer_wall;
                const double h_p = plus_wall ? 0.5 * dr : dr;
                bool minus_wall = false, minus_mirror = false;
                double h_m = dr;
                if (i == 0) {
                    if (n == 1) {
                        minus_wall = true;
                        h_m = 0.5 * dr;
                    } else {
                        minus_mirror = true;
                    }
                }
                auto add_plus = [&](double w) {
                    if (!plus_wall) add(i + 1, j, w);
                };
                auto add_minus = [&](double w) {
                    if (minus_wall) return;
                    if (minus_mirror)
                        add(0, j + nj / 2, w);
                    else
                        add(i - 1, j, w);
                };
                const double pe = std::abs(br) * dr / g0;
                if (pe <= 2.0) {
                    // nonuniform central first derivative
                    const double cp = h_m / (h_p * (h_m + h_p));
                    const double cm = -h_p / (h_m * (h_m + h_p));
                    const double c0 = (h_p - h_m) / (h_p * h_m);
                    add_plus(cvol * br * cp);
                    add_minus(cvol * br * cm);
                    add(i, j, cvol * br * c0);
                } else if (br > 0.0) {
                    add(i, j, cvol * br / h_m);
                    add_minus(-cvol * br / h_m);
                } else {
                    add_plus(cvol * br / h_p);
                    add(i, j, -cvol * br / h_p);
                }
            }
            if (n == 2 && bt != 0.0) {
                const double pe = std::abs(bt) * r * da / g0;
                if (pe <= 2.0) {
                    const double w = cvol * bt / (r * 2.0 * da);
                    add(i, j + 1, w);
                    add(i, j - 1, -w);
                } else if (bt > 0.0) {
                    const double w = cvol * bt / (r * da);
                    add(i, j, w);
                    add(i, j - 1, -w);
                } else {
                    const double w = cvol * bt / (r * da);
                    add(i, j + 1, w);
                    add(i, j, -w);
                }
            }
        }
    }

    DiscSystem sys;
    sys.A.resize(N, N);
    sys.A.setFromTriplets(trips.begin(), trips.end());
    sys.vol = std::move(vol);
    return sys;
}

bool drift_is_time_dependent(const CoefficientField& coeff) {
    return coeff.drift.family() == DriftFamily::NearBoundary;
}

}  // namespace

double SpaceTimeField::max_abs_gradient() const {
    const int nj = mesh.num_angular();
    const double dr = mesh.dr(), da = mesh.da();
    double best = 0.0;
    for (const auto& u : slices) {
        for (int i = 0; i < mesh.nr; ++i) {
            for (int j = 0; j < nj; ++j) {
                const double r = mesh.radius(i);
                // radial difference with wall (value 0, half spacing) and
                // across-origin mirror substitutions
                double up = 0.0, h_p = 0.5 * dr;
                if (i + 1 <= mesh.nr - 1) {
                    up = u[mesh.cell_index(i + 1, j)];
                    h_p = dr;
                }
                double dn = 0.0, h_m = 0.5 * dr;
                if (i - 1 >= 0) {
                    dn = u[mesh.cell_index(i - 1, j)];
                    h_m = dr;
                } else if (mesh.n == 2) {
                    dn = u[mesh.cell_index(0, (j + nj / 2) % nj)];
                    h_m = dr;
                }
                const double u0 = u[mesh.cell_index(i, j)];
                const double gr = (up - u0) / h_p * (h_m / (h_m + h_p)) +
                                  (u0 - dn) / h_m * (h_p / (h_m + h_p));
                double grad2 = gr * gr;
                if (mesh.n == 2) {
                    const double gt = (u[mesh.cell_index(i, (j + 1) % nj)] -
                                       u[mesh.cell_index(i, (j - 1 + nj) % nj)]) /
                                      (2.0 * da) / r;
                    grad2 += gt * gt;
                }
                best = std::max(best, std::sqrt(grad2));
            }
        }
    }
    return best;
}

SpaceTimeField solve_cylinder(const CylinderProblem& problem) {
    const DiscMesh& mesh = problem.mesh;
    const int N = mesh.num_cells();
    const double dt = mesh.rho * mesh.rho / problem.nt;
    const double t0 = -mesh.rho * mesh.rho;

    SpaceTimeField out;
    out.mesh = mesh;
    out.nt = problem.nt;
    out.dt = dt;
    out.slices.reserve(problem.nt + 1);

    // Initial slice at t = -rho^2.
    std::vector<double> u0(N);
    for (int i = 0; i < mesh.nr; ++i) {
        for (int j = 0; j < mesh.num_angular(); ++j) {
            const double scaled = mesh.n == 1 ? std::abs(mesh.radius(i) - mesh.rho) / mesh.rho
                                              : mesh.radius(i) / mesh.rho;
            const double v = problem.initial_scaled_radial ? problem.initial_scaled_radial(scaled)
                                                           : cutoff_phi(scaled);
            u0[mesh.cell_index(i, j)] = v;
        }
    }
    out.slices.push_back(u0);

    const double theta = problem.scheme == TimeScheme::CrankNicolson ? 0.5 : 1.0;
    SpMat M(N, N);
    {
        std::vector<Triplet> mt;
        mt.reserve(N);
        DiscSystem probe = assemble_disc(problem, /*include_drift=*/false, t0);
        for (int k = 0; k < N; ++k) mt.emplace_back(k, k, probe.vol[k]);
        M.setFromTriplets(mt.begin(), mt.end());
    }

    // d_p-weighted drifts vary with t; rebuild the operator each step then.
    const bool rebuild = drift_is_time_dependent(problem.coefficients);

    Eigen::SparseLU<SpMat> lu;
    SpMat lhs, rhs_op;
    auto build = [&](double t_mid) {
        DiscSystem sys = assemble_disc(problem, /*include_drift=*/true, t_mid);
        lhs = M + theta * dt * sys.A;
        rhs_op = M - (1.0 - theta) * dt * sys.A;
        lu.compute(lhs);
        if (lu.info() != Eigen::Success)
            throw SolverError("time-step factorization failed",
                              std::numeric_limits<double>::infinity());
    };
    if (!rebuild) build(t0);

    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(u0.data(), N);
    double worst = 0.0;
    for (int step = 0; step < problem.nt; ++step) {
        if (rebuild) build(t0 + (step + theta) * dt);
        const Eigen::VectorXd b = rhs_op * u;
        Eigen::VectorXd unew = lu.solve(b);
        const double res = relative_residual(lhs, unew, b);
        worst = std::max(worst, res);
        if (!(res <= kResidualContract))
            throw SolverError("time step missed the 1e-10 residual contract", res);
        u = std::move(unew);
        out.slices.emplace_back(u.data(), u.data() + N);
    }
    out.residual = worst;
    return out;
}

double normal_derivative_origin(const SpaceTimeField& field, double rho) {
    const DiscMesh& mesh = field.mesh;
    if (std::abs(mesh.rho - rho) > 1e-12 * std::max(1.0, rho))
        throw std::domain_error("field mesh does not place the origin on its lateral boundary");
    const double dr = mesh.dr();
    const std::vector<double>& u = field.final_slice();
    // Quadratic through the wall value 0 and the two cells along the ray
    // pointing at the origin (theta = 0 for n = 2, left end for n = 1).
    double u1, u2;
    if (mesh.n == 2) {
        u1 = u[mesh.cell_index(mesh.nr - 1, 0)];
        u2 = u[mesh.cell_index(mesh.nr - 2, 0)];
    } else {
        u1 = u[mesh.cell_index(0, 0)];
        u2 = u[mesh.cell_index(1, 0)];
    }
    return (9.0 * u1 - u2) / (3.0 * dr);
}

}  // namespace hopflab
