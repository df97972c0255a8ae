#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "hopflab/solver.hpp"

using namespace hopflab;

namespace {

// Radial harmonic oracles on the annulus (rho/2, rho) with data 1 / 0.
double harmonic2d(double r, double rho) { return std::log(rho / r) / std::log(2.0); }
double harmonic3d(double r, double rho) { return rho / r - 1.0; }

double max_error_vs_harmonic(const DiscreteField& f, int n) {
    const AnnulusMesh& m = f.mesh;
    double worst = 0.0;
    for (int i = 0; i <= m.nr; ++i)
        for (int j = 0; j < m.num_angular_nodes(); ++j) {
            const double exact = n == 2 ? harmonic2d(m.radius(i), m.rho)
                                        : harmonic3d(m.radius(i), m.rho);
            worst = std::max(worst, std::abs(f.at(i, j) - exact));
        }
    return worst;
}

}  // namespace

TEST_CASE("harmonic annulus oracle, n = 2") {
    auto p = AnnulusProblem::make(2, 0.5, 64, 96, CoefficientField::identity(2));
    const DiscreteField v = solve_annulus(p);
    CHECK(v.residual <= 1e-10);
    CHECK(max_error_vs_harmonic(v, 2) < 5e-4);

    const double dn = normal_derivative_origin(v, 0.5);
    CHECK(dn == doctest::Approx(1.0 / (0.5 * std::log(2.0))).epsilon(5e-3));
}

TEST_CASE("harmonic annulus oracle, n = 3 (axisymmetric spherical)") {
    auto p = AnnulusProblem::make(3, 0.5, 64, 48, CoefficientField::identity(3));
    const DiscreteField v = solve_annulus(p);
    CHECK(max_error_vs_harmonic(v, 3) < 1e-3);
    CHECK(normal_derivative_origin(v, 0.5) == doctest::Approx(2.0).epsilon(5e-3));
}

TEST_CASE("observed convergence order is near 2") {
    std::vector<double> errs;
    for (int m : {32, 64, 128}) {
        auto p = AnnulusProblem::make(2, 0.5, m, m, CoefficientField::identity(2));
        errs.push_back(max_error_vs_harmonic(solve_annulus(p), 2));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log2(errs[i - 1] / errs[i]);
        CHECK(order >= 1.7);
        CHECK(order <= 2.2);
    }
}

TEST_CASE("discrete maximum principle for admissible coefficients, b = 0") {
    CoefficientField f = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
    auto p = AnnulusProblem::make(2, 0.4, 48, 64, f);
    const DiscreteField v = solve_annulus(p);
    for (double u : v.values) {
        CHECK(u >= -1e-12);
        CHECK(u <= 1.0 + 1e-12);
    }
}

TEST_CASE("discrete maximum principle with a singular drift (upwind switch)") {
    CoefficientField f = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
    f.drift = Drift::near_boundary(1.0, Modulus::power(0.5));
    auto p = AnnulusProblem::make(2, 0.4, 48, 64, f);
    const DiscreteField v = solve_annulus(p);
    for (double u : v.values) {
        CHECK(u >= -1e-10);
        CHECK(u <= 1.0 + 1e-10);
    }
}

TEST_CASE("discrete maximum principle in three dimensions with drift") {
    CoefficientField f = CoefficientField::isotropic(3, 0.45, Modulus::power(0.5), 1);
    f.drift = Drift::near_boundary(0.5, Modulus::power(0.5));
    auto p = AnnulusProblem::make(3, 0.4, 32, 24, f);
    const DiscreteField v = solve_annulus(p);
    for (double u : v.values) {
        CHECK(u >= -1e-10);
        CHECK(u <= 1.0 + 1e-10);
    }
    CHECK(normal_derivative_origin(v, 0.4) > 0.0);

    // axisymmetry guard: off-axis constant drifts are rejected
    CoefficientField bad = CoefficientField::identity(3);
    bad.drift = Drift::constant({0.5, 0.0, -1.0});
    auto pbad = AnnulusProblem::make(3, 0.4, 16, 12, bad);
    CHECK_THROWS_AS(solve_annulus(pbad), std::domain_error);
}

TEST_CASE("normal derivative of a constant field is zero") {
    auto p = AnnulusProblem::make(2, 0.5, 16, 24, CoefficientField::identity(2));
    DiscreteField f;
    f.mesh = p.mesh;
    f.values.assign(p.mesh.num_nodes(), 0.7);
    CHECK(normal_derivative_origin(f, 0.5) == 0.0);
    CHECK_THROWS_AS(normal_derivative_origin(f, 0.25), std::domain_error);
}

TEST_CASE("anisotropic frozen matrix: solve runs and respects bounds") {
    Matrix A0{{{1.3, 0.2, 0.0}, {0.2, 0.8, 0.0}, {0.0, 0.0, 1.0}}};
    auto p = AnnulusProblem::make(2, 0.4, 48, 64, CoefficientField::frozen(2, A0));
    const DiscreteField v = solve_annulus(p);
    CHECK(v.residual <= 1e-10);
    for (double u : v.values) {
        CHECK(u >= -1e-8);
        CHECK(u <= 1.0 + 1e-8);
    }
    CHECK(normal_derivative_origin(v, 0.4) > 0.0);
}

TEST_CASE("anisotropic mixed terms against an A0-harmonic manufactured solution") {
    // u* = A01 x^2 - A00 x y satisfies div(A0 grad u*) = 0 with the mixed
    // derivative genuinely active; Dirichlet data sampled from u*.
    Matrix A0{{{1.3, 0.35, 0.0}, {0.35, 0.8, 0.0}, {0.0, 0.0, 1.0}}};
    auto exact = [&](const Point& y) { return A0[0][1] * y[0] * y[0] - A0[0][0] * y[0] * y[1]; };

    std::vector<double> errs;
    for (int m : {24, 48, 96}) {
        auto p = AnnulusProblem::make(2, 0.4, m, 2 * m, CoefficientField::frozen(2, A0));
        p.dirichlet = exact;
        const DiscreteField v = solve_annulus(p);
        double worst = 0.0;
        for (int i = 0; i <= p.mesh.nr; ++i)
            for (int j = 0; j < p.mesh.na; ++j)
                worst = std::max(worst, std::abs(v.at(i, j) - exact(p.mesh.position(i, j))));
        errs.push_back(worst);
    }
    CHECK(errs.back() < 2e-4);
    for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
    // second-order between the two finest meshes, with slack for the
    // one-sided boundary coupling of the corner stencils
    CHECK(std::log2(errs[1] / errs[2]) >= 1.5);
}

TEST_CASE("green column: nonnegative, symmetric, log-singular") {
    auto p = AnnulusProblem::make(2, 0.5, 40, 64, CoefficientField::identity(2));
    const int i1 = 20, j1 = 16, i2 = 26, j2 = 40;
    const DiscreteField g1 = discrete_green_column(p, i1, j1);
    for (double u : g1.values) CHECK(u >= -1e-14);

    // self-adjointness of L_0: G(x,y) = G(y,x)
    const DiscreteField g2 = discrete_green_column(p, i2, j2);
    CHECK(g1.at(i2, j2) == doctest::Approx(g2.at(i1, j1)).epsilon(1e-9));

    // short-range log slope ~ -1/(2 pi): fit G against ln distance along a ray
    std::vector<double> xs, ys;
    for (int di : {2, 3, 4, 5, 6}) {
        const double dist = di * p.mesh.dr();
        xs.push_back(-std::log(dist) / (2.0 * M_PI));
        ys.push_back(g1.at(i1 + di, j1));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k] / xs.size();
        my += ys[k] / ys.size();
    }
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    CHECK(sxy / sxx == doctest::Approx(1.0).epsilon(0.2));

    CHECK_THROWS_AS(discrete_green_column(p, 0, 0), std::domain_error);
}

TEST_CASE("gradient bound |Dz| <= N/rho across a dyadic rho scan") {
    std::vector<double> bounds;
    for (double rho : {0.4, 0.2, 0.1, 0.05}) {
        CoefficientField f = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
        auto p = AnnulusProblem::make(2, rho, 32, 48, f);
        bounds.push_back(solve_annulus(p).max_abs_gradient() * rho);
    }
    const double lo = *std::min_element(bounds.begin(), bounds.end());
    const double hi = *std::max_element(bounds.begin(), bounds.end());
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("cutoff phi: plateau, support, midpoint") {
    CHECK(cutoff_phi(0.0) == 1.0);
    CHECK(cutoff_phi(0.49) == 1.0);
    CHECK(cutoff_phi(0.8) == 0.0);
    CHECK(cutoff_phi(0.75) == 0.0);
    CHECK(cutoff_phi(0.625) == doctest::Approx(0.5).epsilon(1e-14));
    // C^2: one-sided second differences stay bounded through the joints
    for (double s : {0.5, 0.75}) {
        const double h = 1e-4;
        const double d2m = (cutoff_phi(s - 2 * h) - 2 * cutoff_phi(s - h) + cutoff_phi(s)) / (h * h);
        const double d2p = (cutoff_phi(s) - 2 * cutoff_phi(s + h) + cutoff_phi(s + 2 * h)) / (h * h);
        CHECK(std::abs(d2m - d2p) < 1.0);
    }
}

TEST_CASE("1-d heat oracle: eigenfunction decay") {
    // interval (0,1) = B_{1/2}(1/2); initial sin(pi x) = cos(pi xi / 2) in the
    // scaled offset xi; exact decay factor exp(-pi^2 T) over T = rho^2.
    const double rho = 0.5;
    auto p = CylinderProblem::make(1, rho, 128, 1, 400, CoefficientField::identity(1));
    p.initial_scaled_radial = [](double s) { return std::cos(0.5 * M_PI * s); };
    const SpaceTimeField f = solve_cylinder(p);
    CHECK(f.residual <= 1e-10);

    const double decay = std::exp(-M_PI * M_PI * rho * rho);
    double worst = 0.0;
    for (int i = 0; i < p.mesh.nr; ++i) {
        const double x = p.mesh.radius(i);
        const double exact = decay * std::sin(M_PI * x);
        worst = std::max(worst, std::abs(f.final_slice()[i] - exact));
    }
    CHECK(worst / decay < 5e-3);
}

TEST_CASE("initial slice matches the cutoff at cells exactly") {
    auto p = CylinderProblem::make(2, 0.4, 24, 32, 8, CoefficientField::identity(2));
    const SpaceTimeField f = solve_cylinder(p);
    for (int i = 0; i < p.mesh.nr; ++i)
        for (int j = 0; j < p.mesh.na; ++j)
            CHECK(f.slices[0][p.mesh.cell_index(i, j)] ==
                  cutoff_phi(p.mesh.radius(i) / p.mesh.rho));
}

TEST_CASE("cylinder solutions respect the 0..1 bounds") {
    CoefficientField f = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
    f.drift = Drift::near_boundary(0.5, Modulus::power(0.5));
    auto p = CylinderProblem::make(2, 0.4, 32, 48, 48, f);

    SUBCASE("backward Euler is monotone") {
        p.scheme = TimeScheme::BackwardEuler;
        const SpaceTimeField sol = solve_cylinder(p);
        for (const auto& slice : sol.slices)
            for (double u : slice) {
                CHECK(u >= -1e-10);
                CHECK(u <= 1.0 + 1e-10);
            }
    }
    SUBCASE("Crank-Nicolson stays within loose bounds") {
        const SpaceTimeField sol = solve_cylinder(p);
        for (const auto& slice : sol.slices)
            for (double u : slice) {
                CHECK(u >= -1e-3);
                CHECK(u <= 1.0 + 1e-3);
            }
    }
}

TEST_CASE("parabolic gradient bound |Dz~| <= C/rho across a dyadic scan") {
    std::vector<double> bounds;
    for (double rho : {0.4, 0.2, 0.1}) {
        CoefficientField f = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
        auto p = CylinderProblem::make(2, rho, 24, 32, 32, f);
        bounds.push_back(solve_cylinder(p).max_abs_gradient() * rho);
    }
    const double lo = *std::min_element(bounds.begin(), bounds.end());
    const double hi = *std::max_element(bounds.begin(), bounds.end());
    CHECK(hi / lo <= 3.0);
}

TEST_CASE("coefficient field invariants") {
    CoefficientField good = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
    good.center = {0.0, 0.4, 0.0};
    CHECK_NOTHROW(good.validate(0.4));

    CHECK_THROWS_AS(CoefficientField::isotropic(2, 0.6, Modulus::power(0.5), 1),
                    std::domain_error);  // eps >= 1 - nu

    Matrix bad{{{3.0, 0.0, 0.0}, {0.0, 0.1, 0.0}, {0.0, 0.0, 1.0}}};
    CHECK_THROWS_AS(CoefficientField::frozen(2, bad).validate(0.4), InvariantViolation);
}
