#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "hopflab/drift.hpp"
#include "hopflab/geometry.hpp"
#include "hopflab/modulus.hpp"

namespace hopflab {

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Matrix = std::array<std::array<double, 3>, 3>;

enum class MatrixFieldKind { Identity, IsotropicPerturbation, FrozenConstant };

/// Leading coefficients a^{ij} plus the drift b.
///   Identity:              a = I
///   IsotropicPerturbation: a(x) = (1 + eps * sigma(|x - x0|) * h(x)) I with
///                          h(x) = h_sign * cos(angle of x about `center`,
///                          measured from the direction pointing at x0)
///   FrozenConstant:        constant SPD matrix A0 (general for n = 2,
///                          scalar multiple of I for n = 3)
struct CoefficientField {
    MatrixFieldKind kind = MatrixFieldKind::Identity;
    int n = 2;
    double nu = 0.5;  // declared ellipticity constant

    // IsotropicPerturbation parameters
    double eps = 0.0;
    std::optional<Modulus> gen_sigma;
    int h_sign = 1;
    Point x0{0.0, 0.0, 0.0};        // modulus anchor (the boundary point)
    Point center{0.0, 0.5, 0.0};    // x^rho, set when a problem is built

    // FrozenConstant parameter
    Matrix A0{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    Drift drift = Drift::zero();

    static CoefficientField identity(int n, double nu = 0.5);
    static CoefficientField isotropic(int n, double eps, Modulus sigma, int h_sign, double nu = 0.5);
    static CoefficientField frozen(int n, const Matrix& A0, double nu = 0.5);

    bool isotropic_kind() const { return kind != MatrixFieldKind::FrozenConstant; }

    /// Scalar value for the isotropic kinds; throws for FrozenConstant.
    double scalar(const Point& y) const;

    /// Full matrix a(y).
    Matrix matrix(const Point& y) const;

    /// Declared modulus bounding |a(x) - a(y)| entrywise. For the isotropic
    /// perturbation this is Scaled(5 eps, sigma): the generator is the sum of
    /// a sigma-increment and a Lipschitz h-increment, and sigma(tau)/tau
    /// decreasing turns the Lipschitz part into 4 eps sigma(tau) on a domain
    /// of diameter <= 2 rho with dist(., center) >= rho/2.
    Modulus declared_modulus() const;

    /// Samples the ellipticity bounds nu I <= a <= nu^{-1} I and the
    /// entrywise modulus bound; throws InvariantViolation naming the failure.
    void validate(double rho) const;
};

/// Frozen field a(x*) of an existing field (the constant-coefficient anchor).
CoefficientField freeze_at(const CoefficientField& field, const Point& x_star);

}  // namespace hopflab
