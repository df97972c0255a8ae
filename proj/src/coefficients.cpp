#include "hopflab/coefficients.hpp"

#include <cmath>

namespace hopflab {

CoefficientField CoefficientField::identity(int n, double nu) {
    CoefficientField f;
    f.kind = MatrixFieldKind::Identity;
    f.n = n;
    f.nu = nu;
    return f;
}

CoefficientField CoefficientField::isotropic(int n, double eps, Modulus sigma, int h_sign,
                                             double nu) {
    if (n < 2) throw std::domain_error("isotropic perturbation families need n >= 2 (h is angular)");
    if (!(eps >= 0.0 && eps < 1.0 - nu))
        throw std::domain_error("isotropic perturbation needs 0 <= eps < 1 - nu");
    CoefficientField f;
    f.kind = MatrixFieldKind::IsotropicPerturbation;
    f.n = n;
    f.nu = nu;
    f.eps = eps;
    f.gen_sigma = std::move(sigma);
    f.h_sign = h_sign >= 0 ? 1 : -1;
    return f;
}

CoefficientField CoefficientField::frozen(int n, const Matrix& A0, double nu) {
    CoefficientField f;
    f.kind = MatrixFieldKind::FrozenConstant;
    f.n = n;
    f.nu = nu;
    f.A0 = A0;
    if (n == 3) {
        const double g = A0[0][0];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (std::abs(A0[i][j] - (i == j ? g : 0.0)) > 0.0)
                    throw std::domain_error("n = 3 supports only scalar frozen matrices");
    }
    return f;
}

double CoefficientField::scalar(const Point& y) const {
    switch (kind) {
        case MatrixFieldKind::Identity:
            return 1.0;
        case MatrixFieldKind::IsotropicPerturbation: {
            Point d = y;
            for (int i = 0; i < n; ++i) d[i] -= x0[i];
            const double dist = norm(d, n);
            Point c = y;
            for (int i = 0; i < n; ++i) c[i] -= center[i];
            const double rc = norm(c, n);
            // cos of the angle about `center`, zero angle pointing at x0
            double h = 1.0;
            if (rc > 1e-14) {
                Point axis = x0;
                for (int i = 0; i < n; ++i) axis[i] -= center[i];
                const double ra = norm(axis, n);
                double dot = 0.0;
                for (int i = 0; i < n; ++i) dot += c[i] * axis[i];
                h = ra > 1e-14 ? dot / (rc * ra) : 1.0;
            }
            return 1.0 + eps * (*gen_sigma)(std::min(1.0, dist)) * h_sign * h;
        }
        case MatrixFieldKind::FrozenConstant: {
            const double g = A0[0][0];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (A0[i][j] != (i == j ? g : 0.0))
                        throw std::logic_error("scalar() on an anisotropic frozen field");
            return g;
        }
    }
    return 1.0;
}

Matrix CoefficientField::matrix(const Point& y) const {
    if (kind == MatrixFieldKind::FrozenConstant) return A0;
    Matrix m{{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}}};
    const double g = scalar(y);
    for (int i = 0; i < 3; ++i) m[i][i] = g;
    return m;
}

Modulus CoefficientField::declared_modulus() const {
    switch (kind) {
        case MatrixFieldKind::Identity:
        case MatrixFieldKind::FrozenConstant:
            return Modulus::linear(1e-12);  // constant fields: any vanishing modulus
        case MatrixFieldKind::IsotropicPerturbation:
            return Modulus::scaled(std::max(1e-12, 5.0 * eps), *gen_sigma);
    }
    return Modulus::linear(1e-12);
}

void CoefficientField::validate(double rho) const {
    // Ellipticity: for the isotropic kinds the eigenvalue is the scalar; for
    // frozen matrices check the 2x2 (or scalar) spectrum directly.
    auto check_eigs = [&](double lo, double hi, const std::string& where) {
        if (lo < nu - 1e-12 || hi > 1.0 / nu + 1e-12)
            throw InvariantViolation("ellipticity bounds violated " + where + ": eigenvalues [" +
                                     std::to_string(lo) + ", " + std::to_string(hi) +
                                     "] outside [nu, 1/nu]");
    };

    if (kind == MatrixFieldKind::FrozenConstant) {
        double lo, hi;
        if (n == 2) {
            const double a = A0[0][0], b = A0[0][1], c = A0[1][0], d = A0[1][1];
            if (std::abs(b - c) > 1e-14) throw InvariantViolation("frozen matrix not symmetric");
            const double tr = a + d, det = a * d - b * c;
            const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
            lo = tr / 2.0 - disc;
            hi = tr / 2.0 + disc;
        } else {
            lo = hi = A0[0][0];
        }
        check_eigs(lo, hi, "for the frozen matrix");
        return;
    }

    if (kind == MatrixFieldKind::Identity || n < 2) return;

    // Sample the annulus footprint.
    const int ns = 24;
    const Modulus decl = declared_modulus();
    std::array<Point, 48> pts{};
    int count = 0;
    for (int ii = 0; ii < ns; ++ii) {
        const double r = 0.5 * rho + (ii % 6 + 0.5) * (0.5 * rho / 6.0);
        const double a = (ii % 8) * (2.0 * M_PI / 8.0);
        Point p{r * std::sin(a), center[n - 1] - r * std::cos(a), 0.0};
        if (n == 3) p = {r * std::sin(a), 0.0, center[n - 1] - r * std::cos(a)};
        pts[count++] = p;
    }
    for (int i = 0; i < count; ++i) {
        const double g = scalar(pts[i]);
        check_eigs(g, g, "at a sampled point");
        for (int j = 0; j < i; ++j) {
            Point d = pts[i];
            for (int kcomp = 0; kcomp < n; ++kcomp) d[kcomp] -= pts[j][kcomp];
            const double sep = norm(d, n);
            if (sep <= 0.0 || sep > 1.0) continue;
            const double diff = std::abs(g - scalar(pts[j]));
            if (diff > decl(sep) + 1e-12)
                throw InvariantViolation("declared coefficient modulus violated: |a(x)-a(y)| = " +
                                         std::to_string(diff) + " > sigma(" + std::to_string(sep) +
                                         ")");
        }
    }
}

CoefficientField freeze_at(const CoefficientField& field, const Point& x_star) {
    CoefficientField f = CoefficientField::frozen(field.n, field.matrix(x_star), field.nu);
    return f;
}

}  // namespace hopflab
