#include "hopflab/geometry.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace hopflab {

double norm(const Point& p, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += p[i] * p[i];
    return std::sqrt(s);
}

double ParaboloidBoundary::height(const Point& xprime, int n, std::optional<double> t) const {
    const double rp = norm(xprime, n - 1);
    if (kind == DomainKind::Elliptic) {
        if (rp > R) throw std::domain_error("boundary_height: |x'| exceeds neighborhood radius");
        return rp * sigma(std::min(1.0, rp));
    }
    if (!t.has_value()) throw std::domain_error("parabolic boundary_height needs t");
    if (*t > 0.0) throw std::domain_error("parabolic boundary_height needs t <= 0");
    const double tau2 = rp * rp - *t;
    if (tau2 > R * R) throw std::domain_error("boundary_height: |x'|^2 - t exceeds R^2");
    const double tau = std::sqrt(tau2);
    return tau * sigma(std::min(1.0, tau));
}

Point flatten(const Point& x, int n, const ParaboloidBoundary& boundary, std::optional<double> t) {
    Point xp = x;
    xp[n - 1] = 0.0;
    Point out = x;
    out[n - 1] = x[n - 1] - boundary.height(xp, n, t);
    return out;
}

Point unflatten(const Point& x_tilde, int n, const ParaboloidBoundary& boundary,
                std::optional<double> t) {
    Point xp = x_tilde;
    xp[n - 1] = 0.0;
    Point out = x_tilde;
    out[n - 1] = x_tilde[n - 1] + boundary.height(xp, n, t);
    return out;
}

double flatten_drift_bound_at(const Modulus& sigma, double tau) {
    if (tau <= 0.0) {
        // Lipschitz families have the finite limit 2 sigma'(0+); everything
        // else is singular, reported as +infinity.
        const double probe = 1e-8;
        const double slope = sigma(probe) / probe;
        const double finer = sigma(probe * probe) / (probe * probe);
        if (finer <= slope * (1.0 + 1e-6)) return slope + sigma.derivative(probe);
        return std::numeric_limits<double>::infinity();
    }
    return sigma(tau) / tau + sigma.derivative(tau);
}

double flatten_drift_bound(const Modulus& sigma, const Point& xprime, double t, int n) {
    const double rp = norm(xprime, n - 1);
    const double tau2 = rp * rp - t;
    if (tau2 <= 0.0) return std::numeric_limits<double>::infinity();
    return flatten_drift_bound_at(sigma, std::sqrt(tau2));
}

bool DomainModel::contains(const Point& x) const {
    return x[n - 1] > 0.0 && norm(x, n) < R;
}

bool DomainModel::contains_spacetime(const Point& x, double t) const {
    return contains(x) && t > -R * R && t <= 0.0;
}

double DomainModel::distance(const Point& x) const {
    if (!contains(x)) throw std::domain_error("distance: point outside the half-ball");
    return std::min(x[n - 1], R - norm(x, n));
}

bool DomainModel::cylinder_avoids_parabolic_boundary(const Point& x, double t, double rho) const {
    // Q_rho(x;t) = B_rho(x) x (t - rho^2, t). It misses the bottom slice and
    // the lateral pieces {x_n = 0}, {|x| = R} exactly when:
    return rho <= x[n - 1] && rho <= R - norm(x, n) && t - rho * rho >= -R * R;
}

double DomainModel::parabolic_distance_analytic(const Point& x, double t) const {
    return std::min({x[n - 1], std::sqrt(std::max(0.0, t + R * R)), R - norm(x, n)});
}

double DomainModel::parabolic_distance(const Point& x, double t) const {
    if (kind != DomainKind::Parabolic)
        throw std::domain_error("parabolic_distance on a non-parabolic domain");
    if (!(x[n - 1] >= 0.0 && norm(x, n) <= R && t >= -R * R && t <= 0.0))
        throw std::domain_error("parabolic_distance: point outside closure of Q");

    double lo = 0.0;
    double hi = 2.0 * R;  // definitely intersecting
    for (int it = 0; it < 50; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cylinder_avoids_parabolic_boundary(x, t, mid))
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

nlohmann::json DomainModel::to_json() const {
    return {{"kind", kind == DomainKind::Elliptic ? "elliptic" : "parabolic"},
            {"n", n},
            {"R", R},
            {"sigma", sigma.to_json()}};
}

DomainModel DomainModel::from_json(const nlohmann::json& j) {
    DomainModel d;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "elliptic")
        d.kind = DomainKind::Elliptic;
    else if (kind == "parabolic")
        d.kind = DomainKind::Parabolic;
    else
        throw std::domain_error("unknown domain kind: " + kind);
    d.n = j.at("n").get<int>();
    d.R = j.at("R").get<double>();
    if (j.contains("sigma")) d.sigma = Modulus::from_json(j.at("sigma"));
    if (d.kind == DomainKind::Elliptic && (d.n < 2 || d.n > 3))
        throw std::domain_error("elliptic domain supports n in {2,3}");
    if (d.kind == DomainKind::Parabolic && (d.n < 1 || d.n > 2))
        throw std::domain_error("parabolic domain supports spatial n in {1,2}");
    if (!(d.R > 0.0 && d.R <= 1.0))
        throw std::domain_error("domain radius must lie in (0, 1] (modulus length scale)");
    return d;
}

}  // namespace hopflab
