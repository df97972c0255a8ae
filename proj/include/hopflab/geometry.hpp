#pragma once

#include <array>
#include <optional>

#include <nlohmann/json_fwd.hpp>

#include "hopflab/modulus.hpp"

namespace hopflab {

/// Spatial point; the active dimension is carried by the domain / boundary.
/// Component [n-1] is the "vertical" coordinate x_n normal to the flattened
/// boundary; unused trailing components stay zero.
using Point = std::array<double, 3>;

double norm(const Point& p, int n);

enum class DomainKind { Elliptic, Parabolic };

/// Extremal paraboloid boundary graph: x_n = |x'| sigma(|x'|) (elliptic) or
/// x_n = sqrt(|x'|^2 - t) sigma(sqrt(|x'|^2 - t)) (parabolic, t <= 0),
/// in a neighborhood of radius R about the origin.
struct ParaboloidBoundary {
    Modulus sigma;
    double R = 1.0;
    DomainKind kind = DomainKind::Elliptic;

    /// Graph height F(x') or P(x';t). Throws std::domain_error outside the
    /// neighborhood (|x'| > R, or parabolic with t > 0 or |x'|^2 - t > R^2).
    double height(const Point& xprime, int n, std::optional<double> t = std::nullopt) const;
};

/// Flattening change of variables (x', x_n) -> (x', x_n - height).
Point flatten(const Point& x, int n, const ParaboloidBoundary& boundary,
              std::optional<double> t = std::nullopt);
Point unflatten(const Point& x_tilde, int n, const ParaboloidBoundary& boundary,
                std::optional<double> t = std::nullopt);

/// Bound on the extra drift component generated by flattening:
/// sigma(tau)/tau + sigma'(tau) with tau = sqrt(|x'|^2 - t).
/// Returns +infinity as the singular indicator when tau -> 0 for
/// non-Lipschitz families.
double flatten_drift_bound(const Modulus& sigma, const Point& xprime, double t, int n);
double flatten_drift_bound_at(const Modulus& sigma, double tau);

/// Local model domain: half-ball B_R cap {x_n > 0} (elliptic, n in {2,3}) or
/// half-cylinder (B_R cap {x_n > 0}) x (-R^2, 0) (parabolic, spatial n in {1,2}).
struct DomainModel {
    DomainKind kind = DomainKind::Elliptic;
    int n = 2;  // spatial dimension
    double R = 1.0;
    Modulus sigma = Modulus::power(1.0);

    bool contains(const Point& x) const;
    bool contains_spacetime(const Point& x, double t) const;

    /// Euclidean distance to the boundary of the half-ball (elliptic model).
    double distance(const Point& x) const;

    /// Parabolic distance d_p to the parabolic boundary, by 50-iteration
    /// bisection on rho against the exact cylinder-avoidance predicate.
    double parabolic_distance(const Point& x, double t) const;

    /// Closed form min(x_n, sqrt(t + R^2), R - |x|) for the half-cylinder.
    double parabolic_distance_analytic(const Point& x, double t) const;

    /// True iff the backward cylinder Q_rho(x;t) misses the parabolic boundary.
    bool cylinder_avoids_parabolic_boundary(const Point& x, double t, double rho) const;

    nlohmann::json to_json() const;
    static DomainModel from_json(const nlohmann::json& j);
};

}  // namespace hopflab
