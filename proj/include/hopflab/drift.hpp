#pragma once

#include <array>
#include <optional>
#include <stdexcept>

#include <nlohmann/json_fwd.hpp>

#include "hopflab/geometry.hpp"
#include "hopflab/modulus.hpp"

namespace hopflab {

struct UnsupportedFamilyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DriftFamily { Zero, Constant, NearBoundary, LnBounded };

/// Gaussian decay rate of the parabolic drift kernels; positive.
struct GammaParameter {
    double value = 1.0;
    explicit GammaParameter(double g = 1.0) : value(g) {
        if (!(g > 0.0)) throw std::domain_error("gamma must be positive");
    }
};

/// Lower-order drift field, extended by zero outside the domain.
///   Zero
///   Constant(vector)
///   NearBoundary(C, sigma): |b(y)| = C sigma(d(y))/d(y); direction -e_n.
///       Parabolic domains use d_p(y;s) in place of d(y).
///   LnBounded(C, sigma): interior spike |b(y)| = C sigma(|y-c|)/|y-c| at a
///       fixed anchor c, realizing the local-L^n growth sigma(rho).
class Drift {
  public:
    static Drift zero();
    static Drift constant(const Point& vector);
    static Drift near_boundary(double C, Modulus sigma);
    static Drift ln_bounded(double C, Modulus sigma);

    DriftFamily family() const { return family_; }
    double amplitude() const { return amplitude_; }
    const Modulus& sigma() const;
    const Point& constant_vector() const { return vector_; }

    /// Returns a drift with all magnitudes multiplied by s.
    Drift scaled_by(double s) const;

    /// |b(y)| (elliptic) or |b(y;s)| (parabolic, pass t). Zero outside.
    double magnitude(const DomainModel& domain, const Point& y,
                     std::optional<double> t = std::nullopt) const;

    /// Full vector; component i of b at y. Zero outside the domain.
    Point vector(const DomainModel& domain, const Point& y,
                 std::optional<double> t = std::nullopt) const;

    /// Anchor of the LnBounded spike for the given domain.
    static Point ln_bounded_anchor(const DomainModel& domain);

    nlohmann::json to_json() const;
    static Drift from_json(const nlohmann::json& j);

  private:
    Drift() = default;

    DriftFamily family_ = DriftFamily::Zero;
    double amplitude_ = 0.0;
    Point vector_{0.0, 0.0, 0.0};
    std::optional<Modulus> sigma_;
};

}  // namespace hopflab
