#include "hopflab/drift.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace hopflab {

Drift Drift::zero() { return Drift(); }

Drift Drift::constant(const Point& vector) {
    Drift d;
    d.family_ = DriftFamily::Constant;
    d.vector_ = vector;
    d.amplitude_ = 1.0;
    return d;
}

Drift Drift::near_boundary(double C, Modulus sigma) {
    if (!(C >= 0.0)) throw std::domain_error("near_boundary drift needs C >= 0");
    Drift d;
    d.family_ = DriftFamily::NearBoundary;
    d.amplitude_ = C;
    d.sigma_ = std::move(sigma);
    return d;
}

Drift Drift::ln_bounded(double C, Modulus sigma) {
    if (!(C >= 0.0)) throw std::domain_error("ln_bounded drift needs C >= 0");
    Drift d;
    d.family_ = DriftFamily::LnBounded;
    d.amplitude_ = C;
    d.sigma_ = std::move(sigma);
    return d;
}

const Modulus& Drift::sigma() const {
    if (!sigma_) throw std::logic_error("drift family carries no modulus");
    return *sigma_;
}

Drift Drift::scaled_by(double s) const {
    Drift d = *this;
    if (family_ == DriftFamily::Constant) {
        for (double& c : d.vector_) c *= s;
    } else {
        d.amplitude_ *= s;
    }
    return d;
}

Point Drift::ln_bounded_anchor(const DomainModel& domain) {
    Point c{0.0, 0.0, 0.0};
    c[domain.n - 1] = 0.5 * domain.R;
    return c;
}

double Drift::magnitude(const DomainModel& domain, const Point& y, std::optional<double> t) const {
    const bool parabolic = domain.kind == DomainKind::Parabolic;
    if (parabolic) {
        if (!t.has_value()) throw std::domain_error("parabolic drift magnitude needs t");
        if (!domain.contains_spacetime(y, *t)) return 0.0;
    } else if (!domain.contains(y)) {
        return 0.0;
    }

    switch (family_) {
        case DriftFamily::Zero:
            return 0.0;
        case DriftFamily::Constant:
            return norm(vector_, domain.n);
        case DriftFamily::NearBoundary: {
            const double d = parabolic ? domain.parabolic_distance_analytic(y, *t)
                                       : domain.distance(y);
            if (d <= 0.0) return 0.0;
            return amplitude_ * (*sigma_)(std::min(1.0, d)) / d;
        }
        case DriftFamily::LnBounded: {
            const Point c = ln_bounded_anchor(domain);
            Point diff = y;
            for (int i = 0; i < domain.n; ++i) diff[i] -= c[i];
            const double s = norm(diff, domain.n);
            if (s <= 0.0) return 0.0;  // removable point mass of measure zero
            return amplitude_ * (*sigma_)(std::min(1.0, s)) / s;
        }
    }
    return 0.0;
}

Point Drift::vector(const DomainModel& domain, const Point& y, std::optional<double> t) const {
    Point out{0.0, 0.0, 0.0};
    if (family_ == DriftFamily::Constant) {
        const bool inside = domain.kind == DomainKind::Parabolic
                                ? (t.has_value() && domain.contains_spacetime(y, *t))
                                : domain.contains(y);
        return inside ? vector_ : out;
    }
    const double mag = magnitude(domain, y, t);
    out[domain.n - 1] = -mag;  // singular families point toward the flat boundary
    return out;
}

nlohmann::json Drift::to_json() const {
    switch (family_) {
        case DriftFamily::Zero:
            return {{"family", "zero"}};
        case DriftFamily::Constant:
            return {{"family", "constant"}, {"vector", {vector_[0], vector_[1], vector_[2]}}};
        case DriftFamily::NearBoundary:
            return {{"family", "near_boundary"}, {"C", amplitude_}, {"sigma", sigma_->to_json()}};
        case DriftFamily::LnBounded:
            return {{"family", "ln_bounded"}, {"C", amplitude_}, {"sigma", sigma_->to_json()}};
    }
    return nullptr;
}

Drift Drift::from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "zero") return zero();
    if (family == "constant") {
        Point v{0.0, 0.0, 0.0};
        const auto& arr = j.at("vector");
        for (std::size_t i = 0; i < arr.size() && i < 3; ++i) v[i] = arr[i].get<double>();
        return constant(v);
    }
    if (family == "near_boundary")
        return near_boundary(j.at("C").get<double>(), Modulus::from_json(j.at("sigma")));
    if (family == "ln_bounded")
        return ln_bounded(j.at("C").get<double>(), Modulus::from_json(j.at("sigma")));
    throw std::domain_error("unknown drift family: " + family);
}

}  // namespace hopflab
