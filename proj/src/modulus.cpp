#include "hopflab/modulus.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "hopflab/quadrature.hpp"

namespace hopflab {

Modulus Modulus::linear(double c) {
    if (!(c > 0.0)) throw std::domain_error("Linear modulus requires c > 0");
    Modulus m;
    m.family_ = ModulusFamily::Linear;
    m.param_ = c;
    return m;
}

Modulus Modulus::power(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("Power modulus requires 0 < alpha <= 1");
    Modulus m;
    m.family_ = ModulusFamily::Power;
    m.param_ = alpha;
    return m;
}

Modulus Modulus::log_power(double beta) {
    if (!(beta > 0.0)) throw std::domain_error("LogPower modulus requires beta > 0");
    Modulus m;
    m.family_ = ModulusFamily::LogPower;
    m.param_ = beta;
    return m;
}

Modulus Modulus::scaled(double c, Modulus inner) {
    if (!(c > 0.0)) throw std::domain_error("Scaled modulus requires c > 0");
    Modulus m;
    m.family_ = ModulusFamily::Scaled;
    m.param_ = c;
    m.inner_ = std::make_shared<Modulus>(std::move(inner));
    return m;
}

const Modulus& Modulus::inner() const {
    if (!inner_) throw std::logic_error("modulus has no inner descriptor");
    return *inner_;
}

double Modulus::eval_unchecked(double tau) const {
    if (tau <= 0.0) return 0.0;
    switch (family_) {
        case ModulusFamily::Linear:
            return param_ * tau;
        case ModulusFamily::Power:
            return std::pow(tau, param_);
        case ModulusFamily::LogPower:
            return std::pow(1.0 + std::log(1.0 / tau), -param_);
        case ModulusFamily::Scaled:
            return param_ * inner_->eval_unchecked(tau);
    }
    return 0.0;
}

double Modulus::operator()(double tau) const {
    if (!(tau >= 0.0 && tau <= 1.0)) throw std::domain_error("modulus argument outside [0,1]");
    return eval_unchecked(tau);
}

double Modulus::derivative(double tau) const {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::domain_error("modulus derivative needs tau in (0,1]");
    switch (family_) {
        case ModulusFamily::Linear:
            return param_;
        case ModulusFamily::Power:
            return param_ * std::pow(tau, param_ - 1.0);
        case ModulusFamily::LogPower:
            return param_ * std::pow(1.0 + std::log(1.0 / tau), -param_ - 1.0) / tau;
        case ModulusFamily::Scaled:
            return param_ * inner_->derivative(tau);
    }
    return 0.0;
}

double Modulus::dini_range() const {
    switch (family_) {
        case ModulusFamily::Linear:
        case ModulusFamily::Power:
            return 1.0;
        case ModulusFamily::LogPower:
            // (sigma(tau)/tau)' <= 0 iff ln(1/tau) >= beta - 1
            return std::min(1.0, std::exp(1.0 - param_));
        case ModulusFamily::Scaled:
            return inner_->dini_range();
    }
    return 1.0;
}

bool Modulus::is_dini() const {
    switch (family_) {
        case ModulusFamily::Linear:
        case ModulusFamily::Power:
            return true;
        case ModulusFamily::LogPower:
            return param_ > 1.0;
        case ModulusFamily::Scaled:
            return inner_->is_dini();
    }
    return false;
}

std::string Modulus::describe() const {
    switch (family_) {
        case ModulusFamily::Linear:
            return "linear(c=" + std::to_string(param_) + ")";
        case ModulusFamily::Power:
            return "power(alpha=" + std::to_string(param_) + ")";
        case ModulusFamily::LogPower:
            return "logpower(beta=" + std::to_string(param_) + ")";
        case ModulusFamily::Scaled:
            return "scaled(c=" + std::to_string(param_) + ", " + inner_->describe() + ")";
    }
    return "?";
}

nlohmann::json Modulus::to_json() const {
    switch (family_) {
        case ModulusFamily::Linear:
            return {{"family", "linear"}, {"c", param_}};
        case ModulusFamily::Power:
            return {{"family", "power"}, {"alpha", param_}};
        case ModulusFamily::LogPower:
            return {{"family", "logpower"}, {"beta", param_}};
        case ModulusFamily::Scaled:
            return {{"family", "scaled"}, {"c", param_}, {"inner", inner_->to_json()}};
    }
    return nullptr;
}

Modulus Modulus::from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "linear") return linear(j.at("c").get<double>());
    if (family == "power") return power(j.at("alpha").get<double>());
    if (family == "logpower") return log_power(j.at("beta").get<double>());
    if (family == "scaled") return scaled(j.at("c").get<double>(), from_json(j.at("inner")));
    throw std::domain_error("unknown modulus family: " + family);
}

double smooth_hat(const Modulus& sigma, double r) {
    if (!(r > 0.0 && r <= 1.0)) throw std::domain_error("smooth_hat needs r in (0,1]");
    auto integrand = [&sigma](double tau) { return sigma(tau) / tau; };
    const QuadResult q = integrate_adaptive(integrand, 0.5 * r, r, 1e-10, 1e-12);
    return 2.0 * q.value;
}

double dini_integral(const Modulus& sigma, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("dini_integral needs s in [0,1]");
    if (!sigma.is_dini())
        throw DivergenceError("dini_integral diverges: " + sigma.describe() + " is not Dini");
    if (s == 0.0) return 0.0;

    // tau = exp(-u) turns the integral into one of sigma(exp(-u)) over
    // [ln(1/s), inf), removing the 1/tau singularity.
    auto integrand = [&sigma](double u) { return sigma(std::exp(-u)); };
    const QuadResult q = integrate_to_infinity(integrand, std::log(1.0 / s), 1e-8, 1e-10, 16384);
    return q.value;
}

}  // namespace hopflab
