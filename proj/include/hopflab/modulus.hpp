#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

namespace hopflab {

/// Raised when a Dini integral is requested for a modulus whose
/// sigma(tau)/tau is not integrable near zero.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModulusFamily { Linear, Power, LogPower, Scaled };

/// Parametric modulus of continuity sigma on [0,1]:
///   Linear(c):    sigma(tau) = c*tau
///   Power(alpha): sigma(tau) = tau^alpha, 0 < alpha <= 1
///   LogPower(beta): sigma(tau) = (1 + ln(1/tau))^(-beta), sigma(0) = 0
///   Scaled(c, inner): sigma(tau) = c * inner(tau)
/// sigma(0) = 0 by continuity for every family; sigma is nondecreasing and
/// sigma(tau)/tau nonincreasing on (0,1].
class Modulus {
  public:
    static Modulus linear(double c);
    static Modulus power(double alpha);
    static Modulus log_power(double beta);
    static Modulus scaled(double c, Modulus inner);

    ModulusFamily family() const { return family_; }
    double param() const { return param_; }  // c, alpha or beta
    const Modulus& inner() const;

    /// sigma(tau); throws std::domain_error outside [0,1].
    double operator()(double tau) const;

    /// Analytic sigma'(tau) on (0,1].
    double derivative(double tau) const;

    /// True iff the integral of sigma(tau)/tau over (0,1) is finite.
    bool is_dini() const;

    /// Upper end of the interval (0, tau0] on which sigma(tau)/tau is
    /// nonincreasing, i.e. where the family genuinely sits in class D.
    /// 1 for Linear and Power; min(1, e^{1-beta}) for LogPower.
    double dini_range() const;

    std::string describe() const;

    nlohmann::json to_json() const;
    static Modulus from_json(const nlohmann::json& j);

  private:
    Modulus() = default;
    double eval_unchecked(double tau) const;

    ModulusFamily family_ = ModulusFamily::Power;
    double param_ = 1.0;
    std::shared_ptr<const Modulus> inner_;
};

/// C^1 regularization sigma_hat(r) = 2 * integral over [r/2, r] of
/// sigma(tau)/tau dtau, computed by adaptive quadrature to 1e-10 absolute.
/// Satisfies sigma(r) <= sigma_hat(r) <= 2*sigma(r/2).
double smooth_hat(const Modulus& sigma, double r);

/// Dini integral J_sigma(s) = integral over (0,s] of sigma(tau)/tau dtau,
/// quadrature with the tau = exp(-u) substitution near zero, 1e-8 absolute.
/// Throws DivergenceError for non-Dini moduli.
double dini_integral(const Modulus& sigma, double s);

}  // namespace hopflab
