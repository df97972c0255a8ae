// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hopflab/drift_functionals.hpp"
#include "hopflab/experiments.hpp"
#include "hopflab/report.hpp"
#include "hopflab/solver.hpp"

using namespace hopflab;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, const std::function<bool(std::string&)>& body) {
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] criterion %2d: %s%s%s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double harmonic2d(double r, double rho) { return std::log(rho / r) / std::log(2.0); }

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

bool within_factor_of_median(const std::vector<double>& vals, double factor, std::string& detail) {
    std::vector<double> sorted = vals;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    detail += "median " + fmt(median);
    for (double v : vals)
        if (!(v <= factor * median && v >= median / factor)) {
            detail += ", outlier " + fmt(v);
            return false;
        }
    return true;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main() {
    const double ln2 = std::log(2.0);

    criterion(1, "harmonic annulus oracle (n=2, 128x192, 2%, <10 s)", [&](std::string& detail) {
        const auto t0 = std::chrono::steady_clock::now();
        auto p = AnnulusProblem::make(2, 0.5, 128, 192, CoefficientField::identity(2));
        const DiscreteField v = solve_annulus(p);
        const double dn = normal_derivative_origin(v, 0.5);
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const double exact = 1.0 / (0.5 * ln2);
        const double rel = std::abs(dn - exact) / exact;
        detail = "dn " + fmt(dn) + ", rel err " + fmt(rel) + ", " + fmt(elapsed) + " s";
        return rel <= 0.02 && elapsed < 10.0;
    });

    criterion(2, "convergence order on {64,128,256}^2 in [1.7, 2.2]", [&](std::string& detail) {
        std::vector<double> errs;
        for (int m : {64, 128, 256}) {
            auto p = AnnulusProblem::make(2, 0.5, m, m, CoefficientField::identity(2));
            const DiscreteField v = solve_annulus(p);
            double worst = 0.0;
            for (int i = 0; i <= m; ++i)
                for (int j = 0; j < m; ++j)
                    worst = std::max(worst, std::abs(v.at(i, j) - harmonic2d(p.mesh.radius(i), 0.5)));
            errs.push_back(worst);
        }
        bool ok = true;
        for (std::size_t i = 1; i < errs.size(); ++i) {
            const double order = std::log2(errs[i - 1] / errs[i]);
            detail += "order " + fmt(order) + " ";
            ok = ok && order >= 1.7 && order <= 2.2;
        }
        return ok;
    });

    criterion(3, "modulus calculus: sandwich + J_sigma quadrature to 1e-8", [&](std::string& detail) {
        const std::vector<Modulus> families{Modulus::power(0.5), Modulus::linear(1.0),
                                            Modulus::log_power(2.0)};
        for (const Modulus& sigma : families) {
            const double hi = sigma.dini_range();
            for (int i = 0; i < 100; ++i) {
                const double r =
                    std::exp(std::log(1e-4) + (std::log(hi) - std::log(1e-4)) * i / 99.0);
                const double hat = smooth_hat(sigma, r);
                if (!(hat >= sigma(r) - 1e-12 && hat <= 2.0 * sigma(0.5 * r) + 1e-12)) {
                    detail = "sandwich failed at r " + fmt(r);
                    return false;
                }
            }
        }
        for (double alpha : {0.3, 0.5, 1.0}) {
            for (double s : {0.25, 1.0}) {
                const double j = dini_integral(Modulus::power(alpha), s);
                if (std::abs(j - std::pow(s, alpha) / alpha) > 1e-8) {
                    detail = "Power J mismatch at alpha " + fmt(alpha);
                    return false;
                }
            }
        }
        const double j1 = dini_integral(Modulus::log_power(2.0), 1.0);
        detail = "J_logpower2(1) = " + fmt(j1);
        return std::abs(j1 - 1.0) <= 1e-8;
    });

    criterion(4, "Dini classification exact", [&](std::string&) {
        return Modulus::power(0.3).is_dini() && !Modulus::log_power(0.5).is_dini() &&
               Modulus::log_power(2.0).is_dini();
    });

    criterion(5, "near-boundary admissibility: omega/J_sigma factor 3, zero exact", [&](std::string& detail) {
        const DomainModel dom{DomainKind::Elliptic, 2, 1.0, Modulus::power(1.0)};
        if (omega(Drift::zero(), dom, 0.25) != 0.0) {
            detail = "zero drift omega not exactly zero";
            return false;
        }
        const Drift nb = Drift::near_boundary(1.0, Modulus::power(0.5));
        const Modulus sigma = Modulus::power(0.5);
        std::vector<double> ratios;
        for (int k = 2; k <= 8; ++k) {
            const double r = std::ldexp(1.0, -k);
            ratios.push_back(omega(nb, dom, r) / dini_integral(sigma, r));
        }
        return within_factor_of_median(ratios, 3.0, detail);
    });

    criterion(6, "shell integrals: Phi_k (r/2^k)^{1/n} within factor 2 (k=0..6)", [&](std::string& detail) {
        std::vector<double> prods;
        for (int k = 0; k <= 6; ++k)
            prods.push_back(phi_k(GammaParameter(1.0), 0.5, k, 2) *
                            std::pow(0.5 * std::ldexp(1.0, -k), 0.5));
        return within_factor_of_median(prods, 2.0, detail);
    });

    criterion(7, "Hopf scans: identity 3%, Dini floor, non-Dini trend", [&](std::string& detail) {
        const std::vector<double> grid{0.5, 0.25, 0.125};
        const MeshPolicy mesh{64, 96, 64};

        const HopfScanReport ident = hopf_constant_scan(CoefficientFamily::identity(), grid, mesh);
        for (const auto& row : ident.rows) {
            if (row.status != "ok" || std::abs(row.c - 1.0 / ln2) / (1.0 / ln2) > 0.03) {
                detail = "identity c " + fmt(row.c) + " at rho " + fmt(row.rho);
                return false;
            }
        }

        const HopfScanReport dini = hopf_constant_scan(CoefficientFamily::dini(), grid, mesh);
        double cmin = 1e300;
        for (const auto& row : dini.rows) {
            if (row.status != "ok") {
                detail = "dini row failed at rho " + fmt(row.rho);
                return false;
            }
            cmin = std::min(cmin, row.c);
        }
        if (!(cmin >= 0.2 / ln2)) {
            detail = "dini min c " + fmt(cmin) + " below 0.2/ln2";
            return false;
        }

        const HopfScanReport nond = hopf_constant_scan(CoefficientFamily::non_dini(), grid, mesh);
        for (std::size_t i = 1; i < nond.rows.size(); ++i)
            if (!(nond.rows[i].c < nond.rows[i - 1].c)) {
                detail = "non-Dini trend not strictly decreasing (exploratory)";
                return false;
            }
        detail = "identity c " + fmt(ident.rows[0].c) + ", dini min " + fmt(cmin) +
                 ", non-Dini c " + fmt(nond.rows[0].c) + " > " + fmt(nond.rows[1].c) + " > " +
                 fmt(nond.rows[2].c) + " (exploratory trend)";
        return true;
    });

    criterion(8, "perturbation chain: exact zeros + J_sigma(2rho)/rho scaling", [&](std::string& detail) {
        const MeshPolicy mesh{64, 96, 0};
        CoefficientFamily a_only;
        a_only.eps = 0.45;
        a_only.a_sigma = Modulus::power(0.5);
        const ChainTerms zero_b = perturbation_chain(0.25, a_only, 2, mesh);
        if (zero_b.v_minus_z != 0.0) {
            detail = "b=0 chain term not exactly zero";
            return false;
        }
        const ChainTerms const_a = perturbation_chain(0.25, CoefficientFamily::identity(), 2, mesh);
        if (const_a.z_minus_psi != 0.0) {
            detail = "constant-a chain term not exactly zero";
            return false;
        }
        std::vector<double> ratios;
        for (double rho : {0.5, 0.25, 0.125}) {
            const ChainTerms ch = perturbation_chain(rho, a_only, 2, mesh);
            ratios.push_back(ch.z_minus_psi * rho /
                             dini_integral(Modulus::power(0.5), std::min(1.0, 2.0 * rho)));
        }
        return within_factor_of_median(ratios, 3.0, detail);
    });

    criterion(9, "parabolic oracle: 1-d heat decay 1%, cylinder bounds", [&](std::string& detail) {
        auto p = CylinderProblem::make(1, 0.5, 256, 1, 2500, CoefficientField::identity(1));
        p.initial_scaled_radial = [](double s) { return std::cos(0.5 * M_PI * s); };
        const SpaceTimeField f = solve_cylinder(p);
        const double decay = std::exp(-M_PI * M_PI * 0.25);
        double worst = 0.0;
        for (int i = 0; i < 256; ++i)
            worst = std::max(worst, std::abs(f.final_slice()[i] -
                                             decay * std::sin(M_PI * p.mesh.radius(i))));
        if (worst / decay > 0.01) {
            detail = "heat rel err " + fmt(worst / decay);
            return false;
        }

        CoefficientField cf = CoefficientField::isotropic(2, 0.45, Modulus::power(0.5), 1);
        cf.drift = Drift::near_boundary(0.5, Modulus::power(0.5));
        auto cyl = CylinderProblem::make(2, 0.4, 48, 64, 64, cf);
        const SpaceTimeField sol = solve_cylinder(cyl);
        for (const auto& slice : sol.slices)
            for (double u : slice)
                if (!(u >= -1e-12 && u <= 1.0 + 1e-12)) {
                    detail = "cylinder bounds violated: " + fmt(u);
                    return false;
                }
        detail = "heat rel err " + fmt(worst / decay) + ", bounds hold";
        return true;
    });

    criterion(10, "T1 norm: zero, linear, ratio factor 3, Neumann threshold",
              [&](std::string& detail) {
        const MeshPolicy mesh{24, 36, 0};
        if (estimate_T1_norm(0.25, Drift::zero(), mesh) != 0.0) {
            detail = "zero drift norm not zero";
            return false;
        }
        const Drift unit = Drift::constant({0.0, -1.0, 0.0});
        const double n1 = estimate_T1_norm(0.25, unit, mesh);
        const double n2 = estimate_T1_norm(0.25, unit.scaled_by(2.0), mesh);
        if (std::abs(n2 - 2.0 * n1) / (2.0 * n1) > 1e-12) {
            detail = "linearity violated";
            return false;
        }
        const DomainModel dom{DomainKind::Elliptic, 2, 1.0, Modulus::power(1.0)};
        std::vector<double> ratios;
        for (double rho : {0.5, 0.25, 0.125})
            ratios.push_back(estimate_T1_norm(rho, unit, mesh) / omega(unit, dom, 2.0 * rho));
        if (!within_factor_of_median(ratios, 3.0, detail)) return false;

        const T1Analysis an = analyze_T1(0.25, unit.scaled_by(3.0), mesh, 1.0, true);
        detail += "; norm " + fmt(an.norm) + ", inverse norm " + fmt(an.inverse_norm);
        return an.norm < 0.5 && an.inverse_norm <= 2.0 && an.solve_residual <= 1e-10;
    });

    criterion(11, "determinism: --jobs 1 vs --jobs 8 byte-identical CSV", [&](std::string& detail) {
#ifndef HOPFLAB_CLI_PATH
        detail = "CLI path not wired";
        return false;
#else
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "hopflab_acceptance";
        fs::create_directories(dir);
        {
            std::ofstream cfg(dir / "scan.json");
            cfg << R"({"rho_grid": [0.5, 0.25, 0.125], "mesh": {"nr": 32, "ntheta": 48},
                       "family": {"label": "dini", "eps": 0.45,
                                  "a_sigma": {"family": "power", "alpha": 0.5},
                                  "drift": {"family": "near_boundary", "C": 0.5,
                                             "sigma": {"family": "power", "alpha": 0.5}}}})";
        }
        const std::string base = std::string(HOPFLAB_CLI_PATH) + " hopf-scan --config " +
                                 (dir / "scan.json").string();
        if (std::system((base + " --out " + (dir / "j1").string() + " --jobs 1 > /dev/null").c_str()) != 0) {
            detail = "jobs 1 run failed";
            return false;
        }
        if (std::system((base + " --out " + (dir / "j8").string() + " --jobs 8 > /dev/null").c_str()) != 0) {
            detail = "jobs 8 run failed";
            return false;
        }
        const std::string a = slurp(dir / "j1" / "hopf_scan.csv");
        const std::string b = slurp(dir / "j8" / "hopf_scan.csv");
        detail = a.empty() ? "empty CSV" : "CSV bodies " + std::to_string(a.size()) + " bytes";
        return !a.empty() && a == b;
#endif
    });

    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
    return 1;
}
