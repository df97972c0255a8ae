// hopflab: config-driven laboratory runner.
//   hopflab <command> --config path.json --out dir [--jobs N]
// Commands: modulus | conditions | solve | hopf-scan | parabolic-scan | t1-norm
// Exit codes: 0 success, 1 usage or malformed config, 2 validation failure,
// 3 numerical failure (partial reports preserved).

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hopflab/experiments.hpp"
#include "hopflab/report.hpp"

using nlohmann::json;
using namespace hopflab;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedConfig {
    json root;
    std::string hash;
};

LoadedConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string bytes = buf.str();
    LoadedConfig cfg;
    cfg.hash = hash_hex(fnv1a64(bytes));
    cfg.root = json::parse(bytes);  // json::exception maps to exit 1
    return cfg;
}

double get_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}

MeshPolicy mesh_from(const json& j) {
    MeshPolicy m;
    if (j.contains("mesh")) {
        const json& mj = j.at("mesh");
        if (mj.contains("nr")) m.nr = mj.at("nr").get<int>();
        if (mj.contains("ntheta")) m.na = mj.at("ntheta").get<int>();
        if (mj.contains("nt")) m.nt = mj.at("nt").get<int>();
    }
    return m;
}

std::vector<double> grid_from(const json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("config missing ") + key);
    return j.at(key).get<std::vector<double>>();
}

CoefficientFamily family_from(const json& j) {
    CoefficientFamily fam;
    if (!j.contains("family")) return fam;  // identity coefficients
    const json& fj = j.at("family");
    if (fj.contains("label")) fam.label = fj.at("label").get<std::string>();
    fam.nu = get_or(fj, "nu", 0.5);
    fam.eps = get_or(fj, "eps", 0.0);
    if (fj.contains("a_sigma")) fam.a_sigma = Modulus::from_json(fj.at("a_sigma"));
    if (fj.contains("h_sign")) fam.h_sign = fj.at("h_sign").get<int>();
    if (fj.contains("drift")) fam.drift = Drift::from_json(fj.at("drift"));
    if (fam.eps > 0.0 && !fam.a_sigma)
        throw std::domain_error("family invariant violated: eps > 0 needs a_sigma");
    return fam;
}

void check_command_field(const json& cfg, const std::string& command) {
    if (cfg.contains("command") && cfg.at("command").get<std::string>() != command)
        throw std::domain_error("config invariant violated: config command '" +
                                cfg.at("command").get<std::string>() +
                                "' does not match CLI command '" + command + "'");
}

json scan_summary(const HopfScanReport& rep) {
    json rows = json::array();
    double cmin = 0.0, cmax = 0.0;
    bool first = true;
    int failed = 0;
    for (const auto& r : rep.rows) {
        rows.push_back({{"rho", r.rho}, {"dnv0", r.dnv0}, {"c", r.c}, {"status", r.status}});
        if (r.status != "ok") {
            ++failed;
            continue;
        }
        if (first || r.c < cmin) cmin = r.c;
        if (first || r.c > cmax) cmax = r.c;
        first = false;
    }
    return {{"family", rep.family_label},
            {"rows", rows},
            {"c_min", cmin},
            {"c_max", cmax},
            {"failed_rows", failed}};
}

int run_modulus(const json& cfg, const std::string& hash, const std::filesystem::path& out) {
    const Modulus sigma = Modulus::from_json(cfg.at("modulus"));
    std::vector<double> grid;
    if (cfg.contains("r_grid"))
        grid = grid_from(cfg, "r_grid");
    else
        for (int k = 12; k >= 0; --k) grid.push_back(std::ldexp(1.0, -k));

    if (!sigma.is_dini())
        throw DivergenceError("modulus " + sigma.describe() + " is not Dini, J_sigma diverges");

    std::vector<std::string> rows;
    for (double r : grid) {
        rows.push_back(format_number(r) + "," + format_number(sigma(r)) + "," +
                       format_number(smooth_hat(sigma, r)) + "," +
                       format_number(dini_integral(sigma, r)));
    }
    write_csv(out / "modulus.csv", hash, "r,sigma,sigma_hat,dini_integral", rows);
    write_summary_json(out / "summary.json", hash,
                       {{"command", "modulus"},
                        {"modulus", sigma.to_json()},
                        {"is_dini", sigma.is_dini()},
                        {"dini_range", sigma.dini_range()}});
    return 0;
}

int run_conditions(const json& cfg, const std::string& hash, const std::filesystem::path& out) {
    const DomainModel domain = DomainModel::from_json(cfg.at("domain"));
    const Drift drift = Drift::from_json(cfg.at("drift"));
    const Modulus sigma = cfg.contains("sigma") ? Modulus::from_json(cfg.at("sigma"))
                                                : (drift.family() == DriftFamily::Zero
                                                       ? Modulus::power(1.0)
                                                       : drift.sigma());
    const GammaParameter gamma(get_or(cfg, "gamma", 1.0));
    const std::vector<double> grid = grid_from(cfg, "r_grid");

    const SufficiencyReport rep = check_sufficiency(drift, sigma, domain, grid, gamma);
    write_csv(out / "conditions.csv", hash, "r,omega,bound_rhs,ratio", sufficiency_rows(rep));
    write_summary_json(out / "summary.json", hash,
                       {{"command", "conditions"},
                        {"drift", drift.to_json()},
                        {"rhs", rep.rhs_label},
                        {"fitted_constant", rep.fitted_constant},
                        {"verdict", rep.pass ? "pass" : "fail"}});
    return 0;
}

int run_solve(const json& cfg, const std::string& hash, const std::filesystem::path& out) {
    const DomainModel domain = DomainModel::from_json(cfg.at("domain"));
    const MeshPolicy mesh = mesh_from(cfg);
    const double rho = get_or(cfg, "rho", domain.R / 2.0);
    const CoefficientFamily fam = family_from(cfg);
    CoefficientField probe = fam.instantiate(domain.n);
    probe.center[domain.n - 1] = rho;
    probe.validate(rho);

    std::vector<std::string> rows;
    json summary{{"command", "solve"}};
    if (domain.kind == DomainKind::Elliptic) {
        AnnulusProblem p = AnnulusProblem::make(domain.n, rho, mesh.nr, mesh.na,
                                                fam.instantiate(domain.n), domain.R);
        const DiscreteField v = solve_annulus(p);
        for (int i = 0; i <= p.mesh.nr; ++i)
            for (int j = 0; j < p.mesh.num_angular_nodes(); ++j)
                rows.push_back(format_number(p.mesh.radius(i)) + "," +
                               format_number(p.mesh.angle(j)) + "," + format_number(v.at(i, j)));
        write_csv(out / "solution.csv", hash, "r,theta,value", rows);
        summary["residual"] = v.residual;
        summary["dn_origin"] = normal_derivative_origin(v, rho);
    } else {
        CylinderProblem p = CylinderProblem::make(domain.n, rho, mesh.nr, mesh.na, mesh.nt,
                                                  fam.instantiate(domain.n), domain.R);
        if (cfg.contains("scheme") && cfg.at("scheme").get<std::string>() == "backward-euler")
            p.scheme = TimeScheme::BackwardEuler;
        const SpaceTimeField v = solve_cylinder(p);
        for (int k = 0; k <= v.nt; ++k) {
            const double t = -rho * rho + k * v.dt;
            for (int i = 0; i < p.mesh.nr; ++i)
                for (int j = 0; j < p.mesh.num_angular(); ++j)
                    rows.push_back(format_number(p.mesh.radius(i)) + "," +
                                   format_number(p.mesh.angle(j)) + "," + format_number(t) + "," +
                                   format_number(v.slices[k][p.mesh.cell_index(i, j)]));
        }
        write_csv(out / "solution.csv", hash, "r,theta,t,value", rows);
        summary["residual"] = v.residual;
        summary["dn_origin"] = normal_derivative_origin(v, rho);
    }
    write_summary_json(out / "summary.json", hash, summary);
    return 0;
}

int run_scan(const json& cfg, const std::string& hash, const std::filesystem::path& out,
             bool parabolic) {
    const int n = cfg.contains("n") ? cfg.at("n").get<int>() : 2;
    const double R = get_or(cfg, "R", 1.0);
    const MeshPolicy mesh = mesh_from(cfg);
    const std::vector<double> grid = grid_from(cfg, "rho_grid");
    const CoefficientFamily fam = family_from(cfg);

    // Fail-fast validation before any computation starts.
    for (double rho : grid) {
        if (!(rho > 0.0 && rho <= R / 2.0))
            throw std::domain_error("validation failed: rho " + std::to_string(rho) +
                                    " outside (0, R/2]");
        CoefficientField f = fam.instantiate(n);
        f.center[n - 1] = rho;
        f.validate(rho);
    }

    HopfScanReport rep;
    std::string csv_name;
    if (parabolic) {
        TimeScheme scheme = TimeScheme::CrankNicolson;
        if (cfg.contains("scheme") && cfg.at("scheme").get<std::string>() == "backward-euler")
            scheme = TimeScheme::BackwardEuler;
        rep = parabolic_hopf_scan(fam, grid, mesh, n, R, scheme);
        csv_name = "parabolic_scan.csv";
    } else {
        rep = hopf_constant_scan(fam, grid, mesh, n, R);
        csv_name = "hopf_scan.csv";
    }

    write_csv(out / csv_name, hash, "rho,dnv0,c,psi_term,z_minus_psi,v_minus_z,status",
              hopf_scan_rows(rep));
    json summary = scan_summary(rep);
    summary["command"] = parabolic ? "parabolic-scan" : "hopf-scan";
    write_summary_json(out / "summary.json", hash, summary);

    return summary.at("failed_rows").get<int>() == 0 ? 0 : 3;
}

int run_t1(const json& cfg, const std::string& hash, const std::filesystem::path& out) {
    const double R = get_or(cfg, "R", 1.0);
    const MeshPolicy mesh = cfg.contains("mesh") ? mesh_from(cfg) : MeshPolicy{24, 36, 0};
    const Drift drift = Drift::from_json(cfg.at("drift"));
    const std::vector<double> grid = grid_from(cfg, "rho_grid");
    const DomainModel domain{DomainKind::Elliptic, 2, R, Modulus::power(1.0)};

    std::vector<std::string> rows;
    json jrows = json::array();
    for (double rho : grid) {
        const double t1 = estimate_T1_norm(rho, drift, mesh, R);
        const double w =
            drift.family() == DriftFamily::Zero ? 0.0 : omega(drift, domain, std::min(2.0 * R, 2.0 * rho));
        const double ratio = w > 0.0 ? t1 / w : 0.0;
        rows.push_back(format_number(rho) + "," + format_number(t1) + "," + format_number(w) +
                       "," + format_number(ratio));
        jrows.push_back({{"rho", rho}, {"t1_norm", t1}, {"omega_2rho", w}, {"ratio", ratio}});
    }
    write_csv(out / "t1_norm.csv", hash, "rho,t1_norm,omega_2rho,ratio", rows);
    write_summary_json(out / "summary.json", hash,
                       {{"command", "t1-norm"}, {"rows", jrows}, {"drift", drift.to_json()}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hopflab: boundary point lemma numerical laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;

    const std::vector<std::string> commands = {"modulus",   "conditions",     "solve",
                                               "hopf-scan", "parabolic-scan", "t1-norm"};
    for (const std::string& name : commands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON experiment config")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", jobs, "worker pool size for scan rows");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();

#ifdef _OPENMP
    omp_set_num_threads(std::max(1, jobs));
#endif

    try {
        const LoadedConfig cfg = load_config(config_path);
        check_command_field(cfg.root, command);
        std::filesystem::create_directories(out_dir);
        const std::filesystem::path out(out_dir);

        int rc = 0;
        if (command == "modulus")
            rc = run_modulus(cfg.root, cfg.hash, out);
        else if (command == "conditions")
            rc = run_conditions(cfg.root, cfg.hash, out);
        else if (command == "solve")
            rc = run_solve(cfg.root, cfg.hash, out);
        else if (command == "hopf-scan")
            rc = run_scan(cfg.root, cfg.hash, out, false);
        else if (command == "parabolic-scan")
            rc = run_scan(cfg.root, cfg.hash, out, true);
        else if (command == "t1-norm")
            rc = run_t1(cfg.root, cfg.hash, out);
        if (rc == 3) std::cerr << "hopflab: some scan rows failed; partial reports written\n";
        return rc;
    } catch (const json::exception& e) {
        std::cerr << "hopflab: malformed config: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "hopflab: " << e.what() << "\n";
        return 1;
    } catch (const DivergenceError& e) {
        std::cerr << "hopflab: validation failed: " << e.what() << "\n";
        return 2;
    } catch (const InvariantViolation& e) {
        std::cerr << "hopflab: validation failed: " << e.what() << "\n";
        return 2;
    } catch (const UnsupportedFamilyError& e) {
        std::cerr << "hopflab: validation failed: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "hopflab: numerical failure: " << e.what() << " (residual " << e.residual
                  << ")\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "hopflab: validation failed: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hopflab: numerical failure: " << e.what() << "\n";
        return 3;
    }
}
