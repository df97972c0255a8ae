// Benchmark comparing the OpenMP kernels against their serial references:
// drift-functional sup reduction, Hopf-scan rows, and the T1 Green-column
// batch. Prints wall times and checks that both paths agree bitwise.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hopflab/drift_functionals.hpp"
#include "hopflab/experiments.hpp"

using namespace hopflab;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f s   parallel %8.3f s   speedup %5.2fx   %s\n", name,
                serial_s, parallel_s, serial_s / parallel_s,
                identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (OpenMP disabled)\n");
#endif

    const DomainModel half_disc{DomainKind::Elliptic, 2, 1.0, Modulus::power(1.0)};
    const Drift nb = Drift::near_boundary(1.0, Modulus::power(0.5));

    {
        auto t0 = clock_type::now();
        const double vs = omega_serial(nb, half_disc, 0.25);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const double vp = omega(nb, half_disc, 0.25);
        report("omega sup (257 points)", ts, seconds_since(t0), vs == vp);
    }

    {
        const CoefficientFamily fam = CoefficientFamily::dini();
        const std::vector<double> grid{0.5, 0.25, 0.125, 0.0625};
        const MeshPolicy mesh{48, 64, 0};
        auto t0 = clock_type::now();
        const HopfScanReport rs = hopf_constant_scan_serial(fam, grid, mesh);
        const double ts = seconds_since(t0);
        t0 = clock_type::now();
        const HopfScanReport rp = hopf_constant_scan(fam, grid, mesh);
        bool same = rs.rows.size() == rp.rows.size();
        for (std::size_t i = 0; same && i < rs.rows.size(); ++i)
            same = rs.rows[i].c == rp.rows[i].c && rs.rows[i].dnv0 == rp.rows[i].dnv0;
        report("hopf scan (4 rows)", ts, seconds_since(t0), same);
    }

    {
        const Drift unit = Drift::constant({0.0, -1.0, 0.0});
        const MeshPolicy mesh{32, 48, 0};
        auto t0 = clock_type::now();
#ifdef _OPENMP
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        const double vs = estimate_T1_norm(0.25, unit, mesh);
        const double ts = seconds_since(t0);
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
        t0 = clock_type::now();
        const double vp = estimate_T1_norm(0.25, unit, mesh);
        report("T1 green-column batch", ts, seconds_since(t0), vs == vp);
    }

    return 0;
}
