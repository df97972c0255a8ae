#pragma once

#include <cmath>
#include <stdexcept>

#include "hopflab/geometry.hpp"

namespace hopflab {

/// Body-fitted vertex-centered polar mesh on the annulus
/// A_rho = { rho/2 < |x - x^rho| < rho } about x^rho = (0,...,0,rho).
/// The angular coordinate is measured from the direction pointing at the
/// origin, so the origin is always the node (i = nr, j = 0).
///   n = 2: theta_j = j*da, j = 0..na-1, periodic, da = 2pi/na.
///   n = 3: axisymmetric spherical (r, phi), phi_j = j*da in [0, pi],
///          j = 0..na, da = pi/na.
struct AnnulusMesh {
    int n = 2;
    double rho = 0.5;
    int nr = 64;  // radial cells; nodes i = 0..nr
    int na = 96;  // angular cells

    double dr() const { return 0.5 * rho / nr; }
    double da() const { return (n == 2 ? 2.0 * M_PI : M_PI) / na; }
    double radius(int i) const { return 0.5 * rho + i * dr(); }
    double angle(int j) const { return j * da(); }
    int num_angular_nodes() const { return n == 2 ? na : na + 1; }
    int num_nodes() const { return (nr + 1) * num_angular_nodes(); }
    int num_interior() const { return (nr - 1) * num_angular_nodes(); }

    bool is_interior(int i) const { return i > 0 && i < nr; }
    int interior_index(int i, int j) const { return (i - 1) * num_angular_nodes() + j; }
    int node_index(int i, int j) const { return i * num_angular_nodes() + j; }

    /// Cartesian position; for n = 3 the azimuth-0 meridian plane.
    Point position(int i, int j) const {
        const double r = radius(i), a = angle(j);
        if (n == 2) return {r * std::sin(a), rho - r * std::cos(a), 0.0};
        return {r * std::sin(a), 0.0, rho - r * std::cos(a)};
    }
};

/// Cell-centered mesh for the parabolic spatial domain B_rho(x^rho):
///   n = 1: interval (0, 2rho), cells x_i = (i+1/2) dx.
///   n = 2: polar disc about x^rho, staggered radial cells r_i = (i+1/2) dr
///          (zero-area face at r = 0), periodic theta lines j*da.
struct DiscMesh {
    int n = 2;
    double rho = 0.5;
    int nr = 48;
    int na = 64;  // ignored for n = 1

    double dr() const { return (n == 1 ? 2.0 * rho : rho) / nr; }
    double da() const { return 2.0 * M_PI / na; }
    double radius(int i) const { return (i + 0.5) * dr(); }
    double angle(int j) const { return j * da(); }
    int num_angular() const { return n == 2 ? na : 1; }
    int num_cells() const { return nr * num_angular(); }
    int cell_index(int i, int j) const { return i * num_angular() + j; }

    Point position(int i, int j) const {
        if (n == 1) return {radius(i), 0.0, 0.0};
        const double r = radius(i), a = angle(j);
        return {r * std::sin(a), rho - r * std::cos(a), 0.0};
    }
};

}  // namespace hopflab
