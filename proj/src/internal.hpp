#pragma once

// Shared assembly internals between the solver and the discrete-operator
// experiments. Not installed; Eigen types stay out of the public headers.

#include <Eigen/Sparse>

#include "hopflab/solver.hpp"

namespace hopflab::detail {

struct AnnulusSystem {
    Eigen::SparseMatrix<double> A;  // interior rows/cols, integrated form
    Eigen::VectorXd boundary_rhs;   // Dirichlet contributions
};

AnnulusSystem assemble_annulus(const AnnulusProblem& problem, bool include_drift);

}  // namespace hopflab::detail
