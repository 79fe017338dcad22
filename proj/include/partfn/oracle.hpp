#pragma once

#include "partfn/hamiltonian.hpp"

#include <array>
#include <vector>

namespace partfn {

/**
 * Dense spectral decomposition of a local Hamiltonian. When every term is
 * real the eigenproblem is solved in real arithmetic and basis_real holds the
 * eigenvectors; otherwise basis_complex does. Eigenvalues ascend.
 */
struct SpectralDecomposition {
    Eigen::VectorXd energies;
    Eigen::MatrixXd basis_real;
    Eigen::MatrixXcd basis_complex;
    std::vector<int> labels;  // site labels of the register, ascending
    int n = 0;
    int d = 2;

    bool has_basis() const { return basis_real.size() > 0 || basis_complex.size() > 0; }
    bool real_basis() const { return basis_real.size() > 0; }
    long dim() const { return energies.size(); }
};

/**
 * Full diagonalization; refuses dimensions above dim_cap. keep_basis = false
 * drops eigenvectors (partition functions only need energies).
 */
SpectralDecomposition spectrum(const LocalHamiltonian& H, bool keep_basis = true,
                               long dim_cap = 4096);

/** Z(beta) = sum_k exp(-beta E_k), compensated summation over the spectrum. */
Complex partition_function(const SpectralDecomposition& S, Complex beta);

/** log |Z(beta)|, computed with the dominant energy factored out; -inf if Z = 0. */
double log_abs_partition(const SpectralDecomposition& S, Complex beta);

/** log Z(beta) for real beta (Z > 0), overflow-safe. */
double log_partition_real(const SpectralDecomposition& S, double beta);

/** -log Z / beta for real beta > 0. */
double free_energy(const SpectralDecomposition& S, double beta);

/**
 * Tr[e^{-beta H} O_1 ... O_r] / Z for local observables, applied in the given
 * order. Requires the basis.
 */
Complex gibbs_expectation(const SpectralDecomposition& S, double beta,
                          const std::vector<LocalTerm>& obs);

/** <O1 O2> - <O1><O2> in the Gibbs state. */
Complex gibbs_covariance(const SpectralDecomposition& S, double beta, const LocalTerm& O1,
                         const LocalTerm& O2);

struct FisherZero {
    Complex location;
    double residual = 0.0;  // |Z| / d^n at the converged point
    int multiplicity_hint = 1;
};

/**
 * Scan of Z(beta) over the rectangle [re_lo, re_hi] x [im_lo, im_hi] on a
 * grid_re x grid_im grid, followed by Newton refinement seeded at local
 * minima of |Z|. Only zeros inside the rectangle with normalized residual
 * <= tol are reported. grid, if non-null, receives (re, im, |Z|) at every
 * node, outer loop over re.
 */
std::vector<FisherZero> fisher_zero_scan(const SpectralDecomposition& S, double re_lo,
                                         double re_hi, double im_lo, double im_hi, int grid_re,
                                         int grid_im, double tol = 1e-10,
                                         std::vector<std::array<double, 3>>* grid = nullptr);

}  // namespace partfn
