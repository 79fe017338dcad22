#pragma once

#include "partfn/extrapolation.hpp"
#include "partfn/hamiltonian.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace partfn {

/**
 * Spin-1/2 XXZ model on a graph,
 *   H(mu) = -sum_{(u,v)} [ J_uv (X_u X_v + Y_u Y_v) + Jzz_uv Z_u Z_v ]
 *           - (mu/2) sum_i (Z_i + 1).
 * The hopping part conserves the number of up spins, so Z factors over
 * magnetization sectors.
 */
struct XXZEdge {
    int u = 0;
    int v = 0;
    double j = 0.0;
    double jzz = 0.0;
};

struct XXZInstance {
    int n = 0;
    std::vector<XXZEdge> edges;

    std::string serialize() const;
    static XXZInstance parse(const std::string& text);
    static XXZInstance parse_file(const std::string& path);
};

/** FNV-1a 64 hash of the canonical serialization, as 16 hex digits. */
std::string xxz_instance_hash(const XXZInstance& inst);

struct FerroCheck {
    bool ferromagnetic = false;
    std::vector<double> margins;  // jzz - threshold per edge, >= 0 on every edge when ferro
};

/**
 * Threshold on Jzz for the two-site coupling matrix
 * [Jxx, Jxy; Jyx, Jyy] to admit the circle guarantee:
 *   (sqrt((Jxx-Jyy)^2 + (Jxy+Jyx)^2) + sqrt((Jxx+Jyy)^2 + (Jxy-Jyx)^2)) / 2.
 */
double ferro_threshold(double jxx, double jyy, double jxy, double jyx);

/** Edge-wise Jzz >= |J| test (the XXZ specialization of ferro_threshold). */
FerroCheck check_ferromagnetic(const XXZInstance& inst);

/**
 * Hopping+Ising block of sector k (k sites in the Z=+1 state), a real
 * symmetric matrix of dimension C(n, k); q_k = sum exp(beta * eig).
 */
Eigen::MatrixXd sector_block(const XXZInstance& inst, int k, long dim_cap = 1 << 14);

struct SectorPolynomial {
    std::vector<double> q;  // q[k]; unfilled sectors (truncated mode) hold NaN
    double beta = 0.0;
    int n = 0;
    int computed_up_to = 0;  // q[0..computed_up_to] are exact
};

/**
 * Sector partition sums q_k as the coefficients of Z(mu) in z = e^{beta mu}.
 * k_max limits the diagonalized sectors (the tail stays NaN); by symmetry of
 * the flip-invariant interaction the polynomial is palindromic, so the top
 * sectors mirror the bottom ones when needed.
 */
SectorPolynomial sector_coefficients(const XXZInstance& inst, double beta,
                                     std::optional<int> k_max = std::nullopt,
                                     long dim_cap = 1 << 14);

/** Z(beta, mu) = sum_k q_k e^{beta mu k}, overflow-safe. Needs all sectors. */
double xxz_log_partition(const SectorPolynomial& poly, double mu);

struct LeeYangRoots {
    std::vector<Complex> roots;
    double max_deviation = 0.0;  // max | |z| - 1 |
};

/** All roots of sum_k q_k z^k via the companion matrix. Needs all sectors. */
LeeYangRoots lee_yang_roots(const SectorPolynomial& poly);

/**
 * Certified estimate of log p(z) for p(z) = sum q_k z^k from the truncated
 * log-series: since p is degree n and (for ferromagnetic couplings) zero-free
 * off the unit circle, the tail beyond order K is bounded by
 * n / ((K+1) b^K (b-1)) with b = 1/z (z < 1) or b = z after the reversal
 * log p(z) = n log z + log p~(1/z) (z > 1). Raises NoCertificateError at
 * z = 1. Requires q[0..K] (or the mirrored top sectors), not the full set.
 */
Estimate xxz_estimate(const SectorPolynomial& poly, double z, double eps);

/** Same estimate at a fixed truncation order K. */
Estimate xxz_estimate_at_K(const SectorPolynomial& poly, double z, int K);

/** The equivalent general local Hamiltonian, for oracle cross-checks. */
LocalHamiltonian to_local_hamiltonian(const XXZInstance& inst, double mu);

/** Random connected graph with Jzz = |J| + U(0,1) on every edge. */
XXZInstance random_ferromagnetic_xxz(int n, std::uint64_t seed);

}  // namespace partfn
