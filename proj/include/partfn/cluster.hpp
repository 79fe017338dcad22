#pragma once

#include "partfn/hamiltonian.hpp"
#include "partfn/moments.hpp"

#include <vector>

namespace partfn {

/**
 * Radius of the certified zero-free disk, 1 / (5 e g h kappa). Infinite for
 * a Hamiltonian with no terms.
 */
double beta0(const GeometryParams& gp);

/** Term-by-term convergence radius of the cluster expansion, 1 / (g h (e-1)). */
double expansion_radius(const GeometryParams& gp);

/** (e^2 g h |beta| + log d) n, the uniform bound on |log|Z|| inside the disk. */
double log_abs_z_bound(const GeometryParams& gp, double abs_beta, int n, int d);

/**
 * A connected family of distinct term supports: the intersection graph of the
 * members is connected and the root site lies in their union. Members are
 * sorted site lists, listed in lexicographic order.
 */
struct ConnectedSet {
    std::vector<std::vector<int>> members;
    int root = 0;

    int size() const { return static_cast<int>(members.size()); }
    std::vector<int> support() const;
};

/**
 * All connected families rooted at x0 with at most max_size members, grown
 * breadth-first over the distinct supports of H with canonical deduplication.
 * Deterministic order: by size, then lexicographically.
 */
std::vector<ConnectedSet> enumerate_connected_sets(const LocalHamiltonian& H, int x0,
                                                   int max_size,
                                                   std::size_t budget = 1'000'000);

struct ClusterWeight {
    Complex value{0.0, 0.0};  // Taylor terms p = size .. p_max
    double tail_bound = 0.0;  // rigorous bound on the dropped p > p_max terms
    int p_max = 0;
};

/**
 * W_beta of one connected family: the Taylor series of the interaction weight
 * in beta, truncated at p_max. The p-th term gathers the tuples drawing from
 * the family with every member used at least once, evaluated by
 * inclusion-exclusion over sub-families (one dense eigensolve per non-empty
 * sub-family support). tail_bound uses the surjection-counting envelope of
 * (e^{|beta| h} - 1)^size.
 */
ClusterWeight cluster_weight(const LocalHamiltonian& H, const ConnectedSet& cluster,
                             Complex beta, int p_max,
                             const MomentOptions& opts = {});

struct ExpansionReport {
    double beta0 = 0.0;
    double radius = 0.0;              // expansion_radius of the instance
    Complex z_full{0.0, 0.0};
    Complex z_reduced{0.0, 0.0};      // Z with the root site removed
    Complex reconstruction{0.0, 0.0}; // d Z_reduced + sum of weighted cluster terms
    std::vector<int> counts;          // clusters per size, counts[k-1] = size k
    double residual = 0.0;            // |Z - reconstruction| / |Z|
    double tail = 0.0;                // sum of tail bounds, weighted and normalized
};

/**
 * Checks the site-removal identity
 *   Z(Lambda) = d Z(Lambda - x0) + sum_X W_beta(X) Z(Lambda - supp X)
 * with clusters up to max_size members and weights truncated at p_max.
 * Exact partition functions come from dense diagonalization.
 */
ExpansionReport expansion_residual(const LocalHamiltonian& H, int x0, Complex beta,
                                   int max_size, int p_max,
                                   const MomentOptions& opts = {});

struct RatioCheck {
    int site = 0;
    double log_ratio_abs = 0.0;  // |log |Z(Lambda)| / (d |Z(Lambda - x)|)|
    double bound = 0.0;          // e^2 g h |beta|
    bool ok = false;
};

struct RatioReport {
    double beta0 = 0.0;
    bool within_domain = false;  // |beta| <= beta0
    bool all_ok = false;
    std::vector<RatioCheck> checks;
};

/** Single-site removal ratios against the e^2 g h |beta| bound, every site. */
RatioReport ratio_bound_check(const LocalHamiltonian& H, Complex beta);

}  // namespace partfn
