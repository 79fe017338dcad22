#pragma once

#include "partfn/hamiltonian.hpp"
#include "partfn/moments.hpp"
#include "partfn/series.hpp"

#include <vector>

namespace partfn {

struct CovarianceSeries {
    PowerSeries series;                 // truncated covariance in powers of beta
    int L_predicted = 0;                // connection distance between the supports
    int vanishing_order = kUnreachable; // first surviving coefficient index
};

/**
 * Series in beta of <O1 O2> - <O1><O2> with <.> = Tr[e^{-beta H} .] / Z(beta),
 * exact through order K. The three weighted trace series and the partition
 * series come from a single moment engine; division and multiplication happen
 * at the series level. Coefficients below the connection distance between the
 * two supports cancel identically.
 */
CovarianceSeries covariance_series(const LocalHamiltonian& H, const LocalTerm& O1,
                                   const LocalTerm& O2, int K,
                                   const MomentOptions& opts = {});

/**
 * Index of the first coefficient with |c_j| > tol * max(1, max_i |c_i|);
 * kUnreachable when every coefficient sits below the threshold.
 */
int vanishing_order(const PowerSeries& s, double tol = 1e-10);

struct DecayProfile {
    std::vector<int> distances;       // per probe; kUnreachable if disconnected
    std::vector<double> covariances;  // |cov(Z_anchor, Z_probe)| per probe
    bool fitted = false;
    double xi = 0.0;         // correlation length, -1/slope of the fit
    double c = 0.0;          // prefactor exp(intercept)
    double r_squared = 0.0;
};

/**
 * Finite-size decay diagnostic at inverse temperature beta: the exact Gibbs
 * covariance of Z-type observables (diag(1, -1, 0, ...)) at the anchor and at
 * each probe, against coordinate distance (max norm) when the instance has
 * coordinates, else against hop distance in the term-adjacency graph. Probes
 * with |cov| < 1e-13 or unreachable are excluded from the least-squares fit
 * of log|cov| against distance; the fit needs three surviving points and a
 * negative slope.
 */
DecayProfile decay_profile(const LocalHamiltonian& H, double beta, int anchor,
                           const std::vector<int>& probes);

}  // namespace partfn
