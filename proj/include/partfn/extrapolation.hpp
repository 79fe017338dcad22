#pragma once

#include "partfn/hamiltonian.hpp"
#include "partfn/moments.hpp"
#include "partfn/series.hpp"

#include <optional>

namespace partfn {

/** Thrown when no zero-free certificate covers the requested point. */
class NoCertificateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class BoundKind {
    bounded,     // |f| <= size on the closed disk of radius b
    polynomial,  // f = log p with deg p <= size and p zero-free inside radius b
};

/**
 * Rigorous bound on |f(z) - sum_{k<=K} f_k z^k| for |z| <= 1 when f is
 * analytic on the closed disk of radius b > 1:
 *   bounded:     size / (b^K (b - 1))
 *   polynomial:  size / ((K+1) b^K (b - 1))
 */
double truncation_bound(BoundKind kind, double size, double b, int K);

/** Smallest K with truncation_bound(bounded, M, b, K) <= eps; CapError above k_cap. */
int choose_K(double M, double b, double eps, int k_cap = 512);

/** Caller-supplied analyticity data, in units where the target point is z = 1. */
struct ZeroFreeDisk {
    double b = 0.0;  // disk radius, > 1
    double M = 0.0;  // bound on |log Z| over the disk
};

struct Estimate {
    Complex value{0.0, 0.0};
    Complex beta{0.0, 0.0};
    int K = 0;
    double certified_error = 0.0;
    double b = 0.0;
    double M = 0.0;
    PowerSeries series;  // log-series coefficients f_0..f_K in beta
};

/**
 * Taylor estimate of log Z(beta) from exact moments at beta = 0.
 *
 * Default mode derives the certificate from the instance itself: the disk of
 * radius beta0 around the origin is zero-free and |log Z| is bounded there by
 * (e^2 g h beta0 + log d) n, so b = beta0/|beta| and K is chosen to push the
 * truncation bound below eps. Raises NoCertificateError when |beta| >= beta0.
 * An explicit disk (b, M) replaces the derived certificate.
 */
Estimate estimate_log_partition(const LocalHamiltonian& H, Complex beta, double eps,
                                std::optional<ZeroFreeDisk> disk = std::nullopt,
                                const MomentOptions& opts = {});

struct RegionSpec {
    enum class Kind { disk, rect } kind = Kind::disk;
    double beta = 0.0;    // target endpoint on the positive real axis
    double delta = 0.0;   // rect: half-width around the segment [0, beta]
    double radius = 0.0;  // disk: radius
};

struct PolyMap {
    std::vector<Complex> coeffs;  // phi(z) = sum_k coeffs[k] z^k, coeffs[0] = 0
    double target_beta = 0.0;     // phi(1), exact by construction
    double max_distance = 0.0;    // max over unit-circle samples of dist(phi, region core)
    bool verified = false;        // image of the sampled circle stays inside the region
    int samples = 0;
};

/**
 * Low-degree polynomial phi with phi(0) = 0 and phi(1) = beta mapping the
 * closed unit disk into the region. For a disk region this is the linear
 * map; for the rectangle-like region { z : dist(z, [0, beta]) <= delta } a
 * truncated logarithm beta S_D(qz)/S_D(q) with S_D(w) = sum_{k<=D} w^k/k is
 * used, with q and D tuned from delta/beta. Containment is checked on 4096
 * unit-circle samples; `verified` reports the outcome.
 */
PolyMap map_disk_to_region(const RegionSpec& region, int degree_budget = 4000);

}  // namespace partfn
