#include "partfn/extrapolation.hpp"

#include <algorithm>
#include <cmath>

#include "partfn/cluster.hpp"

namespace partfn {

double truncation_bound(BoundKind kind, double size, double b, int K) {
    if (b <= 1.0) throw std::invalid_argument("truncation_bound: requires b > 1");
    if (size < 0.0) throw std::invalid_argument("truncation_bound: negative size");
    if (K < 0) throw std::invalid_argument("truncation_bound: negative order");
    const double geo = std::pow(b, K) * (b - 1.0);
    switch (kind) {
        case BoundKind::bounded: return size / geo;
        case BoundKind::polynomial: return size / (static_cast<double>(K + 1) * geo);
    }
    throw std::invalid_argument("truncation_bound: unknown kind");
}

int choose_K(double M, double b, double eps, int k_cap) {
    if (eps <= 0.0) throw std::invalid_argument("choose_K: eps must be positive");
    for (int K = 0; K <= k_cap; ++K)
        if (truncation_bound(BoundKind::bounded, M, b, K) <= eps) return K;
    throw CapError("choose_K: order above cap " + std::to_string(k_cap) +
                   " needed for eps " + std::to_string(eps));
}

Estimate estimate_log_partition(const LocalHamiltonian& H, Complex beta, double eps,
                                std::optional<ZeroFreeDisk> disk, const MomentOptions& opts) {
    if (eps <= 0.0) throw std::invalid_argument("estimate_log_partition: eps must be positive");
    Estimate est;
    est.beta = beta;
    const double nlogd = H.n() * std::log(static_cast<double>(H.d()));
    if (std::abs(beta) == 0.0) {
        est.value = Complex(nlogd, 0.0);
        est.series = PowerSeries({Complex(nlogd, 0.0)}, "beta");
        est.b = std::numeric_limits<double>::infinity();
        return est;
    }
    if (disk) {
        if (disk->b <= 1.0)
            throw std::invalid_argument("estimate_log_partition: disk radius must exceed 1");
        est.b = disk->b;
        est.M = disk->M;
    } else {
        const GeometryParams gp = geometry_params(H);
        const double b0 = beta0(gp);
        if (std::abs(beta) >= b0)
            throw NoCertificateError("estimate_log_partition: |beta| = " +
                                     std::to_string(std::abs(beta)) +
                                     " is outside the certified disk beta0 = " +
                                     std::to_string(b0));
        est.b = b0 / std::abs(beta);
        est.M = log_abs_z_bound(gp, b0, H.n(), H.d());
    }
    est.K = choose_K(est.M, est.b, eps, std::min(opts.k_max, 512));
    est.series = log_series(z_series(H, est.K, opts));
    est.value = series_eval(est.series, beta);
    est.certified_error = truncation_bound(BoundKind::bounded, est.M, est.b, est.K);
    return est;
}

PolyMap map_disk_to_region(const RegionSpec& region, int degree_budget) {
    constexpr int kSamples = 4096;
    PolyMap map;
    map.samples = kSamples;
    if (region.beta <= 0.0)
        throw std::invalid_argument("map_disk_to_region: target beta must be positive");
    map.target_beta = region.beta;

    if (region.kind == RegionSpec::Kind::disk) {
        if (region.radius <= 0.0)
            throw std::invalid_argument("map_disk_to_region: disk radius must be positive");
        map.coeffs = {Complex(0.0, 0.0), Complex(region.beta, 0.0)};
        map.max_distance = std::max(0.0, region.beta - region.radius);
        map.verified = region.beta <= region.radius * (1.0 + 1e-12);
        return map;
    }

    const double delta = region.delta;
    if (delta <= 0.0)
        throw std::invalid_argument("map_disk_to_region: rect half-width must be positive");

    if (delta >= region.beta) {
        // The delta-ball around 0 already swallows the scaled circle.
        map.coeffs = {Complex(0.0, 0.0), Complex(region.beta, 0.0)};
    } else {
        // phi(z) = beta S_D(q z) / S_D(q): a truncated -log(1 - qz) squeezes the
        // circle into a strip of relative half-width ~ (pi/2)/L around [0, beta],
        // where L = -log(1 - q). The factor 1.8 leaves headroom for the corner
        // near the negative real axis and for the truncation error.
        const double L = 1.8 * region.beta / delta;
        const double q = 1.0 - std::exp(-L);
        long D = static_cast<long>(std::ceil(3.0 * std::exp(L)));
        D = std::min<long>(D, degree_budget);
        D = std::max<long>(D, 2);
        double s = 0.0;
        double qp = 1.0;
        std::vector<Complex> coeffs(static_cast<std::size_t>(D) + 1, Complex(0.0, 0.0));
        for (long k = 1; k <= D; ++k) {
            qp *= q;
            coeffs[static_cast<std::size_t>(k)] = Complex(qp / static_cast<double>(k), 0.0);
            s += qp / static_cast<double>(k);
        }
        for (auto& c : coeffs) c *= region.beta / s;
        map.coeffs = std::move(coeffs);
    }

    double worst = 0.0;
    for (int i = 0; i < kSamples; ++i) {
        const double theta = 2.0 * M_PI * static_cast<double>(i) / kSamples;
        const Complex z(std::cos(theta), std::sin(theta));
        Complex p(0.0, 0.0);
        for (auto it = map.coeffs.rbegin(); it != map.coeffs.rend(); ++it) p = p * z + *it;
        const double re = std::clamp(p.real(), 0.0, region.beta);
        const double dist = std::hypot(p.real() - re, p.imag());
        worst = std::max(worst, dist);
    }
    map.max_distance = worst;
    map.verified = worst <= delta + 1e-12;
    return map;
}

}  // namespace partfn
