#include "partfn/correlations.hpp"

#include "partfn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partfn {

CovarianceSeries covariance_series(const LocalHamiltonian& H, const LocalTerm& O1,
                                   const LocalTerm& O2, int K, const MomentOptions& opts) {
    if (K < 0) throw std::invalid_argument("covariance_series: negative order");
    MomentEngine engine(H, K, opts);
    PowerSeries t12 = engine.weighted_series({O1, O2});
    PowerSeries t1 = engine.weighted_series({O1});
    PowerSeries t2 = engine.weighted_series({O2});
    PowerSeries zs = engine.z_series();

    CovarianceSeries out;
    out.series = series_sub(series_div(t12, zs),
                            series_mul(series_div(t1, zs), series_div(t2, zs)));
    out.L_predicted = connection_distance(H, O1.support, O2.support);
    out.vanishing_order = vanishing_order(out.series);
    return out;
}

int vanishing_order(const PowerSeries& s, double tol) {
    double peak = 0.0;
    for (const Complex& c : s.coeffs) peak = std::max(peak, std::abs(c));
    const double threshold = tol * std::max(1.0, peak);
    for (std::size_t j = 0; j < s.coeffs.size(); ++j)
        if (std::abs(s.coeffs[j]) > threshold) return static_cast<int>(j);
    return kUnreachable;
}

namespace {

int site_position(const std::vector<Site>& sites, int label, const char* who) {
    auto it = std::lower_bound(sites.begin(), sites.end(), label,
                               [](const Site& s, int v) { return s.index < v; });
    if (it == sites.end() || it->index != label)
        throw std::invalid_argument(std::string(who) + ": unknown site label");
    return static_cast<int>(it - sites.begin());
}

/* Hop distances from the anchor in the graph whose edges join sites sharing a
   term. Entries stay kUnreachable outside the anchor's component. */
std::vector<int> hop_distances(const LocalHamiltonian& H, int anchor_pos) {
    const auto& sites = H.sites();
    const int ns = static_cast<int>(sites.size());
    std::vector<std::vector<int>> adj(ns);
    for (const LocalTerm& t : H.terms()) {
        for (std::size_t a = 0; a < t.support.size(); ++a) {
            for (std::size_t b = a + 1; b < t.support.size(); ++b) {
                int pa = site_position(sites, t.support[a], "decay_profile");
                int pb = site_position(sites, t.support[b], "decay_profile");
                adj[pa].push_back(pb);
                adj[pb].push_back(pa);
            }
        }
    }
    std::vector<int> dist(ns, kUnreachable);
    dist[anchor_pos] = 0;
    std::vector<int> frontier{anchor_pos};
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int u : frontier) {
            for (int v : adj[u]) {
                if (dist[v] != kUnreachable) continue;
                dist[v] = dist[u] + 1;
                next.push_back(v);
            }
        }
        frontier = std::move(next);
    }
    return dist;
}

}  // namespace

DecayProfile decay_profile(const LocalHamiltonian& H, double beta, int anchor,
                           const std::vector<int>& probes) {
    const auto& sites = H.sites();
    const int apos = site_position(sites, anchor, "decay_profile");

    std::vector<int> hops;
    if (!H.has_coords()) hops = hop_distances(H, apos);

    Matrix zop = Matrix::Zero(H.d(), H.d());
    zop(0, 0) = 1.0;
    zop(1, 1) = -1.0;

    SpectralDecomposition S = spectrum(H);
    const LocalTerm oa{{anchor}, zop};

    DecayProfile out;
    for (int p : probes) {
        const int ppos = site_position(sites, p, "decay_profile");
        int dist = 0;
        if (H.has_coords()) {
            const auto& ca = *sites[apos].coords;
            const auto& cp = *sites[ppos].coords;
            for (std::size_t i = 0; i < ca.size(); ++i)
                dist = std::max(dist, std::abs(ca[i] - cp[i]));
        } else {
            dist = hops[ppos];
        }
        const LocalTerm ob{{p}, zop};
        out.distances.push_back(dist);
        out.covariances.push_back(std::abs(gibbs_covariance(S, beta, oa, ob)));
    }

    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (out.distances[i] == kUnreachable || out.covariances[i] < 1e-13) continue;
        xs.push_back(static_cast<double>(out.distances[i]));
        ys.push_back(std::log(out.covariances[i]));
    }
    if (xs.size() < 3) return out;

    const double np = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= np;
    my /= np;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx <= 0.0) return out;
    const double slope = sxy / sxx;
    if (slope >= 0.0) return out;

    out.fitted = true;
    out.xi = -1.0 / slope;
    out.c = std::exp(my - slope * mx);
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (my + slope * (xs[i] - mx));
        ss_res += r * r;
    }
    out.r_squared = syy <= 0.0 ? 1.0 : 1.0 - ss_res / syy;
    return out;
}

}  // namespace partfn
