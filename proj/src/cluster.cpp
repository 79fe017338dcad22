#include "partfn/cluster.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <set>

#include "partfn/oracle.hpp"

namespace partfn {

namespace {

constexpr double kE = 2.718281828459045235;

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::vector<int> union_of(const std::vector<std::vector<int>>& members) {
    std::set<int> u;
    for (const auto& m : members) u.insert(m.begin(), m.end());
    return std::vector<int>(u.begin(), u.end());
}

bool intersects(const std::vector<int>& a, const std::vector<int>& b) {
    for (int s : a)
        if (std::binary_search(b.begin(), b.end(), s)) return true;
    return false;
}

// Number of surjections from a p-set onto a k-set.
double surjections(int p, int k) {
    double total = 0.0;
    double binom = 1.0;  // C(k, j)
    for (int j = 0; j <= k; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        total += sign * binom * std::pow(static_cast<double>(k - j), p);
        binom = binom * (k - j) / (j + 1);
    }
    return total;
}

}  // namespace

double beta0(const GeometryParams& gp) {
    const double denom = 5.0 * kE * gp.g * gp.h * gp.kappa;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / denom;
}

double expansion_radius(const GeometryParams& gp) {
    const double denom = gp.g * gp.h * (kE - 1.0);
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / denom;
}

double log_abs_z_bound(const GeometryParams& gp, double abs_beta, int n, int d) {
    return (kE * kE * gp.g * gp.h * abs_beta + std::log(static_cast<double>(d))) * n;
}

std::vector<int> ConnectedSet::support() const { return union_of(members); }

std::vector<ConnectedSet> enumerate_connected_sets(const LocalHamiltonian& H, int x0,
                                                   int max_size, std::size_t budget) {
    bool site_known = false;
    for (const auto& s : H.sites()) site_known |= (s.index == x0);
    if (!site_known) throw std::invalid_argument("enumerate_connected_sets: unknown root site");
    if (max_size < 1) return {};

    std::vector<std::vector<int>> supports;
    for (const auto& t : H.terms())
        if (std::find(supports.begin(), supports.end(), t.support) == supports.end())
            supports.push_back(t.support);
    std::sort(supports.begin(), supports.end());
    const int ns = static_cast<int>(supports.size());

    std::set<std::vector<int>> visited;  // canonical ascending id lists
    std::vector<std::vector<int>> frontier;
    for (int i = 0; i < ns; ++i)
        if (std::binary_search(supports[static_cast<std::size_t>(i)].begin(),
                               supports[static_cast<std::size_t>(i)].end(), x0)) {
            std::vector<int> fam{i};
            if (visited.insert(fam).second) frontier.push_back(fam);
        }
    while (!frontier.empty()) {
        std::vector<std::vector<int>> next;
        for (const auto& fam : frontier) {
            if (static_cast<int>(fam.size()) >= max_size) continue;
            std::vector<int> usites;
            for (int id : fam) {
                const auto& s = supports[static_cast<std::size_t>(id)];
                usites.insert(usites.end(), s.begin(), s.end());
            }
            std::sort(usites.begin(), usites.end());
            for (int i = 0; i < ns; ++i) {
                if (std::binary_search(fam.begin(), fam.end(), i)) continue;
                if (!intersects(supports[static_cast<std::size_t>(i)], usites)) continue;
                std::vector<int> grown = fam;
                grown.insert(std::upper_bound(grown.begin(), grown.end(), i), i);
                if (visited.insert(grown).second) {
                    if (visited.size() > budget)
                        throw CapError("enumerate_connected_sets: budget exceeded");
                    next.push_back(std::move(grown));
                }
            }
        }
        frontier = std::move(next);
    }

    std::vector<std::vector<int>> fams(visited.begin(), visited.end());
    std::sort(fams.begin(), fams.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    std::vector<ConnectedSet> out;
    for (const auto& fam : fams) {
        ConnectedSet cs;
        cs.root = x0;
        for (int id : fam) cs.members.push_back(supports[static_cast<std::size_t>(id)]);
        std::sort(cs.members.begin(), cs.members.end());
        out.push_back(std::move(cs));
    }
    return out;
}

ClusterWeight cluster_weight(const LocalHamiltonian& H, const ConnectedSet& cluster,
                             Complex beta, int p_max, const MomentOptions& opts) {
    const int k = cluster.size();
    if (k < 1) throw std::invalid_argument("cluster_weight: empty cluster");
    if (p_max < k) throw std::invalid_argument("cluster_weight: p_max below cluster size");
    if (p_max > 170) throw CapError("cluster_weight: p_max too large for double factorials");

    // Merge the Hamiltonian terms carried by each member support.
    std::vector<Matrix> member_ops;
    for (const auto& sup : cluster.members) {
        Matrix acc;
        bool found = false;
        for (const auto& t : H.terms())
            if (t.support == sup) {
                if (!found) {
                    acc = t.matrix;
                    found = true;
                } else {
                    acc += t.matrix;
                }
            }
        if (!found) throw std::invalid_argument("cluster_weight: member is not a term support");
        member_ops.push_back(std::move(acc));
    }

    const std::vector<int> supp = cluster.support();
    const int d = H.d();
    {
        const double dim = std::pow(static_cast<double>(d), static_cast<int>(supp.size()));
        if (dim * dim > static_cast<double>(opts.matrix_cap))
            throw CapError("cluster_weight: support dimension exceeds matrix cap");
    }
    const double dim_full = std::pow(static_cast<double>(d), static_cast<int>(supp.size()));

    // T_p = sum_{S subset} (-1)^{k-|S|} Tr_{supp}[ (H_S)^p ] by inclusion-exclusion.
    std::vector<double> tp(static_cast<std::size_t>(p_max) + 1, 0.0);
    for (unsigned sub = 0; sub < (1u << k); ++sub) {
        std::vector<std::vector<int>> msupports;
        for (int i = 0; i < k; ++i)
            if (sub & (1u << i)) msupports.push_back(cluster.members[static_cast<std::size_t>(i)]);
        const std::vector<int> ssupp = union_of(msupports);
        const double sign = ((k - std::popcount(sub)) % 2 == 0) ? 1.0 : -1.0;
        if (ssupp.empty()) {
            tp[0] += sign * dim_full;  // (H_empty)^0 = identity
            continue;
        }
        const long sdim = ipow(d, static_cast<int>(ssupp.size()));
        Matrix A = Matrix::Zero(sdim, sdim);
        {
            int i = 0;
            for (const auto& sup : cluster.members) {
                if (sub & (1u << i)) A += embed_operator(member_ops[static_cast<std::size_t>(i)], sup, ssupp, d);
                ++i;
            }
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
        const double scale = dim_full / static_cast<double>(sdim);
        for (long e = 0; e < es.eigenvalues().size(); ++e) {
            double pw = 1.0;
            for (int p = 0; p <= p_max; ++p) {
                tp[static_cast<std::size_t>(p)] += sign * scale * pw;
                pw *= es.eigenvalues()(e);
            }
        }
    }

    ClusterWeight w;
    w.p_max = p_max;
    double factorial = 1.0;
    Complex beta_pow(1.0, 0.0);
    for (int p = 0; p <= p_max; ++p) {
        if (p > 0) {
            factorial *= p;
            beta_pow *= -beta;
        }
        if (p < k) continue;
        w.value += beta_pow / factorial * tp[static_cast<std::size_t>(p)];
    }

    const double h = geometry_params(H).h;
    const double x = std::abs(beta) * h;
    double captured = 0.0;
    for (int p = k; p <= p_max; ++p) {
        double f = 1.0;
        for (int i = 2; i <= p; ++i) f *= i;
        captured += surjections(p, k) * std::pow(x, p) / f;
    }
    w.tail_bound = dim_full * std::max(0.0, std::pow(std::expm1(x), k) - captured);
    return w;
}

ExpansionReport expansion_residual(const LocalHamiltonian& H, int x0, Complex beta,
                                   int max_size, int p_max, const MomentOptions& opts) {
    const GeometryParams gp = geometry_params(H);
    ExpansionReport rep;
    rep.beta0 = beta0(gp);
    rep.radius = expansion_radius(gp);

    std::vector<int> all_sites;
    for (const auto& s : H.sites()) all_sites.push_back(s.index);

    const SpectralDecomposition full = spectrum(H, false);
    rep.z_full = partition_function(full, beta);

    std::vector<int> minus_root = all_sites;
    minus_root.erase(std::remove(minus_root.begin(), minus_root.end(), x0), minus_root.end());
    rep.z_reduced = partition_function(spectrum(restricted(H, minus_root), false), beta);

    const auto clusters = enumerate_connected_sets(H, x0, max_size);
    rep.counts.assign(static_cast<std::size_t>(max_size), 0);

    std::map<std::vector<int>, Complex> z_minus_cache;
    Complex acc = static_cast<double>(H.d()) * rep.z_reduced;
    double tail = 0.0;
    for (const auto& cl : clusters) {
        rep.counts[static_cast<std::size_t>(cl.size() - 1)] += 1;
        const auto supp = cl.support();
        auto it = z_minus_cache.find(supp);
        if (it == z_minus_cache.end()) {
            std::vector<int> rest;
            for (int s : all_sites)
                if (!std::binary_search(supp.begin(), supp.end(), s)) rest.push_back(s);
            const Complex z = rest.empty()
                                  ? Complex(1.0, 0.0)
                                  : partition_function(spectrum(restricted(H, rest), false), beta);
            it = z_minus_cache.emplace(supp, z).first;
        }
        const ClusterWeight w = cluster_weight(H, cl, beta, p_max, opts);
        acc += w.value * it->second;
        tail += w.tail_bound * std::abs(it->second);
    }
    rep.reconstruction = acc;
    const double denom = std::abs(rep.z_full);
    rep.residual = std::abs(rep.z_full - acc) / denom;
    rep.tail = tail / denom;
    return rep;
}

RatioReport ratio_bound_check(const LocalHamiltonian& H, Complex beta) {
    const GeometryParams gp = geometry_params(H);
    RatioReport rep;
    rep.beta0 = beta0(gp);
    rep.within_domain = std::abs(beta) <= rep.beta0;
    rep.all_ok = true;
    const double bound = kE * kE * gp.g * gp.h * std::abs(beta);

    std::vector<int> all_sites;
    for (const auto& s : H.sites()) all_sites.push_back(s.index);
    const double z_full_log = log_abs_partition(spectrum(H, false), beta);
    for (int x : all_sites) {
        std::vector<int> rest;
        for (int s : all_sites)
            if (s != x) rest.push_back(s);
        const double z_rest_log =
            rest.empty() ? 0.0 : log_abs_partition(spectrum(restricted(H, rest), false), beta);
        RatioCheck c;
        c.site = x;
        c.log_ratio_abs =
            std::abs(z_full_log - std::log(static_cast<double>(H.d())) - z_rest_log);
        c.bound = bound;
        c.ok = c.log_ratio_abs <= bound + 1e-9;
        rep.all_ok = rep.all_ok && c.ok;
        rep.checks.push_back(c);
    }
    return rep;
}

}  // namespace partfn
