#include "partfn/moments.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>
#include <vector>

namespace partfn {

int resolve_threads(int requested) {
    if (const char* env = std::getenv("PARTFN_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

using Mask = std::uint64_t;
using RSeries = std::vector<double>;
using XSeries = std::vector<Complex>;

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::vector<double> factorials(int K) {
    std::vector<double> f(static_cast<std::size_t>(K) + 1, 1.0);
    for (int k = 1; k <= K; ++k)
        f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k - 1)] * k;
    return f;
}

// a * b truncated to the length of a.
RSeries conv(const RSeries& a, const RSeries& b) {
    RSeries r(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; i + j < r.size() && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

XSeries conv(const XSeries& a, const RSeries& b) {
    XSeries r(a.size(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == Complex(0.0, 0.0)) continue;
        for (std::size_t j = 0; i + j < r.size() && j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return r;
}

bool all_zero(const RSeries& s) {
    for (double v : s)
        if (v != 0.0) return false;
    return true;
}

bool all_zero(const XSeries& s) {
    for (const Complex& v : s)
        if (v != Complex(0.0, 0.0)) return false;
    return true;
}

// Runs f(0..jobs-1) on `threads` workers, strided; rethrows the first error
// in job order. Results must be written to per-job slots.
template <typename F>
void parallel_jobs(int jobs, int threads, F&& f) {
    threads = std::min(threads, jobs);
    if (threads <= 1) {
        for (int j = 0; j < jobs; ++j) f(j);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t]() {
            for (int j = t; j < jobs; j += threads) {
                try {
                    f(j);
                } catch (...) {
                    errors[static_cast<std::size_t>(j)] = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct Bond {
    Mask mask = 0;
    std::vector<int> sites;  // register positions, ascending
    Matrix matrix;
};

}  // namespace

struct MomentEngine::Impl {
    int n = 0;
    int d = 2;
    int K = 0;
    MomentOptions opts;
    int threads = 1;
    bool real_terms = true;
    Mask full = 0;
    std::vector<int> labels;
    std::vector<Bond> bonds;
    std::vector<std::vector<int>> bonds_at;
    int kappa = 0;
    int max_region_sites = 1;
    std::vector<double> fact;

    std::unordered_map<Mask, RSeries> pmemo;  // active mask -> normalized power sums E_p
    std::unordered_map<Mask, RSeries> qmemo;  // mask -> EGF over tuples with that exact union
    std::unordered_map<Mask, RSeries> cmemo;  // mask -> connected part of qmemo
    std::unordered_map<Mask, RSeries> zmemo;  // sublattice mask -> normalized Z series
    std::vector<std::vector<Mask>> regions_at;
    std::size_t region_count = 0;

    Impl(const LocalHamiltonian& H, int K_, MomentOptions o);

    int position(int label) const {
        const auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label)
            throw std::invalid_argument("moments: site label outside the register");
        return static_cast<int>(it - labels.begin());
    }

    Mask active_mask(Mask V) const {
        Mask a = 0;
        Mask rest = V;
        while (rest) {
            const int s = std::countr_zero(rest);
            rest &= rest - 1;
            for (int b : bonds_at[static_cast<std::size_t>(s)])
                if ((bonds[static_cast<std::size_t>(b)].mask & ~V) == 0)
                    a |= bonds[static_cast<std::size_t>(b)].mask;
        }
        return a;
    }

    std::vector<int> mask_sites(Mask m) const {
        std::vector<int> out;
        while (m) {
            out.push_back(std::countr_zero(m));
            m &= m - 1;
        }
        return out;
    }

    void check_dim(int sites_count) const {
        const double dim = std::pow(static_cast<double>(d), sites_count);
        if (dim * dim > static_cast<double>(opts.matrix_cap))
            throw CapError("moments: union support dimension " +
                           std::to_string(static_cast<long>(dim)) + " exceeds matrix cap");
    }

    RSeries solve_power_sums(Mask active);
    const RSeries& power_sums(Mask V);
    void build_regions();
    void prefill_power_sums();
    const RSeries& exact_union_series(Mask U);
    const RSeries& connected_series(Mask U);
    const RSeries& zeta(Mask mask);

    XSeries weighted_mu(const std::vector<LocalTerm>& obs);
};

MomentEngine::Impl::Impl(const LocalHamiltonian& H, int K_, MomentOptions o)
    : n(H.n()), d(H.d()), K(K_), opts(o) {
    if (K < 0) throw std::invalid_argument("moments: negative order");
    if (K > opts.k_max)
        throw CapError("moments: order " + std::to_string(K) + " exceeds k_max " +
                       std::to_string(opts.k_max));
    if (K > 170) throw CapError("moments: order too large for double factorials");
    if (n > 62) throw CapError("moments: more than 62 sites is unsupported");
    threads = resolve_threads(opts.threads);
    fact = factorials(K);
    full = n == 64 ? ~Mask(0) : ((Mask(1) << n) - 1);
    for (const auto& s : H.sites()) labels.push_back(s.index);

    std::map<Mask, Matrix> merged;
    for (const auto& t : H.terms()) {
        Mask m = 0;
        for (int s : t.support) m |= Mask(1) << position(s);
        auto it = merged.find(m);
        if (it == merged.end())
            merged.emplace(m, t.matrix);
        else
            it->second += t.matrix;
    }
    for (auto& [m, mat] : merged) {
        Bond b;
        b.mask = m;
        b.sites = mask_sites(m);
        b.matrix = std::move(mat);
        if (b.matrix.imag().cwiseAbs().maxCoeff() > 1e-14) real_terms = false;
        kappa = std::max(kappa, static_cast<int>(b.sites.size()));
        bonds.push_back(std::move(b));
    }
    bonds_at.resize(static_cast<std::size_t>(n));
    for (std::size_t b = 0; b < bonds.size(); ++b)
        for (int s : bonds[b].sites)
            bonds_at[static_cast<std::size_t>(s)].push_back(static_cast<int>(b));
    max_region_sites = kappa <= 1 ? 1 : 1 + (kappa - 1) * std::max(K, 1);
    max_region_sites = std::min(max_region_sites, n);
    build_regions();
    prefill_power_sums();
}

void MomentEngine::Impl::build_regions() {
    regions_at.resize(static_cast<std::size_t>(n));
    for (int x0 = 0; x0 < n; ++x0) {
        std::set<Mask> visited;
        std::vector<Mask> frontier;
        for (int b : bonds_at[static_cast<std::size_t>(x0)]) {
            const Mask m = bonds[static_cast<std::size_t>(b)].mask;
            if (std::popcount(m) <= max_region_sites && visited.insert(m).second)
                frontier.push_back(m);
        }
        while (!frontier.empty()) {
            std::vector<Mask> next;
            for (Mask U : frontier) {
                Mask rest = U;
                while (rest) {
                    const int s = std::countr_zero(rest);
                    rest &= rest - 1;
                    for (int b : bonds_at[static_cast<std::size_t>(s)]) {
                        const Mask grown = U | bonds[static_cast<std::size_t>(b)].mask;
                        if (grown == U || std::popcount(grown) > max_region_sites) continue;
                        if (visited.insert(grown).second) next.push_back(grown);
                    }
                }
            }
            region_count += next.size();
            if (region_count > opts.region_budget)
                throw CapError("moments: region enumeration budget exceeded");
            frontier = std::move(next);
        }
        regions_at[static_cast<std::size_t>(x0)].assign(visited.begin(), visited.end());
    }
}

RSeries MomentEngine::Impl::solve_power_sums(Mask active) {
    RSeries E(static_cast<std::size_t>(K) + 1, 0.0);
    E[0] = 1.0;
    if (active == 0) return E;
    const auto sites = mask_sites(active);
    check_dim(static_cast<int>(sites.size()));
    const long dim = ipow(d, static_cast<int>(sites.size()));
    Eigen::VectorXd eigs;
    if (real_terms) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& b : bonds)
            if ((b.mask & ~active) == 0)
                A += embed_operator(b.matrix, b.sites, sites, d).real();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
        eigs = es.eigenvalues();
    } else {
        Matrix A = Matrix::Zero(dim, dim);
        for (const auto& b : bonds)
            if ((b.mask & ~active) == 0) A += embed_operator(b.matrix, b.sites, sites, d);
        Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
        eigs = es.eigenvalues();
    }
    for (long i = 0; i < eigs.size(); ++i) {
        double pw = 1.0;
        for (int p = 1; p <= K; ++p) {
            pw *= eigs(i);
            E[static_cast<std::size_t>(p)] += pw;
        }
    }
    const double norm = static_cast<double>(dim);
    for (int p = 1; p <= K; ++p) E[static_cast<std::size_t>(p)] /= norm;
    return E;
}

const RSeries& MomentEngine::Impl::power_sums(Mask V) {
    const Mask active = active_mask(V);
    auto it = pmemo.find(active);
    if (it != pmemo.end()) return it->second;
    return pmemo.emplace(active, solve_power_sums(active)).first->second;
}

void MomentEngine::Impl::prefill_power_sums() {
    std::set<Mask> actives;
    std::set<Mask> seen_regions;
    for (int x0 = 0; x0 < n; ++x0)
        for (Mask U : regions_at[static_cast<std::size_t>(x0)]) {
            if (!seen_regions.insert(U).second) continue;
            Mask V = U;
            while (true) {
                actives.insert(active_mask(V));
                if (V == 0) break;
                V = (V - 1) & U;
            }
        }
    std::vector<Mask> todo(actives.begin(), actives.end());
    // Size check up front so workers cannot hit the cap mid-flight.
    for (Mask a : todo) check_dim(std::popcount(a));
    std::sort(todo.begin(), todo.end(), [](Mask a, Mask b) {
        const int pa = std::popcount(a);
        const int pb = std::popcount(b);
        if (pa != pb) return pa > pb;
        return a < b;
    });
    std::vector<RSeries> results(todo.size());
    parallel_jobs(static_cast<int>(todo.size()), threads,
                  [&](int j) { results[static_cast<std::size_t>(j)] = solve_power_sums(todo[static_cast<std::size_t>(j)]); });
    for (std::size_t j = 0; j < todo.size(); ++j) pmemo.emplace(todo[j], std::move(results[j]));
}

const RSeries& MomentEngine::Impl::exact_union_series(Mask U) {
    auto it = qmemo.find(U);
    if (it != qmemo.end()) return it->second;
    RSeries q(static_cast<std::size_t>(K) + 1, 0.0);
    const int nu = std::popcount(U);
    Mask V = U;
    while (true) {
        const RSeries& E = power_sums(V);
        const double sign = ((nu - std::popcount(V)) % 2 == 0) ? 1.0 : -1.0;
        for (int p = 0; p <= K; ++p) q[static_cast<std::size_t>(p)] += sign * E[static_cast<std::size_t>(p)];
        if (V == 0) break;
        V = (V - 1) & U;
    }
    for (int p = 0; p <= K; ++p) q[static_cast<std::size_t>(p)] /= fact[static_cast<std::size_t>(p)];
    return qmemo.emplace(U, std::move(q)).first->second;
}

const RSeries& MomentEngine::Impl::connected_series(Mask U) {
    auto it = cmemo.find(U);
    if (it != cmemo.end()) return it->second;
    RSeries c = exact_union_series(U);
    const int u = std::countr_zero(U);
    for (Mask V1 : regions_at[static_cast<std::size_t>(u)]) {
        if (V1 == U || (V1 & ~U) != 0 || (V1 & (Mask(1) << u)) == 0) continue;
        const RSeries sub = connected_series(V1);  // copy: recursion may rehash cmemo
        if (all_zero(sub)) continue;
        const RSeries& rest = exact_union_series(U & ~V1);
        const RSeries prod = conv(sub, rest);
        for (std::size_t p = 0; p < c.size(); ++p) c[p] -= prod[p];
    }
    return cmemo.emplace(U, std::move(c)).first->second;
}

const RSeries& MomentEngine::Impl::zeta(Mask mask) {
    auto it = zmemo.find(mask);
    if (it != zmemo.end()) return it->second;
    if (zmemo.size() > opts.region_budget)
        throw CapError("moments: sublattice recursion budget exceeded");
    RSeries z;
    if (mask == 0) {
        z.assign(static_cast<std::size_t>(K) + 1, 0.0);
        z[0] = 1.0;
    } else {
        const int x0 = std::countr_zero(mask);
        z = zeta(mask & ~(Mask(1) << x0));
        for (Mask U : regions_at[static_cast<std::size_t>(x0)]) {
            if ((U & ~mask) != 0) continue;
            // Copies: the recursive calls below may rehash the memo tables.
            const RSeries cu = connected_series(U);
            if (all_zero(cu)) continue;
            const RSeries rest = zeta(mask & ~U);
            const RSeries prod = conv(cu, rest);
            for (std::size_t p = 0; p < z.size(); ++p) z[p] += prod[p];
        }
    }
    return zmemo.emplace(mask, std::move(z)).first->second;
}

XSeries MomentEngine::Impl::weighted_mu(const std::vector<LocalTerm>& obs) {
    Mask W = 0;
    for (const auto& t : obs)
        for (int s : t.support) W |= Mask(1) << position(s);

    // Candidate anchored unions: W plus bonds attached to the growing blob.
    std::set<Mask> cands;
    cands.insert(W);
    std::vector<Mask> frontier{W};
    const int limit = std::min(n, std::popcount(W) + std::max(K, 1) * std::max(kappa - 1, 1));
    while (!frontier.empty()) {
        std::vector<Mask> next;
        for (Mask V : frontier)
            for (const auto& b : bonds) {
                if ((b.mask & V) == 0) continue;
                const Mask grown = V | b.mask;
                if (grown == V || std::popcount(grown) > limit) continue;
                if (cands.insert(grown).second) next.push_back(grown);
            }
        if (cands.size() > opts.region_budget)
            throw CapError("moments: anchored region budget exceeded");
        frontier = std::move(next);
    }
    std::vector<Mask> order(cands.begin(), cands.end());
    std::sort(order.begin(), order.end(), [](Mask a, Mask b) {
        const int pa = std::popcount(a);
        const int pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        return a < b;
    });

    const bool real_obs = real_terms && std::all_of(obs.begin(), obs.end(), [](const LocalTerm& t) {
        return t.matrix.imag().cwiseAbs().maxCoeff() <= 1e-14;
    });

    // R_V: EGF of E[(H_{<=V})^p O] on each candidate.
    std::unordered_map<Mask, XSeries> rmemo;
    std::vector<XSeries> rres(order.size());
    for (Mask V : order) check_dim(std::popcount(V));
    parallel_jobs(static_cast<int>(order.size()), threads, [&](int j) {
        const Mask V = order[static_cast<std::size_t>(j)];
        const auto sites = mask_sites(V);
        const long dim = ipow(d, static_cast<int>(sites.size()));
        XSeries r(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
        if (real_obs) {
            Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
            for (const auto& b : bonds)
                if ((b.mask & ~V) == 0) A += embed_operator(b.matrix, b.sites, sites, d).real();
            Eigen::MatrixXd O = Eigen::MatrixXd::Identity(dim, dim);
            for (const auto& t : obs) {
                std::vector<int> pos;
                for (int s : t.support) pos.push_back(position(s));
                O = O * embed_operator(t.matrix, pos, sites, d).real();
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::ComputeEigenvectors);
            const Eigen::MatrixXd OU = O * es.eigenvectors();
            const Eigen::VectorXd diag =
                (es.eigenvectors().cwiseProduct(OU)).colwise().sum().transpose();
            for (long i = 0; i < dim; ++i) {
                double pw = 1.0;
                for (int p = 0; p <= K; ++p) {
                    r[static_cast<std::size_t>(p)] += Complex(pw * diag(i), 0.0);
                    pw *= es.eigenvalues()(i);
                }
            }
        } else {
            Matrix A = Matrix::Zero(dim, dim);
            for (const auto& b : bonds)
                if ((b.mask & ~V) == 0) A += embed_operator(b.matrix, b.sites, sites, d);
            Matrix O = Matrix::Identity(dim, dim);
            for (const auto& t : obs) {
                std::vector<int> pos;
                for (int s : t.support) pos.push_back(position(s));
                O = O * embed_operator(t.matrix, pos, sites, d);
            }
            Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::ComputeEigenvectors);
            const Matrix OU = O * es.eigenvectors();
            const Eigen::VectorXcd diag =
                (es.eigenvectors().conjugate().cwiseProduct(OU)).colwise().sum().transpose();
            for (long i = 0; i < dim; ++i) {
                double pw = 1.0;
                for (int p = 0; p <= K; ++p) {
                    r[static_cast<std::size_t>(p)] += pw * diag(i);
                    pw *= es.eigenvalues()(i);
                }
            }
        }
        const double norm = static_cast<double>(dim);
        for (int p = 0; p <= K; ++p)
            r[static_cast<std::size_t>(p)] /= norm * fact[static_cast<std::size_t>(p)];
        rres[static_cast<std::size_t>(j)] = std::move(r);
    });
    for (std::size_t j = 0; j < order.size(); ++j) rmemo.emplace(order[j], std::move(rres[j]));

    // Anchored connected part G_V, then mu = sum_V G_V * zeta(complement).
    std::unordered_map<Mask, XSeries> gmemo;
    XSeries mu(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
    for (Mask V : order) {
        XSeries g = rmemo.at(V);
        for (Mask V1 : order) {
            if (V1 == V) break;  // proper subsets sort strictly earlier
            if ((V1 & ~V) != 0) continue;
            const auto git = gmemo.find(V1);
            if (git == gmemo.end() || all_zero(git->second)) continue;
            const Mask M = V & ~V1;
            RSeries ehat = power_sums(M);
            for (int p = 0; p <= K; ++p) ehat[static_cast<std::size_t>(p)] /= fact[static_cast<std::size_t>(p)];
            const XSeries prod = conv(git->second, ehat);
            for (std::size_t p = 0; p < g.size(); ++p) g[p] -= prod[p];
        }
        const RSeries& rest = zeta(full & ~V);
        const XSeries prod = conv(g, rest);
        for (std::size_t p = 0; p < mu.size(); ++p) mu[p] += prod[p];
        gmemo.emplace(V, std::move(g));
    }
    return mu;
}

MomentEngine::MomentEngine(const LocalHamiltonian& H, int K, MomentOptions opts)
    : impl_(std::make_unique<Impl>(H, K, opts)) {}
MomentEngine::~MomentEngine() = default;
MomentEngine::MomentEngine(MomentEngine&&) noexcept = default;
MomentEngine& MomentEngine::operator=(MomentEngine&&) noexcept = default;

int MomentEngine::order() const { return impl_->K; }

double MomentEngine::trace_moment(int k) {
    if (k < 0 || k > impl_->K) throw std::invalid_argument("trace_moment: order out of range");
    const RSeries& z = impl_->zeta(impl_->full);
    const double dn = std::pow(static_cast<double>(impl_->d), impl_->n);
    return dn * impl_->fact[static_cast<std::size_t>(k)] * z[static_cast<std::size_t>(k)];
}

PowerSeries MomentEngine::z_series() {
    const RSeries& z = impl_->zeta(impl_->full);
    const double dn = std::pow(static_cast<double>(impl_->d), impl_->n);
    PowerSeries out;
    out.var = "beta";
    out.coeffs.resize(z.size());
    for (std::size_t p = 0; p < z.size(); ++p) {
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        out.coeffs[p] = Complex(sign * dn * z[p], 0.0);
    }
    return out;
}

Complex MomentEngine::weighted_trace_moment(int k, const std::vector<LocalTerm>& obs) {
    if (k < 0 || k > impl_->K) throw std::invalid_argument("trace_moment: order out of range");
    const XSeries mu = impl_->weighted_mu(obs);
    const double dn = std::pow(static_cast<double>(impl_->d), impl_->n);
    return dn * impl_->fact[static_cast<std::size_t>(k)] * mu[static_cast<std::size_t>(k)];
}

PowerSeries MomentEngine::weighted_series(const std::vector<LocalTerm>& obs) {
    const XSeries mu = impl_->weighted_mu(obs);
    const double dn = std::pow(static_cast<double>(impl_->d), impl_->n);
    PowerSeries out;
    out.var = "beta";
    out.coeffs.resize(mu.size());
    for (std::size_t p = 0; p < mu.size(); ++p) {
        const double sign = (p % 2 == 0) ? 1.0 : -1.0;
        out.coeffs[p] = sign * dn * mu[p];
    }
    return out;
}

double trace_moment(const LocalHamiltonian& H, int k, const MomentOptions& opts) {
    MomentEngine eng(H, k, opts);
    return eng.trace_moment(k);
}

PowerSeries z_series(const LocalHamiltonian& H, int K, const MomentOptions& opts) {
    MomentEngine eng(H, K, opts);
    return eng.z_series();
}

Complex weighted_trace_moment(const LocalHamiltonian& H, int k,
                              const std::vector<LocalTerm>& obs, const MomentOptions& opts) {
    MomentEngine eng(H, k, opts);
    return eng.weighted_trace_moment(k, obs);
}

// ---------------------------------------------------------------------------
// Reference enumeration.

namespace {

struct EnumComponent {
    Mask mask = 0;
    std::vector<std::pair<int, int>> entries;  // (tuple position, term id)
};

struct EnumState {
    const LocalHamiltonian* H = nullptr;
    const std::vector<LocalTerm>* obs = nullptr;
    int n = 0;
    int d = 2;
    int k = 0;
    std::vector<Mask> term_masks;
    std::vector<std::vector<int>> term_pos;
    Mask wmask = 0;
    std::vector<std::vector<int>> obs_pos;
    std::map<std::vector<int>, Complex>* free_memo = nullptr;
    std::map<std::vector<int>, Complex>* anchored_memo = nullptr;
};

std::vector<int> mask_sites_local(Mask m) {
    std::vector<int> out;
    while (m) {
        out.push_back(std::countr_zero(m));
        m &= m - 1;
    }
    return out;
}

// Normalized trace of the ordered product of the listed terms (and the fixed
// observable tail when `anchored`), over the union of their supports.
Complex component_value(const EnumState& st, const std::vector<int>& ids, Mask mask,
                        bool anchored) {
    auto* memo = anchored ? st.anchored_memo : st.free_memo;
    const auto it = memo->find(ids);
    if (it != memo->end()) return it->second;
    if (anchored) mask |= st.wmask;
    const auto sites = mask_sites_local(mask);
    const long dim = ipow(st.d, static_cast<int>(sites.size()));
    Matrix prod = Matrix::Identity(dim, dim);
    for (int id : ids)
        prod = prod * embed_operator((*st.H).terms()[static_cast<std::size_t>(id)].matrix,
                                     st.term_pos[static_cast<std::size_t>(id)], sites, st.d);
    if (anchored)
        for (std::size_t r = 0; r < st.obs->size(); ++r)
            prod = prod * embed_operator((*st.obs)[r].matrix, st.obs_pos[r], sites, st.d);
    const Complex val = prod.trace() / static_cast<double>(dim);
    memo->emplace(ids, val);
    return val;
}

void enum_dfs(const EnumState& st, int depth, std::vector<EnumComponent>& comps, Complex& sum,
              Complex& comp_err) {
    if (depth == st.k) {
        Complex val(1.0, 0.0);
        if (st.obs) {
            std::vector<std::pair<int, int>> anchored_entries;
            Mask anchored_mask = 0;
            for (const auto& c : comps) {
                if ((c.mask & st.wmask) != 0) {
                    anchored_entries.insert(anchored_entries.end(), c.entries.begin(),
                                            c.entries.end());
                    anchored_mask |= c.mask;
                } else {
                    std::vector<int> ids;
                    for (const auto& e : c.entries) ids.push_back(e.second);
                    val *= component_value(st, ids, c.mask, false);
                }
            }
            std::sort(anchored_entries.begin(), anchored_entries.end());
            std::vector<int> ids;
            for (const auto& e : anchored_entries) ids.push_back(e.second);
            val *= component_value(st, ids, anchored_mask, true);
        } else {
            for (const auto& c : comps) {
                std::vector<int> ids;
                for (const auto& e : c.entries) ids.push_back(e.second);
                val *= component_value(st, ids, c.mask, false);
            }
        }
        const Complex y = val - comp_err;
        const Complex t = sum + y;
        comp_err = (t - sum) - y;
        sum = t;
        return;
    }
    const int m = static_cast<int>(st.H->terms().size());
    for (int t = 0; t < m; ++t) {
        const Mask tm = st.term_masks[static_cast<std::size_t>(t)];
        std::vector<EnumComponent> next;
        EnumComponent merged;
        merged.mask = tm;
        for (const auto& c : comps) {
            if ((c.mask & tm) != 0) {
                merged.mask |= c.mask;
                merged.entries.insert(merged.entries.end(), c.entries.begin(), c.entries.end());
            } else {
                next.push_back(c);
            }
        }
        merged.entries.emplace_back(depth, t);
        std::sort(merged.entries.begin(), merged.entries.end());
        next.push_back(std::move(merged));
        enum_dfs(st, depth + 1, next, sum, comp_err);
    }
}

Complex enumerated_impl(const LocalHamiltonian& H, int k, const std::vector<LocalTerm>* obs,
                        const MomentOptions& opts) {
    if (k < 0) throw std::invalid_argument("trace_moment: negative order");
    if (k > opts.k_max)
        throw CapError("moments: order " + std::to_string(k) + " exceeds k_max " +
                       std::to_string(opts.k_max));
    const int n = H.n();
    if (n > 62) throw CapError("moments: more than 62 sites is unsupported");
    const int m = static_cast<int>(H.terms().size());
    double leaves = 1.0;
    for (int i = 0; i < k; ++i) leaves *= static_cast<double>(m);
    if (leaves > static_cast<double>(opts.enum_budget))
        throw CapError("moments: enumeration budget exceeded");

    std::vector<int> labels;
    for (const auto& s : H.sites()) labels.push_back(s.index);
    auto position = [&](int label) {
        const auto it = std::lower_bound(labels.begin(), labels.end(), label);
        if (it == labels.end() || *it != label)
            throw std::invalid_argument("moments: site label outside the register");
        return static_cast<int>(it - labels.begin());
    };

    EnumState st;
    st.H = &H;
    st.obs = obs;
    st.n = n;
    st.d = H.d();
    st.k = k;
    for (const auto& t : H.terms()) {
        Mask mask = 0;
        std::vector<int> pos;
        for (int s : t.support) {
            pos.push_back(position(s));
            mask |= Mask(1) << position(s);
        }
        st.term_masks.push_back(mask);
        st.term_pos.push_back(std::move(pos));
    }
    if (obs)
        for (const auto& t : *obs) {
            std::vector<int> pos;
            for (int s : t.support) {
                pos.push_back(position(s));
                st.wmask |= Mask(1) << position(s);
            }
            st.obs_pos.push_back(std::move(pos));
        }

    const double dn = std::pow(static_cast<double>(st.d), n);
    if (k == 0) {
        if (!obs) return Complex(dn, 0.0);
        std::map<std::vector<int>, Complex> memo_a;
        std::map<std::vector<int>, Complex> memo_f;
        st.free_memo = &memo_f;
        st.anchored_memo = &memo_a;
        return dn * component_value(st, {}, 0, true);
    }

    const int threads = resolve_threads(opts.threads);
    std::vector<Complex> partial(static_cast<std::size_t>(m), Complex(0.0, 0.0));
    parallel_jobs(m, threads, [&](int t0) {
        std::map<std::vector<int>, Complex> memo_f;
        std::map<std::vector<int>, Complex> memo_a;
        EnumState local = st;
        local.free_memo = &memo_f;
        local.anchored_memo = &memo_a;
        Complex sum(0.0, 0.0);
        Complex err(0.0, 0.0);
        std::vector<EnumComponent> comps;
        EnumComponent first;
        first.mask = st.term_masks[static_cast<std::size_t>(t0)];
        first.entries.emplace_back(0, t0);
        comps.push_back(std::move(first));
        enum_dfs(local, 1, comps, sum, err);
        partial[static_cast<std::size_t>(t0)] = sum;
    });
    Complex sum(0.0, 0.0);
    Complex err(0.0, 0.0);
    for (const Complex& p : partial) {
        const Complex y = p - err;
        const Complex t = sum + y;
        err = (t - sum) - y;
        sum = t;
    }
    return dn * sum;
}

}  // namespace

Complex trace_moment_enumerated(const LocalHamiltonian& H, int k, const MomentOptions& opts) {
    return enumerated_impl(H, k, nullptr, opts);
}

Complex weighted_trace_moment_enumerated(const LocalHamiltonian& H, int k,
                                         const std::vector<LocalTerm>& obs,
                                         const MomentOptions& opts) {
    return enumerated_impl(H, k, &obs, opts);
}

}  // namespace partfn
