#include "partfn/xxz.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace partfn {

namespace {

using json = nlohmann::ordered_json;

/* Validated copy with u < v on every edge, edges sorted lexicographically. */
XXZInstance canonical(const XXZInstance& inst) {
    if (inst.n < 1) throw ParseError("xxz: n must be positive");
    if (inst.n > 62) throw ParseError("xxz: n above 62 is not supported");
    XXZInstance out = inst;
    for (XXZEdge& e : out.edges) {
        if (e.u < 0 || e.u >= out.n || e.v < 0 || e.v >= out.n)
            throw ParseError("xxz: edge endpoint out of range");
        if (e.u == e.v) throw ParseError("xxz: self loop");
        if (e.u > e.v) std::swap(e.u, e.v);
    }
    std::sort(out.edges.begin(), out.edges.end(), [](const XXZEdge& a, const XXZEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    for (std::size_t i = 0; i + 1 < out.edges.size(); ++i)
        if (out.edges[i].u == out.edges[i + 1].u && out.edges[i].v == out.edges[i + 1].v)
            throw ParseError("xxz: duplicate edge");
    return out;
}

long long sector_dimension(int n, int k) {
    const int kk = std::min(k, n - k);
    unsigned long long r = 1;
    for (int i = 1; i <= kk; ++i) {
        if (r > std::numeric_limits<unsigned long long>::max() / static_cast<unsigned>(n))
            return std::numeric_limits<long long>::max();
        r = r * static_cast<unsigned long long>(n - kk + i) / static_cast<unsigned>(i);
        if (r > (1ull << 62)) return std::numeric_limits<long long>::max();
    }
    return static_cast<long long>(r);
}

/* Parlett-Reinsch balancing; EigenSolver does not balance on its own, and the
   companion matrix of a polynomial with a large coefficient spread needs it. */
void balance(Eigen::MatrixXd& A) {
    const long n = A.rows();
    bool done = false;
    while (!done) {
        done = true;
        for (long i = 0; i < n; ++i) {
            double col = 0.0, row = 0.0;
            for (long j = 0; j < n; ++j) {
                if (j == i) continue;
                col += std::abs(A(j, i));
                row += std::abs(A(i, j));
            }
            if (col == 0.0 || row == 0.0) continue;
            const double before = col + row;
            double f = 1.0;
            while (col < row / 2.0) {
                col *= 2.0;
                row /= 2.0;
                f *= 2.0;
            }
            while (col >= row * 2.0) {
                col /= 2.0;
                row *= 2.0;
                f /= 2.0;
            }
            if (col + row < 0.95 * before) {
                done = false;
                A.col(i) *= f;
                A.row(i) /= f;
            }
        }
    }
}

int max_known_order(const SectorPolynomial& poly) {
    return poly.computed_up_to >= poly.n ? std::numeric_limits<int>::max()
                                         : poly.computed_up_to;
}

/* Log-series partial sum of the sector polynomial at a point inside the unit
   circle; coefficients above degree n are zero. */
Estimate evaluate_inside(const SectorPolynomial& poly, double z, int K) {
    if (K > max_known_order(poly))
        throw std::invalid_argument("xxz_estimate: order " + std::to_string(K) +
                                    " needs sectors beyond the computed range");
    std::vector<Complex> a(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
    for (int k = 0; k <= std::min(K, poly.n); ++k)
        a[static_cast<std::size_t>(k)] = poly.q[static_cast<std::size_t>(k)];
    PowerSeries logp = log_series(PowerSeries(std::move(a), "z"));

    Estimate est;
    est.value = series_eval(logp, Complex(z, 0.0));
    est.K = K;
    est.series = std::move(logp);
    return est;
}

}  // namespace

std::string XXZInstance::serialize() const {
    const XXZInstance c = canonical(*this);
    json out;
    out["model"] = "xxz";
    out["n"] = c.n;
    json edges = json::array(), js = json::array(), jzzs = json::array();
    for (const XXZEdge& e : c.edges) {
        edges.push_back(json::array({e.u, e.v}));
        js.push_back(e.j);
        jzzs.push_back(e.jzz);
    }
    out["edges"] = std::move(edges);
    out["J"] = std::move(js);
    out["Jzz"] = std::move(jzzs);
    return out.dump();
}

XXZInstance XXZInstance::parse(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("xxz: invalid JSON: ") + e.what());
    }
    try {
        if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
            throw ParseError("xxz: expected object with n, edges, J, Jzz");
        if (j.contains("model") && j["model"].get<std::string>() != "xxz")
            throw ParseError("xxz: model is not xxz");
        XXZInstance inst;
        inst.n = j["n"].get<int>();
        const json& es = j["edges"];
        if (!es.is_array()) throw ParseError("xxz: edges must be an array");
        auto coupling = [&](const char* key, std::size_t i) {
            const json& c = j.at(key);
            if (c.is_array()) {
                if (c.size() != es.size())
                    throw ParseError(std::string("xxz: ") + key + " length does not match edges");
                return c[i].get<double>();
            }
            return c.get<double>();  // scalar applies to every edge
        };
        for (std::size_t i = 0; i < es.size(); ++i) {
            if (!es[i].is_array() || es[i].size() != 2)
                throw ParseError("xxz: edge must be [u, v]");
            XXZEdge e;
            e.u = es[i][0].get<int>();
            e.v = es[i][1].get<int>();
            e.j = coupling("J", i);
            e.jzz = coupling("Jzz", i);
            inst.edges.push_back(e);
        }
        return canonical(inst);
    } catch (ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("xxz: ") + e.what());
    }
}

XXZInstance XXZInstance::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("xxz: cannot open file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string xxz_instance_hash(const XXZInstance& inst) {
    const std::string text = inst.serialize();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

double ferro_threshold(double jxx, double jyy, double jxy, double jyx) {
    return 0.5 * (std::hypot(jxx - jyy, jxy + jyx) + std::hypot(jxx + jyy, jxy - jyx));
}

FerroCheck check_ferromagnetic(const XXZInstance& inst) {
    const XXZInstance c = canonical(inst);
    FerroCheck out;
    out.ferromagnetic = true;
    for (const XXZEdge& e : c.edges) {
        const double margin = e.jzz - ferro_threshold(e.j, e.j, 0.0, 0.0);
        out.margins.push_back(margin);
        if (margin < 0.0) out.ferromagnetic = false;
    }
    return out;
}

Eigen::MatrixXd sector_block(const XXZInstance& inst, int k, long dim_cap) {
    const XXZInstance c = canonical(inst);
    const int n = c.n;
    if (k < 0 || k > n) throw std::invalid_argument("sector_block: sector out of range");
    const long long dim = sector_dimension(n, k);
    if (dim > dim_cap)
        throw CapError("sector_block: dimension " + std::to_string(dim) + " exceeds cap " +
                       std::to_string(dim_cap));

    // Basis words mark the down sites (bit i set: site i in |1>, Z = -1), so a
    // sector with k up spins holds the words with n - k bits set, ascending.
    const int down = n - k;
    std::vector<std::uint64_t> words;
    words.reserve(static_cast<std::size_t>(dim));
    if (down == 0) {
        words.push_back(0);
    } else {
        std::uint64_t w = (1ull << down) - 1;
        const std::uint64_t lim = 1ull << n;
        while (w < lim) {
            words.push_back(w);
            const std::uint64_t low = w & (~w + 1);
            const std::uint64_t carry = w + low;
            if (carry >= lim) break;
            w = (((carry ^ w) >> 2) / low) | carry;
        }
    }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<long>(words.size()),
                                              static_cast<long>(words.size()));
    for (std::size_t a = 0; a < words.size(); ++a) {
        const std::uint64_t w = words[a];
        double diag = 0.0;
        for (const XXZEdge& e : c.edges) {
            const bool bu = (w >> e.u) & 1, bv = (w >> e.v) & 1;
            diag += bu == bv ? e.jzz : -e.jzz;
            if (bu == bv) continue;
            const std::uint64_t w2 = w ^ ((1ull << e.u) | (1ull << e.v));
            const std::size_t b = static_cast<std::size_t>(
                std::lower_bound(words.begin(), words.end(), w2) - words.begin());
            if (b > a) {
                M(static_cast<long>(a), static_cast<long>(b)) += 2.0 * e.j;
                M(static_cast<long>(b), static_cast<long>(a)) += 2.0 * e.j;
            }
        }
        M(static_cast<long>(a), static_cast<long>(a)) = diag;
    }
    return M;
}

SectorPolynomial sector_coefficients(const XXZInstance& inst, double beta,
                                     std::optional<int> k_max, long dim_cap) {
    const XXZInstance c = canonical(inst);
    if (k_max && *k_max < 0)
        throw std::invalid_argument("sector_coefficients: negative k_max");

    SectorPolynomial out;
    out.n = c.n;
    out.beta = beta;
    out.q.assign(static_cast<std::size_t>(c.n) + 1,
                 std::numeric_limits<double>::quiet_NaN());

    const bool full = !k_max || *k_max >= c.n;
    const int top = full ? c.n / 2 : *k_max;
    for (int k = 0; k <= top; ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sector_block(c, k, dim_cap),
                                                          Eigen::EigenvaluesOnly);
        double sum = 0.0, comp = 0.0;
        for (long i = 0; i < es.eigenvalues().size(); ++i) {
            const double y = std::exp(beta * es.eigenvalues()[i]) - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        out.q[static_cast<std::size_t>(k)] = sum;
    }
    if (full) {
        // The global spin flip commutes with the interaction and swaps the
        // sectors k and n - k, so the polynomial is palindromic.
        for (int k = 0; k <= c.n / 2; ++k)
            out.q[static_cast<std::size_t>(c.n - k)] = out.q[static_cast<std::size_t>(k)];
        out.computed_up_to = c.n;
    } else {
        out.computed_up_to = top;
    }
    return out;
}

double xxz_log_partition(const SectorPolynomial& poly, double mu) {
    if (poly.computed_up_to < poly.n)
        throw std::invalid_argument("xxz_log_partition: needs every sector");
    double peak = -std::numeric_limits<double>::infinity();
    std::vector<double> expo(poly.q.size());
    for (std::size_t k = 0; k < poly.q.size(); ++k) {
        expo[k] = std::log(poly.q[k]) + poly.beta * mu * static_cast<double>(k);
        peak = std::max(peak, expo[k]);
    }
    double sum = 0.0;
    for (double t : expo) sum += std::exp(t - peak);
    return peak + std::log(sum);
}

LeeYangRoots lee_yang_roots(const SectorPolynomial& poly) {
    if (poly.computed_up_to < poly.n)
        throw std::invalid_argument("lee_yang_roots: needs every sector");
    const int n = poly.n;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i)
        C(i, n - 1) = -poly.q[static_cast<std::size_t>(i)] /
                      poly.q[static_cast<std::size_t>(n)];
    balance(C);
    Eigen::EigenSolver<Eigen::MatrixXd> es(C);

    LeeYangRoots out;
    for (long i = 0; i < n; ++i) out.roots.push_back(es.eigenvalues()[i]);
    std::sort(out.roots.begin(), out.roots.end(), [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    for (const Complex& r : out.roots)
        out.max_deviation = std::max(out.max_deviation, std::abs(std::abs(r) - 1.0));
    return out;
}

Estimate xxz_estimate_at_K(const SectorPolynomial& poly, double z, int K) {
    if (z <= 0.0) throw std::invalid_argument("xxz_estimate: fugacity must be positive");
    if (K < 0) throw std::invalid_argument("xxz_estimate: negative truncation order");
    if (std::abs(1.0 - z) <= 1e-12)
        throw NoCertificateError(
            "xxz_estimate: fugacity on the unit circle, where zeros may sit");

    // For z > 1 use log p(z) = n log z + log p(1/z): the polynomial is
    // palindromic, so its reversal is itself and 1/z is back inside the circle.
    const bool flipped = z > 1.0;
    const double inner = flipped ? 1.0 / z : z;
    Estimate est = evaluate_inside(poly, inner, K);
    est.beta = Complex(z, 0.0);
    est.b = 1.0 / inner;
    est.M = static_cast<double>(poly.n);
    est.certified_error = truncation_bound(BoundKind::polynomial, est.M, est.b, K);
    if (flipped) est.value += static_cast<double>(poly.n) * std::log(z);
    return est;
}

Estimate xxz_estimate(const SectorPolynomial& poly, double z, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("xxz_estimate: eps must be positive");
    if (z <= 0.0) throw std::invalid_argument("xxz_estimate: fugacity must be positive");
    if (std::abs(1.0 - z) <= 1e-12)
        throw NoCertificateError(
            "xxz_estimate: fugacity on the unit circle, where zeros may sit");
    const double b = z > 1.0 ? z : 1.0 / z;
    int K = 0;
    while (truncation_bound(BoundKind::polynomial, static_cast<double>(poly.n), b, K) > eps)
        if (++K > 512) throw CapError("xxz_estimate: truncation order above 512");
    return xxz_estimate_at_K(poly, z, K);
}

LocalHamiltonian to_local_hamiltonian(const XXZInstance& inst, double mu) {
    const XXZInstance c = canonical(inst);
    std::vector<Site> sites(static_cast<std::size_t>(c.n));
    for (int i = 0; i < c.n; ++i) sites[static_cast<std::size_t>(i)].index = i;

    std::vector<LocalTerm> terms;
    for (const XXZEdge& e : c.edges) {
        Matrix M = Matrix::Zero(4, 4);
        M(0, 0) = -e.jzz;
        M(1, 1) = e.jzz;
        M(2, 2) = e.jzz;
        M(3, 3) = -e.jzz;
        M(1, 2) = -2.0 * e.j;
        M(2, 1) = -2.0 * e.j;
        terms.push_back({{e.u, e.v}, M});
    }
    for (int i = 0; i < c.n; ++i) {
        Matrix F = Matrix::Zero(2, 2);
        F(0, 0) = -mu;
        terms.push_back({{i}, F});
    }
    return LocalHamiltonian(c.n, 2, std::move(sites), std::move(terms));
}

XXZInstance random_ferromagnetic_xxz(int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_ferromagnetic_xxz: n must be positive");
    std::mt19937_64 rng(seed);
    XXZInstance inst;
    inst.n = n;
    auto add = [&](int u, int v) {
        XXZEdge e;
        e.u = std::min(u, v);
        e.v = std::max(u, v);
        e.j = -1.0 + 2.0 * uniform01(rng());
        e.jzz = std::abs(e.j) + uniform01(rng());
        inst.edges.push_back(e);
    };
    for (int i = 1; i < n; ++i)
        add(std::min(i - 1, static_cast<int>(uniform01(rng()) * i)), i);
    auto have = [&](int u, int v) {
        for (const XXZEdge& e : inst.edges)
            if (e.u == u && e.v == v) return true;
        return false;
    };
    for (int t = 0; t < n / 3; ++t) {
        int a = std::min(n - 1, static_cast<int>(uniform01(rng()) * n));
        int b = std::min(n - 1, static_cast<int>(uniform01(rng()) * n));
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (have(a, b)) continue;
        add(a, b);
    }
    std::sort(inst.edges.begin(), inst.edges.end(), [](const XXZEdge& a, const XXZEdge& b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return inst;
}

}  // namespace partfn
