#include "partfn/hamiltonian.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace partfn {

namespace {

using json = nlohmann::ordered_json;

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

int site_position(const std::vector<Site>& sites, int label) {
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (sites[i].index == label) return static_cast<int>(i);
    throw std::invalid_argument("site label not present: " + std::to_string(label));
}

}  // namespace

double uniform01(std::uint64_t word) {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

LocalHamiltonian::LocalHamiltonian(int n, int d, std::vector<Site> sites,
                                   std::vector<LocalTerm> terms)
    : n_(n), d_(d), sites_(std::move(sites)), terms_(std::move(terms)) {
    if (n_ < 1) throw ParseError("instance: n must be positive");
    if (d_ < 2) throw ParseError("instance: d must be at least 2");
    if (sites_.empty()) {
        sites_.resize(n_);
        for (int i = 0; i < n_; ++i) sites_[i].index = i;
    }
    if (static_cast<int>(sites_.size()) != n_)
        throw ParseError("instance: site list length does not match n");
    std::sort(sites_.begin(), sites_.end(),
              [](const Site& a, const Site& b) { return a.index < b.index; });
    for (std::size_t i = 1; i < sites_.size(); ++i)
        if (sites_[i].index == sites_[i - 1].index)
            throw ParseError("instance: duplicate site index");
    std::size_t arity = sites_[0].coords ? sites_[0].coords->size() : 0;
    for (const auto& s : sites_) {
        std::size_t a = s.coords ? s.coords->size() : 0;
        if (a != arity) throw ParseError("instance: inconsistent coordinate arity");
    }
    for (const auto& t : terms_) {
        if (t.support.empty()) throw ParseError("instance: empty term support");
        for (std::size_t i = 1; i < t.support.size(); ++i)
            if (t.support[i] <= t.support[i - 1])
                throw ParseError("instance: term support must be strictly ascending");
        for (int s : t.support) site_position(sites_, s);
        const long dim = ipow(d_, static_cast<int>(t.support.size()));
        if (t.matrix.rows() != dim || t.matrix.cols() != dim)
            throw ParseError("instance: term matrix dimension mismatch");
        const double scale = t.matrix.norm();
        if ((t.matrix - t.matrix.adjoint()).norm() > 1e-12 * std::max(1.0, scale))
            throw ParseError("instance: term matrix is not Hermitian");
    }
}

bool LocalHamiltonian::has_coords() const {
    return !sites_.empty() && sites_[0].coords.has_value();
}

bool LocalHamiltonian::is_real() const {
    for (const auto& t : terms_)
        if (t.matrix.imag().cwiseAbs().maxCoeff() > 1e-14) return false;
    return true;
}

std::string LocalHamiltonian::serialize() const {
    json out;
    out["d"] = d_;
    out["n"] = n_;
    bool canonical = true;
    for (int i = 0; i < n_; ++i)
        if (sites_[static_cast<std::size_t>(i)].index != i) canonical = false;
    if (!canonical) {
        json labels = json::array();
        for (const auto& s : sites_) labels.push_back(s.index);
        out["sites"] = labels;
    }
    if (has_coords()) {
        json coords = json::array();
        for (const auto& s : sites_) coords.push_back(*s.coords);
        out["coords"] = coords;
    }
    json terms = json::array();
    for (const auto& t : terms_) {
        json jt;
        jt["support"] = t.support;
        json rows = json::array();
        for (Eigen::Index r = 0; r < t.matrix.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < t.matrix.cols(); ++c) {
                const Complex v = t.matrix(r, c);
                row.push_back(json::array({v.real(), v.imag()}));
            }
            rows.push_back(row);
        }
        jt["matrix"] = rows;
        terms.push_back(jt);
    }
    out["terms"] = terms;
    return out.dump();
}

LocalHamiltonian LocalHamiltonian::parse(const std::string& text) {
    json in;
    try {
        in = json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("instance: invalid JSON: ") + e.what());
    }
    try {
        if (!in.is_object() || !in.contains("n") || !in.contains("d") || !in.contains("terms"))
            throw ParseError("instance: expected object with n, d, terms");
        const int n = in.at("n").get<int>();
        const int d = in.at("d").get<int>();
        std::vector<Site> sites(static_cast<std::size_t>(std::max(n, 0)));
        for (int i = 0; i < n; ++i) sites[static_cast<std::size_t>(i)].index = i;
        if (in.contains("sites")) {
            const auto& labels = in.at("sites");
            if (static_cast<int>(labels.size()) != n)
                throw ParseError("instance: sites length does not match n");
            for (int i = 0; i < n; ++i)
                sites[static_cast<std::size_t>(i)].index = labels.at(i).get<int>();
        }
        if (in.contains("coords")) {
            const auto& coords = in.at("coords");
            if (static_cast<int>(coords.size()) != n)
                throw ParseError("instance: coords length does not match n");
            for (int i = 0; i < n; ++i)
                sites[static_cast<std::size_t>(i)].coords =
                    coords.at(i).get<std::vector<int>>();
        }
        std::vector<LocalTerm> terms;
        for (const auto& jt : in.at("terms")) {
            LocalTerm t;
            t.support = jt.at("support").get<std::vector<int>>();
            const bool has_pauli = jt.contains("pauli") && !jt.at("pauli").is_null();
            const bool has_matrix = jt.contains("matrix") && !jt.at("matrix").is_null();
            if (has_pauli == has_matrix)
                throw ParseError("instance: term needs exactly one of pauli, matrix");
            if (has_pauli) {
                if (d != 2) throw ParseError("instance: pauli terms require d = 2");
                const auto s = jt.at("pauli").get<std::string>();
                if (s.size() != t.support.size())
                    throw ParseError("instance: pauli string length does not match support");
                double coeff = 1.0;
                if (jt.contains("coeff") && !jt.at("coeff").is_null())
                    coeff = jt.at("coeff").get<double>();
                t.matrix = coeff * pauli_string_matrix(s);
            } else {
                const auto& rows = jt.at("matrix");
                const long dim = static_cast<long>(rows.size());
                t.matrix = Matrix::Zero(dim, dim);
                for (long r = 0; r < dim; ++r) {
                    const auto& row = rows.at(static_cast<std::size_t>(r));
                    if (static_cast<long>(row.size()) != dim)
                        throw ParseError("instance: term matrix is not square");
                    for (long c = 0; c < dim; ++c) {
                        const auto& e = row.at(static_cast<std::size_t>(c));
                        if (e.is_number()) {
                            t.matrix(r, c) = Complex(e.get<double>(), 0.0);
                        } else if (e.is_array() && e.size() == 2) {
                            t.matrix(r, c) =
                                Complex(e.at(0).get<double>(), e.at(1).get<double>());
                        } else {
                            throw ParseError("instance: matrix entry must be [re, im]");
                        }
                    }
                }
            }
            terms.push_back(std::move(t));
        }
        return LocalHamiltonian(n, d, std::move(sites), std::move(terms));
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception& e) {
        throw ParseError(std::string("instance: ") + e.what());
    }
}

LocalHamiltonian LocalHamiltonian::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("instance: cannot open file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

double spectral_norm(const Matrix& M) {
    if (M.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

GeometryParams geometry_params(const LocalHamiltonian& H) {
    GeometryParams gp;
    gp.m = static_cast<int>(H.terms().size());
    std::vector<double> per_site(H.sites().size(), 0.0);
    double diam = 0.0;
    for (const auto& t : H.terms()) {
        gp.kappa = std::max(gp.kappa, static_cast<int>(t.support.size()));
        const double norm = spectral_norm(t.matrix);
        gp.h = std::max(gp.h, norm);
        for (int s : t.support)
            per_site[static_cast<std::size_t>(site_position(H.sites(), s))] += norm;
        if (H.has_coords()) {
            for (std::size_t i = 0; i < t.support.size(); ++i)
                for (std::size_t j = i + 1; j < t.support.size(); ++j) {
                    const auto& a =
                        *H.sites()[static_cast<std::size_t>(site_position(H.sites(), t.support[i]))]
                             .coords;
                    const auto& b =
                        *H.sites()[static_cast<std::size_t>(site_position(H.sites(), t.support[j]))]
                             .coords;
                    double dist = 0.0;
                    for (std::size_t k = 0; k < a.size(); ++k)
                        dist = std::max(dist, std::abs(static_cast<double>(a[k] - b[k])));
                    diam = std::max(diam, dist);
                }
        }
    }
    if (H.has_coords()) gp.R = diam;
    const double peak = per_site.empty() ? 0.0 : *std::max_element(per_site.begin(), per_site.end());
    gp.g = gp.h > 0.0 ? peak / gp.h : 0.0;
    return gp;
}

LocalHamiltonian restricted(const LocalHamiltonian& H, const std::vector<int>& region,
                            bool reindex) {
    std::vector<int> keep = region;
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    std::vector<Site> sites;
    for (int label : keep) {
        const auto& s =
            H.sites()[static_cast<std::size_t>(site_position(H.sites(), label))];
        sites.push_back(s);
    }
    std::vector<LocalTerm> terms;
    for (const auto& t : H.terms()) {
        const bool inside = std::all_of(t.support.begin(), t.support.end(), [&](int s) {
            return std::binary_search(keep.begin(), keep.end(), s);
        });
        if (inside) terms.push_back(t);
    }
    if (reindex) {
        for (std::size_t i = 0; i < sites.size(); ++i) sites[i].index = static_cast<int>(i);
        for (auto& t : terms)
            for (auto& s : t.support) {
                const auto it = std::lower_bound(keep.begin(), keep.end(), s);
                s = static_cast<int>(it - keep.begin());
            }
    }
    return LocalHamiltonian(static_cast<int>(keep.size()), H.d(), std::move(sites),
                            std::move(terms));
}

Matrix pauli_string_matrix(const std::string& s) {
    static const Complex I1(0.0, 1.0);
    Matrix out = Matrix::Identity(1, 1);
    for (char c : s) {
        Matrix p(2, 2);
        switch (c) {
            case 'I': p << 1, 0, 0, 1; break;
            case 'X': p << 0, 1, 1, 0; break;
            case 'Y': p << 0, -I1, I1, 0; break;
            case 'Z': p << 1, 0, 0, -1; break;
            default: throw ParseError(std::string("instance: unknown Pauli '") + c + "'");
        }
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index r = 0; r < out.rows(); ++r)
            for (Eigen::Index col = 0; col < out.cols(); ++col)
                next.block(2 * r, 2 * col, 2, 2) = out(r, col) * p;
        out = std::move(next);
    }
    return out;
}

Matrix embed_operator(const Matrix& op, const std::vector<int>& support,
                      const std::vector<int>& target, int d) {
    const int nt = static_cast<int>(target.size());
    const int ns = static_cast<int>(support.size());
    std::vector<int> pos(support.size());
    for (int i = 0; i < ns; ++i) {
        const auto it = std::find(target.begin(), target.end(), support[static_cast<std::size_t>(i)]);
        if (it == target.end())
            throw std::invalid_argument("embed_operator: support not inside target");
        pos[static_cast<std::size_t>(i)] = static_cast<int>(it - target.begin());
    }
    std::vector<long> stride(static_cast<std::size_t>(nt));
    for (int p = 0; p < nt; ++p) stride[static_cast<std::size_t>(p)] = ipow(d, nt - 1 - p);
    std::vector<int> comp;
    for (int p = 0; p < nt; ++p)
        if (std::find(pos.begin(), pos.end(), p) == pos.end()) comp.push_back(p);
    const long dim_s = ipow(d, ns);
    const long dim_c = ipow(d, static_cast<int>(comp.size()));
    const long dim_t = ipow(d, nt);
    Matrix out = Matrix::Zero(dim_t, dim_t);
    for (long cc = 0; cc < dim_c; ++cc) {
        long base = 0;
        long rem = cc;
        for (std::size_t k = 0; k < comp.size(); ++k) {
            const long digit = rem / ipow(d, static_cast<int>(comp.size() - 1 - k)) % d;
            base += digit * stride[static_cast<std::size_t>(comp[k])];
            rem %= ipow(d, static_cast<int>(comp.size() - 1 - k));
        }
        for (long a = 0; a < dim_s; ++a) {
            long row = base;
            long ra = a;
            for (int k = 0; k < ns; ++k) {
                const long digit = ra / ipow(d, ns - 1 - k) % d;
                row += digit * stride[static_cast<std::size_t>(pos[static_cast<std::size_t>(k)])];
                ra %= ipow(d, ns - 1 - k);
            }
            for (long b = 0; b < dim_s; ++b) {
                if (op(a, b) == Complex(0.0, 0.0)) continue;
                long col = base;
                long rb = b;
                for (int k = 0; k < ns; ++k) {
                    const long digit = rb / ipow(d, ns - 1 - k) % d;
                    col += digit * stride[static_cast<std::size_t>(pos[static_cast<std::size_t>(k)])];
                    rb %= ipow(d, ns - 1 - k);
                }
                out(row, col) = op(a, b);
            }
        }
    }
    return out;
}

Matrix dense_hamiltonian(const LocalHamiltonian& H, long dim_cap) {
    const long dim = ipow(H.d(), H.n());
    if (dim > dim_cap)
        throw std::invalid_argument("dense_hamiltonian: dimension " + std::to_string(dim) +
                                    " exceeds cap " + std::to_string(dim_cap));
    std::vector<int> target;
    for (const auto& s : H.sites()) target.push_back(s.index);
    Matrix out = Matrix::Zero(dim, dim);
    for (const auto& t : H.terms()) out += embed_operator(t.matrix, t.support, target, H.d());
    return out;
}

LocalHamiltonian random_instance(const std::string& kind, int n, double lo, double hi,
                                 std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("random_instance: n must be positive");
    if (hi < lo) throw std::invalid_argument("random_instance: empty coupling range");
    std::mt19937_64 rng(seed);
    auto draw = [&]() { return lo + (hi - lo) * uniform01(rng()); };

    std::vector<std::pair<int, int>> edges;
    std::vector<Site> sites(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) sites[static_cast<std::size_t>(i)].index = i;
    if (kind == "chain") {
        for (int i = 0; i < n; ++i) sites[static_cast<std::size_t>(i)].coords = {i};
        for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    } else if (kind == "grid2d") {
        int rows = 1;
        for (int r = static_cast<int>(std::sqrt(static_cast<double>(n))); r >= 1; --r)
            if (n % r == 0) {
                rows = r;
                break;
            }
        const int cols = n / rows;
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c)
                sites[static_cast<std::size_t>(r * cols + c)].coords = {r, c};
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                if (c + 1 < cols) edges.emplace_back(r * cols + c, r * cols + c + 1);
                if (r + 1 < rows) edges.emplace_back(r * cols + c, (r + 1) * cols + c);
            }
    } else if (kind == "graph") {
        const double p = std::min(1.0, 3.0 / static_cast<double>(n));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (uniform01(rng()) < p) edges.emplace_back(i, j);
    } else {
        throw std::invalid_argument("random_instance: unknown kind '" + kind + "'");
    }

    std::vector<LocalTerm> terms;
    Matrix zz(4, 4);
    zz.setZero();
    zz(0, 0) = 1;
    zz(1, 1) = -1;
    zz(2, 2) = -1;
    zz(3, 3) = 1;
    for (const auto& [i, j] : edges) {
        LocalTerm t;
        t.support = {i, j};
        t.matrix = draw() * zz;
        terms.push_back(std::move(t));
    }
    for (int i = 0; i < n; ++i) {
        LocalTerm t;
        t.support = {i};
        Matrix x(2, 2);
        x << 0, 1, 1, 0;
        t.matrix = draw() * x;
        terms.push_back(std::move(t));
    }
    return LocalHamiltonian(n, 2, std::move(sites), std::move(terms));
}

int connection_distance(const LocalHamiltonian& H, const std::vector<int>& A,
                        const std::vector<int>& B) {
    const auto& terms = H.terms();
    const int m = static_cast<int>(terms.size());
    auto intersects = [](const std::vector<int>& sup, const std::vector<int>& set) {
        for (int s : sup)
            if (std::find(set.begin(), set.end(), s) != set.end()) return true;
        return false;
    };
    auto overlap = [](const std::vector<int>& a, const std::vector<int>& b) {
        for (int s : a)
            if (std::binary_search(b.begin(), b.end(), s)) return true;
        return false;
    };
    std::vector<int> dist(static_cast<std::size_t>(m), kUnreachable);
    std::vector<int> frontier;
    for (int t = 0; t < m; ++t)
        if (intersects(terms[static_cast<std::size_t>(t)].support, A)) {
            dist[static_cast<std::size_t>(t)] = 1;
            frontier.push_back(t);
        }
    while (!frontier.empty()) {
        std::vector<int> next;
        for (int t : frontier)
            for (int u = 0; u < m; ++u)
                if (dist[static_cast<std::size_t>(u)] == kUnreachable &&
                    overlap(terms[static_cast<std::size_t>(t)].support,
                            terms[static_cast<std::size_t>(u)].support)) {
                    dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(t)] + 1;
                    next.push_back(u);
                }
        frontier = std::move(next);
    }
    int best = kUnreachable;
    for (int t = 0; t < m; ++t)
        if (intersects(terms[static_cast<std::size_t>(t)].support, B))
            best = std::min(best, dist[static_cast<std::size_t>(t)]);
    return best;
}

std::string instance_hash(const LocalHamiltonian& H) {
    const std::string text = H.serialize();
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buf);
}

}  // namespace partfn
