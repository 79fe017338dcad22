#include "partfn/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>

namespace partfn {

namespace {

long ipow(int base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

std::vector<int> support_positions(const std::vector<int>& labels,
                                   const std::vector<int>& support) {
    std::vector<int> pos;
    for (int s : support) {
        const auto it = std::lower_bound(labels.begin(), labels.end(), s);
        if (it == labels.end() || *it != s)
            throw std::invalid_argument("observable support outside the register");
        pos.push_back(static_cast<int>(it - labels.begin()));
    }
    return pos;
}

// y <- (op embedded at `pos`) y, digit p of the register has stride d^{n-1-p}.
template <typename Vec, typename Op>
void apply_local(Vec& y, const Op& op, const std::vector<int>& pos, int n, int d) {
    const int ns = static_cast<int>(pos.size());
    const long dim_s = ipow(d, ns);
    std::vector<long> stride(pos.size());
    for (int k = 0; k < ns; ++k)
        stride[static_cast<std::size_t>(k)] = ipow(d, n - 1 - pos[static_cast<std::size_t>(k)]);
    std::vector<int> comp;
    for (int p = 0; p < n; ++p)
        if (std::find(pos.begin(), pos.end(), p) == pos.end()) comp.push_back(p);
    const long dim_c = ipow(d, static_cast<int>(comp.size()));
    std::vector<long> comp_stride(comp.size());
    for (std::size_t k = 0; k < comp.size(); ++k)
        comp_stride[k] = ipow(d, n - 1 - comp[k]);
    std::vector<long> idx(static_cast<std::size_t>(dim_s));
    Vec block(dim_s);
    for (long cc = 0; cc < dim_c; ++cc) {
        long base = 0;
        long rem = cc;
        for (std::size_t k = 0; k < comp.size(); ++k) {
            const long unit = ipow(d, static_cast<int>(comp.size() - 1 - k));
            base += (rem / unit) * comp_stride[k];
            rem %= unit;
        }
        for (long a = 0; a < dim_s; ++a) {
            long off = 0;
            long ra = a;
            for (int k = 0; k < ns; ++k) {
                const long unit = ipow(d, ns - 1 - k);
                off += (ra / unit) * stride[static_cast<std::size_t>(k)];
                ra %= unit;
            }
            idx[static_cast<std::size_t>(a)] = base + off;
        }
        for (long a = 0; a < dim_s; ++a) block(a) = y(idx[static_cast<std::size_t>(a)]);
        block = op * block;
        for (long a = 0; a < dim_s; ++a) y(idx[static_cast<std::size_t>(a)]) = block(a);
    }
}

bool all_real(const std::vector<LocalTerm>& obs) {
    for (const auto& t : obs)
        if (t.matrix.imag().cwiseAbs().maxCoeff() > 1e-14) return false;
    return true;
}

// A += op embedded at register positions `pos`, without a dense temporary.
template <typename Mat>
void add_embedded(Mat& A, const Matrix& op, const std::vector<int>& pos, int n, int d) {
    const int ns = static_cast<int>(pos.size());
    const long dim_s = ipow(d, ns);
    std::vector<long> stride(pos.size());
    for (int k = 0; k < ns; ++k)
        stride[static_cast<std::size_t>(k)] = ipow(d, n - 1 - pos[static_cast<std::size_t>(k)]);
    std::vector<int> comp;
    for (int p = 0; p < n; ++p)
        if (std::find(pos.begin(), pos.end(), p) == pos.end()) comp.push_back(p);
    const long dim_c = ipow(d, static_cast<int>(comp.size()));
    std::vector<long> offset(static_cast<std::size_t>(dim_s));
    for (long a = 0; a < dim_s; ++a) {
        long off = 0;
        long ra = a;
        for (int k = 0; k < ns; ++k) {
            const long unit = ipow(d, ns - 1 - k);
            off += (ra / unit) * stride[static_cast<std::size_t>(k)];
            ra %= unit;
        }
        offset[static_cast<std::size_t>(a)] = off;
    }
    for (long cc = 0; cc < dim_c; ++cc) {
        long base = 0;
        long rem = cc;
        for (std::size_t k = 0; k < comp.size(); ++k) {
            const long unit = ipow(d, static_cast<int>(comp.size() - 1 - k));
            base += (rem / unit) * ipow(d, n - 1 - comp[k]);
            rem %= unit;
        }
        for (long a = 0; a < dim_s; ++a)
            for (long b = 0; b < dim_s; ++b) {
                const Complex v = op(a, b);
                if (v == Complex(0.0, 0.0)) continue;
                if constexpr (std::is_same_v<typename Mat::Scalar, double>)
                    A(base + offset[static_cast<std::size_t>(a)],
                      base + offset[static_cast<std::size_t>(b)]) += v.real();
                else
                    A(base + offset[static_cast<std::size_t>(a)],
                      base + offset[static_cast<std::size_t>(b)]) += v;
            }
    }
}

}  // namespace

SpectralDecomposition spectrum(const LocalHamiltonian& H, bool keep_basis, long dim_cap) {
    const long dim = ipow(H.d(), H.n());
    if (dim > dim_cap)
        throw std::invalid_argument("spectrum: dimension " + std::to_string(dim) +
                                    " exceeds cap " + std::to_string(dim_cap));
    SpectralDecomposition S;
    S.n = H.n();
    S.d = H.d();
    for (const auto& s : H.sites()) S.labels.push_back(s.index);
    const auto decompose = keep_basis ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    if (H.is_real()) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(dim, dim);
        for (const auto& t : H.terms())
            add_embedded(A, t.matrix, support_positions(S.labels, t.support), H.n(), H.d());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, decompose);
        if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
        S.energies = es.eigenvalues();
        if (keep_basis) S.basis_real = es.eigenvectors();
    } else {
        Matrix A = Matrix::Zero(dim, dim);
        for (const auto& t : H.terms())
            add_embedded(A, t.matrix, support_positions(S.labels, t.support), H.n(), H.d());
        Eigen::SelfAdjointEigenSolver<Matrix> es(A, decompose);
        if (es.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
        S.energies = es.eigenvalues();
        if (keep_basis) S.basis_complex = es.eigenvectors();
    }
    return S;
}

Complex partition_function(const SpectralDecomposition& S, Complex beta) {
    Complex sum(0.0, 0.0);
    Complex comp(0.0, 0.0);
    for (long k = 0; k < S.dim(); ++k) {
        const Complex term = std::exp(-beta * S.energies(k)) - comp;
        const Complex t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return sum;
}

double log_abs_partition(const SpectralDecomposition& S, Complex beta) {
    // Factor out the eigenvalue with the largest |e^{-beta E}|.
    double shift = S.energies(0);
    if (beta.real() < 0.0) shift = S.energies(S.dim() - 1);
    Complex sum(0.0, 0.0);
    for (long k = 0; k < S.dim(); ++k) sum += std::exp(-beta * (S.energies(k) - shift));
    if (sum == Complex(0.0, 0.0)) return -std::numeric_limits<double>::infinity();
    return -beta.real() * shift + std::log(std::abs(sum));
}

double log_partition_real(const SpectralDecomposition& S, double beta) {
    const double shift = beta >= 0.0 ? S.energies(0) : S.energies(S.dim() - 1);
    double sum = 0.0;
    for (long k = 0; k < S.dim(); ++k) sum += std::exp(-beta * (S.energies(k) - shift));
    return -beta * shift + std::log(sum);
}

double free_energy(const SpectralDecomposition& S, double beta) {
    if (beta <= 0.0) throw std::invalid_argument("free_energy: beta must be positive");
    return -log_partition_real(S, beta) / beta;
}

Complex gibbs_expectation(const SpectralDecomposition& S, double beta,
                          const std::vector<LocalTerm>& obs) {
    if (!S.has_basis())
        throw std::invalid_argument("gibbs_expectation: decomposition has no basis");
    const double e0 = beta >= 0.0 ? S.energies(0) : S.energies(S.dim() - 1);
    double weight_sum = 0.0;
    for (long k = 0; k < S.dim(); ++k) weight_sum += std::exp(-beta * (S.energies(k) - e0));

    std::vector<std::vector<int>> pos;
    for (const auto& t : obs) pos.push_back(support_positions(S.labels, t.support));

    if (S.real_basis() && all_real(obs)) {
        std::vector<Eigen::MatrixXd> ops;
        for (const auto& t : obs) ops.push_back(t.matrix.real());
        double acc = 0.0;
        Eigen::VectorXd v(S.dim());
        for (long k = 0; k < S.dim(); ++k) {
            v = S.basis_real.col(k);
            for (int r = static_cast<int>(obs.size()) - 1; r >= 0; --r)
                apply_local(v, ops[static_cast<std::size_t>(r)],
                            pos[static_cast<std::size_t>(r)], S.n, S.d);
            acc += std::exp(-beta * (S.energies(k) - e0)) * S.basis_real.col(k).dot(v);
        }
        return Complex(acc / weight_sum, 0.0);
    }

    Complex acc(0.0, 0.0);
    Eigen::VectorXcd v(S.dim());
    Eigen::VectorXcd u(S.dim());
    for (long k = 0; k < S.dim(); ++k) {
        if (S.real_basis())
            u = S.basis_real.col(k).cast<Complex>();
        else
            u = S.basis_complex.col(k);
        v = u;
        for (int r = static_cast<int>(obs.size()) - 1; r >= 0; --r)
            apply_local(v, obs[static_cast<std::size_t>(r)].matrix,
                        pos[static_cast<std::size_t>(r)], S.n, S.d);
        acc += std::exp(-beta * (S.energies(k) - e0)) * u.dot(v);
    }
    return acc / weight_sum;
}

Complex gibbs_covariance(const SpectralDecomposition& S, double beta, const LocalTerm& O1,
                         const LocalTerm& O2) {
    const Complex e12 = gibbs_expectation(S, beta, {O1, O2});
    const Complex e1 = gibbs_expectation(S, beta, {O1});
    const Complex e2 = gibbs_expectation(S, beta, {O2});
    return e12 - e1 * e2;
}

namespace {

Complex newton_ratio(const SpectralDecomposition& S, Complex beta) {
    // Z / Z' with the dominant factor cancelled; Z' = -sum E e^{-beta E}.
    const double shift = beta.real() >= 0.0 ? S.energies(0) : S.energies(S.dim() - 1);
    Complex num(0.0, 0.0);
    Complex den(0.0, 0.0);
    for (long k = 0; k < S.dim(); ++k) {
        const Complex w = std::exp(-beta * (S.energies(k) - shift));
        num += w;
        den += -S.energies(k) * w;
    }
    if (den == Complex(0.0, 0.0)) return Complex(0.0, 0.0);
    return num / den;
}

double normalized_abs_z(const SpectralDecomposition& S, Complex beta) {
    const double la = log_abs_partition(S, beta);
    const double dn = static_cast<double>(S.n) * std::log(static_cast<double>(S.d));
    return std::exp(la - dn);
}

}  // namespace

std::vector<FisherZero> fisher_zero_scan(const SpectralDecomposition& S, double re_lo,
                                         double re_hi, double im_lo, double im_hi, int grid_re,
                                         int grid_im, double tol,
                                         std::vector<std::array<double, 3>>* grid) {
    if (grid_re < 2 || grid_im < 2)
        throw std::invalid_argument("fisher_zero_scan: grid must be at least 2x2");
    if (re_hi < re_lo || im_hi < im_lo)
        throw std::invalid_argument("fisher_zero_scan: empty rectangle");
    std::vector<double> absz(static_cast<std::size_t>(grid_re) * static_cast<std::size_t>(grid_im));
    auto re_at = [&](int i) {
        return re_lo + (re_hi - re_lo) * static_cast<double>(i) / static_cast<double>(grid_re - 1);
    };
    auto im_at = [&](int j) {
        return im_lo + (im_hi - im_lo) * static_cast<double>(j) / static_cast<double>(grid_im - 1);
    };
    for (int i = 0; i < grid_re; ++i)
        for (int j = 0; j < grid_im; ++j) {
            const Complex beta(re_at(i), im_at(j));
            const double v = normalized_abs_z(S, beta);
            absz[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_im) +
                 static_cast<std::size_t>(j)] = v;
            if (grid) grid->push_back({beta.real(), beta.imag(), v});
        }

    auto at = [&](int i, int j) {
        return absz[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_im) +
                    static_cast<std::size_t>(j)];
    };
    std::vector<Complex> seeds;
    for (int i = 0; i < grid_re; ++i)
        for (int j = 0; j < grid_im; ++j) {
            bool is_min = true;
            for (int di = -1; di <= 1 && is_min; ++di)
                for (int dj = -1; dj <= 1 && is_min; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ni = i + di;
                    const int nj = j + dj;
                    if (ni < 0 || nj < 0 || ni >= grid_re || nj >= grid_im) continue;
                    if (at(ni, nj) < at(i, j)) is_min = false;
                }
            if (is_min) seeds.emplace_back(re_at(i), im_at(j));
        }

    const double span = std::max(re_hi - re_lo, im_hi - im_lo);
    std::vector<FisherZero> zeros;
    for (Complex beta : seeds) {
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
            const Complex step = newton_ratio(S, beta);
            beta -= step;
            if (std::abs(beta) > std::max(1.0, 20.0 * span) + std::abs(re_hi) + std::abs(im_hi))
                break;
            if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(beta))) {
                ok = true;
                break;
            }
        }
        if (!ok) continue;
        const double residual = normalized_abs_z(S, beta);
        if (residual > tol) continue;
        if (beta.real() < re_lo || beta.real() > re_hi || beta.imag() < im_lo ||
            beta.imag() > im_hi)
            continue;
        bool merged = false;
        for (auto& z : zeros)
            if (std::abs(z.location - beta) < 1e-8) {
                z.multiplicity_hint += 1;
                z.residual = std::min(z.residual, residual);
                merged = true;
                break;
            }
        if (!merged) zeros.push_back({beta, residual, 1});
    }
    std::sort(zeros.begin(), zeros.end(), [](const FisherZero& a, const FisherZero& b) {
        if (a.location.real() != b.location.real()) return a.location.real() < b.location.real();
        return a.location.imag() < b.location.imag();
    });
    return zeros;
}

}  // namespace partfn
