// Acceptance gate: one PASS/FAIL line per criterion, exit code = number of
// failed criteria. Tolerances are fixed; do not loosen them here.

#include "partfn/cluster.hpp"
#include "partfn/correlations.hpp"
#include "partfn/extrapolation.hpp"
#include "partfn/moments.hpp"
#include "partfn/oracle.hpp"
#include "partfn/series.hpp"
#include "partfn/xxz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace partfn;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
    std::fflush(stdout);
    if (!ok) g_failures += 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

LocalHamiltonian uniform_chain(int n, bool fields) {
    std::vector<Site> sites(n);
    for (int i = 0; i < n; ++i) {
        sites[i].index = i;
        sites[i].coords = std::vector<int>{i};
    }
    std::vector<LocalTerm> terms;
    for (int i = 0; i + 1 < n; ++i) {
        LocalTerm t;
        t.support = {i, i + 1};
        t.matrix = pauli_string_matrix("ZZ");
        terms.push_back(std::move(t));
    }
    if (fields)
        for (int i = 0; i < n; ++i) {
            LocalTerm t;
            t.support = {i};
            t.matrix = pauli_string_matrix("X");
            terms.push_back(std::move(t));
        }
    return LocalHamiltonian(n, 2, std::move(sites), std::move(terms));
}

LocalHamiltonian square_zz() {
    std::vector<Site> sites(4);
    for (int i = 0; i < 4; ++i) {
        sites[i].index = i;
        sites[i].coords = std::vector<int>{i / 2, i % 2};
    }
    std::vector<LocalTerm> terms;
    for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {1, 3}, {2, 3}}) {
        LocalTerm t;
        t.support = {a, b};
        t.matrix = pauli_string_matrix("ZZ");
        terms.push_back(std::move(t));
    }
    return LocalHamiltonian(4, 2, std::move(sites), std::move(terms));
}

LocalTerm z_on(int site) {
    LocalTerm t;
    t.support = {site};
    t.matrix = pauli_string_matrix("Z");
    return t;
}

// the 20 extrapolation instances: alternating chains and 2x4 grids, n = 8
std::vector<LocalHamiltonian> extrapolation_instances() {
    std::vector<LocalHamiltonian> out;
    for (int i = 0; i < 20; ++i) {
        const char* kind = (i % 2 == 0) ? "chain" : "grid2d";
        out.push_back(random_instance(kind, 8, -1.0, 1.0, 9000 + i));
    }
    return out;
}

struct ExtrRun {
    Estimate est;
    double exact = 0.0;
    double seconds = 0.0;
};

void criteria_1_2(const std::vector<LocalHamiltonian>& instances) {
    const double eps = 1e-5;
    std::vector<ExtrRun> runs;
    bool ok1 = true;
    double worst_err = 0.0, worst_time = 0.0;
    int worst_K = 0;
    for (const auto& H : instances) {
        const double b0 = beta0(geometry_params(H));
        const auto t0 = std::chrono::steady_clock::now();
        ExtrRun run;
        run.est = estimate_log_partition(H, Complex(0.5 * b0, 0.0), eps);
        run.seconds = seconds_since(t0);
        auto S = spectrum(H, false);
        run.exact = log_partition_real(S, 0.5 * b0);
        const double err = std::abs(run.est.value.real() - run.exact) +
                           std::abs(run.est.value.imag());
        worst_err = std::max(worst_err, err);
        worst_time = std::max(worst_time, run.seconds);
        worst_K = std::max(worst_K, run.est.K);
        if (err > eps || run.est.K > 30 || run.seconds >= 120.0) ok1 = false;
        runs.push_back(std::move(run));
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max |estimate - oracle| = %.3g (<= 1e-5), max K = %d (<= 30), "
                  "max run = %.2fs (< 120s)",
                  worst_err, worst_K, worst_time);
    report(1, ok1, buf);

    bool ok2 = true;
    int violations = 0;
    double worst_margin = 0.0;  // largest observed/bound ratio
    for (const auto& run : runs) {
        for (int K = 2; K <= run.est.K; ++K) {
            Complex partial(0.0, 0.0);
            Complex bp(1.0, 0.0);
            for (int k = 0; k <= K; ++k) {
                partial += run.est.series.coeffs[k] * bp;
                bp *= run.est.beta;
            }
            const double observed = std::abs(partial - Complex(run.exact, 0.0));
            const double bound =
                truncation_bound(BoundKind::bounded, run.est.M, run.est.b, K);
            worst_margin = std::max(worst_margin, observed / bound);
            if (observed > bound) {
                ok2 = false;
                violations += 1;
            }
        }
    }
    std::snprintf(buf, sizeof(buf),
                  "partial-sum error under the bound at every order 2..K, "
                  "violations = %d, worst observed/bound = %.3g",
                  violations, worst_margin);
    report(2, ok2, buf);
}

void criterion_3(const std::vector<LocalHamiltonian>& instances,
                 std::vector<SpectralDecomposition>& spectra_out,
                 std::vector<double>& beta0_out) {
    bool ok = true;
    double min_abs_z = 1e300, worst_slack = -1e300;
    for (const auto& H : instances) {
        const auto gp = geometry_params(H);
        const double b0 = beta0(gp);
        auto S = spectrum(H, false);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) {
                const Complex beta(-b0 + 2.0 * b0 * i / 63.0, -b0 + 2.0 * b0 * j / 63.0);
                if (std::abs(beta) > b0) continue;
                const double la = log_abs_partition(S, beta);
                const double absz = std::exp(la);
                min_abs_z = std::min(min_abs_z, absz);
                const double bound = log_abs_z_bound(gp, std::abs(beta), H.n(), H.d());
                worst_slack = std::max(worst_slack, std::abs(la) - bound);
                if (!(absz > 0.0) || std::abs(la) > bound + 1e-9) ok = false;
            }
        spectra_out.push_back(std::move(S));
        beta0_out.push_back(b0);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "min |Z| = %.3g (> 0), max |log|Z|| - bound = %.3g (<= 1e-9) "
                  "over 20 instances, 64x64 grid",
                  min_abs_z, worst_slack);
    report(3, ok, buf);
}

void criterion_4() {
    std::mt19937_64 rng(777);
    bool ok = true;
    double worst_slack = -1e300;
    int checks = 0;
    for (std::uint64_t seed : {60, 61, 62, 63}) {
        const char* kind = (seed % 2 == 0) ? "chain" : "graph";
        const int n = 5 + static_cast<int>(seed % 4);
        auto H = random_instance(kind, n, -1.0, 1.0, seed);
        const auto gp = geometry_params(H);
        auto S = spectrum(H, false);
        for (double beta : {0.1, 0.5, 1.0}) {
            for (int size : {1, 2}) {
                std::vector<int> region;
                region.push_back(static_cast<int>(uniform01(rng()) * n));
                if (size == 2) {
                    int second = region[0];
                    while (second == region[0]) second = static_cast<int>(uniform01(rng()) * n);
                    region.push_back(second);
                }
                std::vector<int> rest;
                for (int s = 0; s < n; ++s)
                    if (std::find(region.begin(), region.end(), s) == region.end())
                        rest.push_back(s);
                auto Sr = spectrum(restricted(H, rest), false);
                const double lhs = std::abs(log_partition_real(S, beta) -
                                            size * std::log(2.0) -
                                            log_partition_real(Sr, beta));
                const double bound = gp.g * gp.h * beta * size;
                worst_slack = std::max(worst_slack, lhs - bound);
                checks += 1;
                if (lhs > bound + 1e-9) ok = false;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "site-removal log ratio under g h beta |X| in %d checks, "
                  "max lhs - bound = %.3g (<= 1e-9)",
                  checks, worst_slack);
    report(4, ok, buf);
}

void criterion_5() {
    auto H = square_zz();
    const auto gp = geometry_params(H);
    const double beta = 0.5 / (gp.g * gp.h * (std::exp(1.0) - 1.0));
    double residuals[3] = {0.0, 0.0, 0.0};
    int idx = 0;
    for (int p_max : {4, 8, 12})
        residuals[idx++] = expansion_residual(H, 0, Complex(beta, 0.0), 6, p_max).residual;
    const bool ok = residuals[2] <= 1e-6 && residuals[0] > residuals[1] &&
                    residuals[1] > residuals[2];
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "expansion residual %.3g -> %.3g -> %.3g over p_max 4 -> 8 -> 12 "
                  "(final <= 1e-6, strictly decreasing)",
                  residuals[0], residuals[1], residuals[2]);
    report(5, ok, buf);
}

void criterion_6() {
    bool ok = true;
    int violations = 0;
    struct Case {
        LocalHamiltonian H;
        double g;
    };
    std::vector<Case> cases;
    cases.push_back({uniform_chain(6, true), 3.0});
    cases.push_back({square_zz(), 2.0});
    for (const auto& c : cases) {
        for (const auto& site : c.H.sites()) {
            std::vector<int> counts(6, 0);
            for (const auto& s : enumerate_connected_sets(c.H, site.index, 5))
                counts[s.size()] += 1;
            for (int k = 1; k <= 5; ++k)
                if (counts[k] > std::pow(c.g, k)) {
                    ok = false;
                    violations += 1;
                }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "connected-set counts within g^k for k <= 5 on the chain (g=3) and "
                  "the square (g=2), violations = %d",
                  violations);
    report(6, ok, buf);
}

void criterion_7() {
    bool ok = true;
    double worst_rel = 0.0;
    for (std::uint64_t seed : {70, 71, 72}) {
        const char* kinds[3] = {"chain", "grid2d", "graph"};
        auto H = random_instance(kinds[seed % 3], 4 + static_cast<int>(seed % 5), -1.0, 1.0,
                                 seed);
        auto S = spectrum(H, false);
        MomentEngine eng(H, 6);
        for (int k = 0; k <= 6; ++k) {
            double ref = 0.0;
            for (long i = 0; i < S.dim(); ++i) ref += std::pow(S.energies[i], k);
            const double rel = std::abs(eng.trace_moment(k) - ref) / std::max(1.0, std::abs(ref));
            worst_rel = std::max(worst_rel, rel);
            if (rel > 1e-9) ok = false;
        }
    }
    auto big = random_instance("chain", 32, -1.0, 1.0, 4242);
    MomentOptions opts;
    opts.threads = 8;
    const auto t0 = std::chrono::steady_clock::now();
    MomentEngine eng(big, 8, opts);
    const double m8 = eng.trace_moment(8);
    const double elapsed = seconds_since(t0);
    if (!(elapsed < 60.0) || !std::isfinite(m8)) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max relative moment error = %.3g (<= 1e-9); n=32 chain k=8 on 8 "
                  "threads in %.2fs (< 60s)",
                  worst_rel, elapsed);
    report(7, ok, buf);
}

std::vector<XXZInstance> xxz_instances() {
    std::vector<XXZInstance> out;
    for (int i = 0; i < 20; ++i) out.push_back(random_ferromagnetic_xxz(4 + i % 7, 500 + i));
    return out;
}

void criterion_8(const std::vector<XXZInstance>& instances) {
    bool ok = true;
    double worst_rel = 0.0;
    for (const auto& inst : instances) {
        for (double beta : {0.5, 1.0}) {
            auto poly = sector_coefficients(inst, beta);
            for (double mu : {-1.0, 0.3, 2.0}) {
                auto S = spectrum(to_local_hamiltonian(inst, mu), false);
                const double exact = log_partition_real(S, beta);
                const double rel = std::abs(std::expm1(xxz_log_partition(poly, mu) - exact));
                worst_rel = std::max(worst_rel, rel);
                if (rel > 1e-10) ok = false;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "sector sum vs dense partition function: max relative deviation = "
                  "%.3g (<= 1e-10) over 20 instances x {0.5, 1} x {-1, 0.3, 2}",
                  worst_rel);
    report(8, ok, buf);
}

void criterion_9(const std::vector<XXZInstance>& instances) {
    bool ok = true;
    double worst_dev = 0.0;
    for (const auto& inst : instances) {
        auto roots = lee_yang_roots(sector_coefficients(inst, 0.5));
        worst_dev = std::max(worst_dev, roots.max_deviation);
        if (roots.max_deviation > 1e-8) ok = false;
    }
    XXZInstance pair;
    pair.n = 2;
    pair.edges = {XXZEdge{0, 1, 1.0, 1.0}};
    auto poly = sector_coefficients(pair, 1.0);
    const double e1 = std::exp(1.0);
    const double closed_err = std::max({std::abs(poly.q[0] - e1),
                                        std::abs(poly.q[1] - (e1 + std::exp(-3.0))),
                                        std::abs(poly.q[2] - e1)});
    if (closed_err > 1e-12) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max ||z| - 1| = %.3g (<= 1e-8) over 20 instances; n=2 closed form "
                  "off by %.3g (<= 1e-12)",
                  worst_dev, closed_err);
    report(9, ok, buf);
}

void criterion_10() {
    auto inst = random_ferromagnetic_xxz(8, 424242);
    auto poly = sector_coefficients(inst, 1.0);
    double exact = 0.0;
    {
        double acc = 0.0, zp = 1.0;
        for (double q : poly.q) {
            acc += q * zp;
            zp *= 0.5;
        }
        exact = std::log(acc);
    }
    bool ok = true;
    double worst_margin = 0.0;
    for (int K = 2; K <= 25; ++K) {
        auto est = xxz_estimate_at_K(poly, 0.5, K);
        const double observed = std::abs(est.value.real() - exact);
        const double bound = 8.0 / ((K + 1) * std::pow(2.0, K));
        worst_margin = std::max(worst_margin, observed / bound);
        if (observed > bound) ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "truncated log p(1/2) under n/((K+1) 2^K) for K = 2..25, worst "
                  "observed/bound = %.3g",
                  worst_margin);
    report(10, ok, buf);
}

void criterion_11() {
    struct Pick {
        int n;
        std::uint64_t seed;
        int s1, s2, L;
    };
    const std::vector<Pick> picks = {
        {4, 101, 0, 2, 2}, {4, 102, 0, 3, 3}, {5, 103, 0, 2, 2}, {5, 104, 1, 4, 3},
        {5, 105, 2, 4, 2}, {6, 106, 0, 3, 3}, {6, 107, 1, 3, 2}, {6, 108, 3, 5, 2},
        {6, 109, 2, 5, 3}, {4, 110, 1, 3, 2},
    };
    bool ok = true;
    int nonzero_at_L = 0;
    double worst_low = 0.0, worst_zero_beta = 0.0;
    for (const auto& p : picks) {
        auto H = random_instance("chain", p.n, -1.0, 1.0, p.seed);
        auto cs = covariance_series(H, z_on(p.s1), z_on(p.s2), p.L + 3);
        if (cs.L_predicted != p.L) ok = false;
        for (int k = 0; k < p.L; ++k) {
            const double mag = std::abs(cs.series.coeffs[k]);
            worst_low = std::max(worst_low, mag);
            if (mag > 1e-10) ok = false;
        }
        if (std::abs(cs.series.coeffs[p.L]) > 1e-10) nonzero_at_L += 1;
        worst_zero_beta = std::max(worst_zero_beta, std::abs(cs.series.coeffs[0]));
        if (std::abs(cs.series.coeffs[0]) > 1e-14) ok = false;
    }
    if (nonzero_at_L < 8) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "coefficients below L bounded by %.3g (<= 1e-10), beta=0 covariance "
                  "%.3g (<= 1e-14), order-L coefficient nonzero in %d/10 (>= 8)",
                  worst_low, worst_zero_beta, nonzero_at_L);
    report(11, ok, buf);
}

void criterion_12() {
    auto H = uniform_chain(12, true);
    std::vector<int> probes{1, 2, 3, 4, 5, 6, 7, 8};
    auto prof = decay_profile(H, 0.2, 0, probes);
    bool ok = prof.fitted && prof.r_squared >= 0.95;
    for (std::size_t i = 1; i < prof.covariances.size(); ++i)
        if (!(prof.covariances[i] < prof.covariances[i - 1])) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "12-site chain at beta = 0.2: |cov| strictly decreasing over "
                  "distances 1..8, fit R^2 = %.4f (>= 0.95), xi = %.3f",
                  prof.r_squared, prof.xi);
    report(12, ok, buf);
}

void criterion_13(const std::vector<LocalHamiltonian>& instances,
                  const std::vector<SpectralDecomposition>& spectra,
                  const std::vector<double>& beta0s) {
    std::vector<Site> sites(1);
    std::vector<LocalTerm> terms(1);
    terms[0].support = {0};
    terms[0].matrix = pauli_string_matrix("Z");
    LocalHamiltonian qubit(1, 2, std::move(sites), std::move(terms));
    auto S = spectrum(qubit, false);
    auto zeros = fisher_zero_scan(S, -0.5, 0.5, 0.0, 2.0, 21, 41);
    const double half_pi = 1.5707963267948966;
    bool ok = zeros.size() == 1 &&
              std::abs(zeros[0].location - Complex(0.0, half_pi)) <= 1e-9;
    const double qubit_err =
        zeros.empty() ? 1e300 : std::abs(zeros[0].location - Complex(0.0, half_pi));

    int spurious = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const double s = 0.99 * beta0s[i] / std::sqrt(2.0);
        const auto inside = fisher_zero_scan(spectra[i], -s, s, -s, s, 17, 17);
        spurious += static_cast<int>(inside.size());
    }
    if (spurious != 0) ok = false;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "free-qubit zero at i pi/2 off by %.3g (<= 1e-9); scans inside the "
                  "certified disk found %d zeros (= 0) across 20 instances",
                  qubit_err, spurious);
    report(13, ok, buf);
}

}  // namespace

int main() {
    const auto instances = extrapolation_instances();
    criteria_1_2(instances);
    std::vector<SpectralDecomposition> spectra;
    std::vector<double> beta0s;
    criterion_3(instances, spectra, beta0s);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    const auto ferro = xxz_instances();
    criterion_8(ferro);
    criterion_9(ferro);
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13(instances, spectra, beta0s);
    if (g_failures == 0) std::printf("all 13 criteria passed\n");
    else std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
