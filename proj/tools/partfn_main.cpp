#include "partfn/cluster.hpp"
#include "partfn/correlations.hpp"
#include "partfn/extrapolation.hpp"
#include "partfn/hamiltonian.hpp"
#include "partfn/moments.hpp"
#include "partfn/oracle.hpp"
#include "partfn/series.hpp"
#include "partfn/xxz.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace partfn;

/* Record numerics as decimal strings so the JSON survives any reader. */
std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

json cnum(Complex z) { return json::array({num(z.real()), num(z.imag())}); }

double parse_double(const std::string& s, const char* what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = std::string::npos;
    }
    if (pos != s.size()) throw std::invalid_argument(std::string(what) + ": expected a number");
    return v;
}

Complex parse_complex(const std::string& s, const char* what) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) return Complex(parse_double(s, what), 0.0);
    return Complex(parse_double(s.substr(0, comma), what),
                   parse_double(s.substr(comma + 1), what));
}

struct Record {
    std::string subcommand;
    std::string hash;  // bare hex; empty when no instance is involved
    json parameters = json::object();
    json outputs = json::object();
};

void emit(const Record& rec, std::chrono::steady_clock::time_point t0) {
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json out;
    out["subcommand"] = rec.subcommand;
    if (!rec.hash.empty()) out["instance_hash"] = "fnv1a64:" + rec.hash;
    out["parameters"] = rec.parameters;
    out["outputs"] = rec.outputs;
    out["wall_time_s"] = num(dt);
    out["version"] = "0.1.0";
    std::cout << out.dump(2) << "\n";
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("csv: cannot open " + path);
    return out;
}

/* Partial sums of the truncated series at x against the per-order bound. */
void partials_csv(const std::string& path, const PowerSeries& s, Complex x, double M,
                  double b) {
    std::ofstream out = open_csv(path);
    out << "K,estimate_re,estimate_im,bound\n";
    Complex sum(0.0, 0.0), pw(1.0, 0.0);
    for (int k = 0; k <= s.order(); ++k) {
        sum += s.coeffs[static_cast<std::size_t>(k)] * pw;
        pw *= x;
        out << k << "," << num(sum.real()) << "," << num(sum.imag()) << ","
            << num(truncation_bound(BoundKind::bounded, M, b, k)) << "\n";
    }
}

Matrix z_observable(int d) {
    Matrix zop = Matrix::Zero(d, d);
    zop(0, 0) = 1.0;
    zop(1, 1) = -1.0;
    return zop;
}

struct EstimateOpts {
    std::string file, beta = "0", region = "disk", csv;
    double eps = 1e-6;
    double b = 0.0, big_m = 0.0, delta = -1.0;
    bool has_b = false, has_m = false;
    int k_max = 64, threads = 0;
};

Record run_estimate(const EstimateOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);
    const Complex beta = parse_complex(o.beta, "--beta");
    MomentOptions mo;
    mo.k_max = o.k_max;
    mo.threads = o.threads;

    Record rec;
    rec.subcommand = "estimate";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;
    rec.parameters["beta"] = cnum(beta);
    rec.parameters["eps"] = num(o.eps);
    rec.parameters["region"] = o.region;
    if (o.has_b) rec.parameters["b"] = num(o.b);
    if (o.has_m) rec.parameters["M"] = num(o.big_m);
    rec.parameters["k_max"] = o.k_max;
    rec.parameters["threads"] = o.threads;

    const GeometryParams gp = geometry_params(H);
    rec.outputs["beta0"] = num(beta0(gp));

    if (o.has_b != o.has_m)
        throw std::invalid_argument("estimate: --b and --M come as a pair");

    if (o.region == "disk") {
        std::optional<ZeroFreeDisk> disk;
        if (o.has_b) disk = ZeroFreeDisk{o.b, o.big_m};
        const Estimate est = estimate_log_partition(H, beta, o.eps, disk, mo);
        rec.outputs["value"] = cnum(est.value);
        rec.outputs["K"] = est.K;
        rec.outputs["b"] = num(est.b);
        rec.outputs["M"] = num(est.M);
        rec.outputs["certified_error"] = num(est.certified_error);
        if (!o.csv.empty()) partials_csv(o.csv, est.series, est.beta, est.M, est.b);
        return rec;
    }
    if (o.region != "rect")
        throw std::invalid_argument("estimate: region must be disk or rect");

    if (beta.imag() != 0.0 || beta.real() <= 0.0)
        throw std::invalid_argument("estimate: the rect region expects a positive real beta");
    if (!o.has_b)
        throw NoCertificateError(
            "estimate: the rect region needs an explicit certificate (--b and --M)");

    RegionSpec region;
    region.kind = RegionSpec::Kind::rect;
    region.beta = beta.real();
    region.delta = o.delta < 0.0 ? 0.3 * beta.real() : o.delta;
    rec.parameters["delta"] = num(region.delta);

    const PolyMap map = map_disk_to_region(region);
    if (!map.verified)
        throw NoCertificateError("estimate: the region map failed its containment check");

    // The composed truncation bound assumes log Z analytic and below M on the
    // image of the radius-b disk. The user asserts that for the region, so the
    // radius-b circle must itself map into the region.
    double worst_b = 0.0;
    for (int i = 0; i < map.samples; ++i) {
        const double theta = 2.0 * M_PI * static_cast<double>(i) / map.samples;
        const Complex z(o.b * std::cos(theta), o.b * std::sin(theta));
        Complex p(0.0, 0.0);
        for (auto it = map.coeffs.rbegin(); it != map.coeffs.rend(); ++it) p = p * z + *it;
        const double re = std::clamp(p.real(), 0.0, region.beta);
        worst_b = std::max(worst_b, std::hypot(p.real() - re, p.imag()));
    }
    if (worst_b > region.delta)
        throw NoCertificateError("estimate: the radius-b circle maps " + num(worst_b) +
                                 " from the segment, outside the region; shrink b");

    const int K = choose_K(o.big_m, o.b, o.eps, std::min(o.k_max, 512));
    const PowerSeries logz = log_series(z_series(H, K, mo));
    const PowerSeries composed = series_compose(logz, PowerSeries(map.coeffs, "z"));
    rec.outputs["value"] = cnum(series_eval(composed, Complex(1.0, 0.0)));
    rec.outputs["K"] = K;
    rec.outputs["b"] = num(o.b);
    rec.outputs["M"] = num(o.big_m);
    rec.outputs["certified_error"] = num(truncation_bound(BoundKind::bounded, o.big_m, o.b, K));
    rec.outputs["map"] = {{"degree", static_cast<int>(map.coeffs.size()) - 1},
                          {"target_beta", num(map.target_beta)},
                          {"max_distance", num(map.max_distance)},
                          {"b_image_max_distance", num(worst_b)},
                          {"verified", map.verified},
                          {"samples", map.samples}};
    if (!o.csv.empty()) partials_csv(o.csv, composed, Complex(1.0, 0.0), o.big_m, o.b);
    return rec;
}

struct OracleOpts {
    std::string file, beta = "0";
    long dim_cap = 4096;
};

Record run_oracle(const OracleOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);
    const Complex beta = parse_complex(o.beta, "--beta");

    Record rec;
    rec.subcommand = "oracle";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;
    rec.parameters["beta"] = cnum(beta);
    rec.parameters["dim_cap"] = static_cast<long long>(o.dim_cap);

    const SpectralDecomposition S = spectrum(H, false, o.dim_cap);
    rec.outputs["z"] = cnum(partition_function(S, beta));
    rec.outputs["log_abs_z"] = num(log_abs_partition(S, beta));
    if (beta.imag() == 0.0) {
        rec.outputs["log_z"] = num(log_partition_real(S, beta.real()));
        if (beta.real() > 0.0)
            rec.outputs["free_energy"] = num(free_energy(S, beta.real()));
    }
    return rec;
}

struct ZerosOpts {
    std::string file, csv;
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0, tol = 1e-10;
    int grid_re = 64, grid_im = 64;
    long dim_cap = 4096;
};

Record run_zeros(const ZerosOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);

    Record rec;
    rec.subcommand = "zeros";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;
    rec.parameters["re_lo"] = num(o.re_lo);
    rec.parameters["re_hi"] = num(o.re_hi);
    rec.parameters["im_lo"] = num(o.im_lo);
    rec.parameters["im_hi"] = num(o.im_hi);
    rec.parameters["grid_re"] = o.grid_re;
    rec.parameters["grid_im"] = o.grid_im;
    rec.parameters["tol"] = num(o.tol);

    const SpectralDecomposition S = spectrum(H, false, o.dim_cap);
    std::vector<std::array<double, 3>> grid;
    const auto zeros = fisher_zero_scan(S, o.re_lo, o.re_hi, o.im_lo, o.im_hi, o.grid_re,
                                        o.grid_im, o.tol, o.csv.empty() ? nullptr : &grid);

    rec.outputs["beta0"] = num(beta0(geometry_params(H)));
    rec.outputs["count"] = static_cast<int>(zeros.size());
    json list = json::array();
    for (const FisherZero& z : zeros)
        list.push_back({{"beta", cnum(z.location)},
                        {"residual", num(z.residual)},
                        {"multiplicity_hint", z.multiplicity_hint}});
    rec.outputs["zeros"] = std::move(list);

    if (!o.csv.empty()) {
        std::ofstream out = open_csv(o.csv);
        out << "re,im,abs_z\n";
        for (const auto& row : grid)
            out << num(row[0]) << "," << num(row[1]) << "," << num(row[2]) << "\n";
    }
    return rec;
}

struct ClusterOpts {
    std::string file, beta = "0";
    int x0 = 0, max_size = 4, p_max = 10, threads = 0;
    bool ratios = false;
};

Record run_cluster(const ClusterOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);
    const Complex beta = parse_complex(o.beta, "--beta");
    MomentOptions mo;
    mo.threads = o.threads;

    Record rec;
    rec.subcommand = "cluster";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;
    rec.parameters["beta"] = cnum(beta);

    if (o.ratios) {
        rec.parameters["mode"] = "ratios";
        const RatioReport rep = ratio_bound_check(H, beta);
        rec.outputs["beta0"] = num(rep.beta0);
        rec.outputs["within_domain"] = rep.within_domain;
        rec.outputs["all_ok"] = rep.all_ok;
        json checks = json::array();
        for (const RatioCheck& c : rep.checks)
            checks.push_back({{"site", c.site},
                              {"log_ratio_abs", num(c.log_ratio_abs)},
                              {"bound", num(c.bound)},
                              {"ok", c.ok}});
        rec.outputs["checks"] = std::move(checks);
        return rec;
    }

    rec.parameters["mode"] = "expansion";
    rec.parameters["x0"] = o.x0;
    rec.parameters["max_size"] = o.max_size;
    rec.parameters["p_max"] = o.p_max;
    const ExpansionReport rep = expansion_residual(H, o.x0, beta, o.max_size, o.p_max, mo);
    rec.outputs["beta0"] = num(rep.beta0);
    rec.outputs["expansion_radius"] = num(rep.radius);
    rec.outputs["z_full"] = cnum(rep.z_full);
    rec.outputs["z_reduced"] = cnum(rep.z_reduced);
    rec.outputs["reconstruction"] = cnum(rep.reconstruction);
    rec.outputs["residual"] = num(rep.residual);
    rec.outputs["tail"] = num(rep.tail);
    rec.outputs["counts"] = rep.counts;
    return rec;
}

struct CorrOpts {
    std::string file, csv;
    bool profile = false;
    int site1 = 0, site2 = 0, order = 8, anchor = 0, threads = 0;
    bool has_site1 = false, has_site2 = false;
    double beta = 0.0;
    std::vector<int> probes;
};

Record run_corr(const CorrOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);

    Record rec;
    rec.subcommand = "corr";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;

    const Matrix zop = z_observable(H.d());
    if (o.profile) {
        rec.parameters["mode"] = "profile";
        rec.parameters["beta"] = num(o.beta);
        rec.parameters["anchor"] = o.anchor;
        rec.parameters["probes"] = o.probes;
        if (o.probes.empty()) throw std::invalid_argument("corr: --probes is empty");

        const DecayProfile prof = decay_profile(H, o.beta, o.anchor, o.probes);
        json dists = json::array(), covs = json::array();
        for (std::size_t i = 0; i < prof.distances.size(); ++i) {
            dists.push_back(prof.distances[i] == kUnreachable ? json(nullptr)
                                                              : json(prof.distances[i]));
            covs.push_back(num(prof.covariances[i]));
        }
        rec.outputs["distances"] = std::move(dists);
        rec.outputs["covariances"] = std::move(covs);
        rec.outputs["fitted"] = prof.fitted;
        if (prof.fitted) {
            rec.outputs["xi"] = num(prof.xi);
            rec.outputs["c"] = num(prof.c);
            rec.outputs["r_squared"] = num(prof.r_squared);
        }
        if (!o.csv.empty()) {
            std::ofstream out = open_csv(o.csv);
            out << "distance,covariance\n";
            for (std::size_t i = 0; i < prof.distances.size(); ++i) {
                if (prof.distances[i] == kUnreachable) continue;
                out << prof.distances[i] << "," << num(prof.covariances[i]) << "\n";
            }
        }
        return rec;
    }

    if (!o.has_site1 || !o.has_site2)
        throw std::invalid_argument("corr: series mode needs --site1 and --site2");
    rec.parameters["mode"] = "series";
    rec.parameters["site1"] = o.site1;
    rec.parameters["site2"] = o.site2;
    rec.parameters["K"] = o.order;
    rec.parameters["threads"] = o.threads;

    MomentOptions mo;
    mo.k_max = std::max(o.order, 1);
    mo.threads = o.threads;
    const LocalTerm o1{{o.site1}, zop}, o2{{o.site2}, zop};
    const CovarianceSeries cov = covariance_series(H, o1, o2, o.order, mo);

    json coeffs = json::array();
    for (const Complex& c : cov.series.coeffs) coeffs.push_back(cnum(c));
    rec.outputs["coefficients"] = std::move(coeffs);
    rec.outputs["L_predicted"] =
        cov.L_predicted == kUnreachable ? json(nullptr) : json(cov.L_predicted);
    rec.outputs["vanishing_order"] =
        cov.vanishing_order == kUnreachable ? json(nullptr) : json(cov.vanishing_order);

    if (!o.csv.empty()) {
        std::ofstream out = open_csv(o.csv);
        out << "k,re,im\n";
        for (std::size_t k = 0; k < cov.series.coeffs.size(); ++k)
            out << k << "," << num(cov.series.coeffs[k].real()) << ","
                << num(cov.series.coeffs[k].imag()) << "\n";
    }
    return rec;
}

struct XXZOpts {
    std::string file, csv;
    int random_n = 0, sector_k_max = -1, order = -1;
    std::uint64_t seed = 1;
    double beta = 1.0, eps = 1e-6;
    double mu = 0.0, z = 0.0;
    bool has_mu = false, has_z = false, check_circle = false;
    long dim_cap = 1 << 14;
};

Record run_xxz(const XXZOpts& o) {
    if (o.file.empty() == (o.random_n == 0))
        throw std::invalid_argument("xxz: give an instance file or --random, not both");
    const XXZInstance inst =
        o.file.empty() ? random_ferromagnetic_xxz(o.random_n, o.seed)
                       : XXZInstance::parse_file(o.file);

    Record rec;
    rec.subcommand = "xxz";
    rec.hash = xxz_instance_hash(inst);
    if (!o.file.empty()) rec.parameters["file"] = o.file;
    if (o.random_n > 0) {
        rec.parameters["random_n"] = o.random_n;
        rec.parameters["seed"] = o.seed;
    }
    rec.parameters["beta"] = num(o.beta);
    if (o.sector_k_max >= 0) rec.parameters["k_max"] = o.sector_k_max;

    const FerroCheck fc = check_ferromagnetic(inst);
    rec.outputs["n"] = inst.n;
    rec.outputs["edges"] = static_cast<int>(inst.edges.size());
    rec.outputs["ferromagnetic"] = fc.ferromagnetic;
    if (!fc.margins.empty()) {
        double worst = fc.margins.front();
        for (double m : fc.margins) worst = std::min(worst, m);
        rec.outputs["min_margin"] = num(worst);
    }

    const std::optional<int> k_max =
        o.sector_k_max >= 0 ? std::optional<int>(o.sector_k_max) : std::nullopt;
    const SectorPolynomial poly = sector_coefficients(inst, o.beta, k_max, o.dim_cap);
    rec.outputs["computed_up_to"] = poly.computed_up_to;
    json qs = json::array();
    for (int k = 0; k <= poly.computed_up_to; ++k)
        qs.push_back(num(poly.q[static_cast<std::size_t>(k)]));
    rec.outputs[poly.computed_up_to == poly.n ? "q" : "q_partial"] = std::move(qs);

    if (o.has_mu) {
        rec.parameters["mu"] = num(o.mu);
        rec.outputs["log_z"] = num(xxz_log_partition(poly, o.mu));
    }
    if (o.check_circle) {
        const LeeYangRoots roots = lee_yang_roots(poly);
        json list = json::array();
        for (const Complex& r : roots.roots) list.push_back(cnum(r));
        rec.outputs["roots"] = std::move(list);
        rec.outputs["max_deviation"] = num(roots.max_deviation);
    }
    if (o.has_z) {
        rec.parameters["z"] = num(o.z);
        const Estimate est = o.order >= 0 ? xxz_estimate_at_K(poly, o.z, o.order)
                                          : xxz_estimate(poly, o.z, o.eps);
        if (o.order >= 0)
            rec.parameters["K"] = o.order;
        else
            rec.parameters["eps"] = num(o.eps);
        rec.outputs["estimate"] = {{"value", cnum(est.value)},
                                   {"K", est.K},
                                   {"b", num(est.b)},
                                   {"certified_error", num(est.certified_error)}};
    }

    if (!o.csv.empty()) {
        std::ofstream out = open_csv(o.csv);
        out << "k,q\n";
        for (int k = 0; k <= poly.computed_up_to; ++k)
            out << k << "," << num(poly.q[static_cast<std::size_t>(k)]) << "\n";
    }
    return rec;
}

struct BoundOpts {
    std::string file;
    double abs_beta = -1.0;
};

Record run_bound(const BoundOpts& o) {
    const LocalHamiltonian H = LocalHamiltonian::parse_file(o.file);
    const GeometryParams gp = geometry_params(H);
    const double b0 = beta0(gp);
    const double at = o.abs_beta >= 0.0 ? o.abs_beta : b0;

    Record rec;
    rec.subcommand = "bound";
    rec.hash = instance_hash(H);
    rec.parameters["file"] = o.file;
    rec.parameters["abs_beta"] = num(at);
    rec.outputs["n"] = H.n();
    rec.outputs["d"] = H.d();
    rec.outputs["terms"] = gp.m;
    rec.outputs["kappa"] = gp.kappa;
    rec.outputs["R"] = num(gp.R);
    rec.outputs["g"] = num(gp.g);
    rec.outputs["h"] = num(gp.h);
    rec.outputs["beta0"] = num(b0);
    rec.outputs["expansion_radius"] = num(expansion_radius(gp));
    rec.outputs["log_abs_z_bound"] = num(log_abs_z_bound(gp, at, H.n(), H.d()));
    return rec;
}

struct GenOpts {
    std::string kind, out;
    int n = 0;
    std::uint64_t seed = 1;
    double lo = -1.0, hi = 1.0;
};

void run_gen(const GenOpts& o) {
    std::string text;
    if (o.kind == "xxz")
        text = random_ferromagnetic_xxz(o.n, o.seed).serialize();
    else
        text = random_instance(o.kind, o.n, o.lo, o.hi, o.seed).serialize();
    if (o.out.empty()) {
        std::cout << text << "\n";
        return;
    }
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("gen: cannot open " + o.out);
    f << text << "\n";
}

int fail(int code, const char* type, const std::string& message) {
    json err;
    err["error"] = type;
    err["message"] = message;
    std::cerr << err.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    const auto t0 = std::chrono::steady_clock::now();

    CLI::App app{"certified partition function estimates for local Hamiltonians"};
    app.require_subcommand(1);

    EstimateOpts eo;
    CLI::App* est = app.add_subcommand("estimate", "Taylor estimate of log Z with a certificate");
    est->add_option("instance", eo.file, "instance JSON file")->required();
    est->add_option("--beta", eo.beta, "target beta, re or re,im")->required();
    est->add_option("--eps", eo.eps, "target truncation error");
    est->add_option("--region", eo.region, "certificate region: disk or rect");
    CLI::Option* ob = est->add_option("--b", eo.b, "explicit zero-free radius (target at 1)");
    CLI::Option* om = est->add_option("--M", eo.big_m, "explicit bound on |log Z| in the disk");
    est->add_option("--delta", eo.delta, "rect half-width, default 0.3 beta");
    est->add_option("--k-max", eo.k_max, "order cap");
    est->add_option("--threads", eo.threads, "worker threads (PARTFN_THREADS overrides)");
    est->add_option("--csv", eo.csv, "write per-order partial sums here");

    OracleOpts oo;
    CLI::App* orc = app.add_subcommand("oracle", "exact dense-diagonalization reference");
    orc->add_option("instance", oo.file, "instance JSON file")->required();
    orc->add_option("--beta", oo.beta, "evaluation beta, re or re,im")->required();
    orc->add_option("--dim-cap", oo.dim_cap, "largest admissible dense dimension");

    ZerosOpts zo;
    CLI::App* zrs = app.add_subcommand("zeros", "Fisher zero scan over a beta rectangle");
    zrs->add_option("instance", zo.file, "instance JSON file")->required();
    zrs->add_option("--re-lo", zo.re_lo)->required();
    zrs->add_option("--re-hi", zo.re_hi)->required();
    zrs->add_option("--im-lo", zo.im_lo)->required();
    zrs->add_option("--im-hi", zo.im_hi)->required();
    zrs->add_option("--grid-re", zo.grid_re, "grid nodes along re");
    zrs->add_option("--grid-im", zo.grid_im, "grid nodes along im");
    zrs->add_option("--tol", zo.tol, "residual acceptance threshold");
    zrs->add_option("--dim-cap", zo.dim_cap, "largest admissible dense dimension");
    zrs->add_option("--csv", zo.csv, "write the |Z| grid here");

    ClusterOpts co;
    CLI::App* clu = app.add_subcommand("cluster", "site-removal expansion diagnostics");
    clu->add_option("instance", co.file, "instance JSON file")->required();
    clu->add_option("--beta", co.beta, "evaluation beta, re or re,im")->required();
    clu->add_option("--x0", co.x0, "root site of the expansion");
    clu->add_option("--max-size", co.max_size, "largest connected family");
    clu->add_option("--p-max", co.p_max, "Taylor order per cluster weight");
    clu->add_flag("--ratios", co.ratios, "check the site-removal ratio bound instead");
    clu->add_option("--threads", co.threads, "worker threads (PARTFN_THREADS overrides)");

    CorrOpts ro;
    CLI::App* cor = app.add_subcommand("corr", "covariance series and decay profiles");
    cor->add_option("instance", ro.file, "instance JSON file")->required();
    CLI::Option* s1 = cor->add_option("--site1", ro.site1, "first Z observable site");
    CLI::Option* s2 = cor->add_option("--site2", ro.site2, "second Z observable site");
    cor->add_option("--K", ro.order, "series order");
    cor->add_flag("--profile", ro.profile, "exact decay profile instead of the series");
    cor->add_option("--beta", ro.beta, "profile inverse temperature");
    cor->add_option("--anchor", ro.anchor, "profile anchor site");
    cor->add_option("--probes", ro.probes, "profile probe sites")->delimiter(',');
    cor->add_option("--threads", ro.threads, "worker threads (PARTFN_THREADS overrides)");
    cor->add_option("--csv", ro.csv, "write coefficients or profile rows here");

    XXZOpts xo;
    CLI::App* xxz = app.add_subcommand("xxz", "sector-resolved XXZ partition functions");
    xxz->add_option("instance", xo.file, "xxz JSON file");
    xxz->add_option("--random", xo.random_n, "generate a random ferromagnetic instance");
    xxz->add_option("--seed", xo.seed, "seed for --random");
    xxz->add_option("--beta", xo.beta, "inverse temperature");
    xxz->add_option("--k-max", xo.sector_k_max, "compute sectors 0..k_max only");
    CLI::Option* xmu = xxz->add_option("--mu", xo.mu, "field: report log Z(beta, mu)");
    CLI::Option* xz = xxz->add_option("--z", xo.z, "fugacity: certified log p(z) estimate");
    xxz->add_option("--K", xo.order, "fixed truncation order for --z");
    xxz->add_option("--eps", xo.eps, "target error for --z");
    xxz->add_flag("--check-circle", xo.check_circle, "report Lee-Yang roots and deviation");
    xxz->add_option("--dim-cap", xo.dim_cap, "largest admissible sector dimension");
    xxz->add_option("--csv", xo.csv, "write sector coefficients here");

    BoundOpts bo;
    CLI::App* bnd = app.add_subcommand("bound", "geometry parameters and certified radii");
    bnd->add_option("instance", bo.file, "instance JSON file")->required();
    bnd->add_option("--beta-abs", bo.abs_beta, "evaluate the log bound at this |beta|");

    GenOpts go;
    CLI::App* gen = app.add_subcommand("gen", "write a deterministic random instance");
    gen->add_option("kind", go.kind, "chain, grid2d, graph, or xxz")->required();
    gen->add_option("--n", go.n, "number of sites")->required();
    gen->add_option("--seed", go.seed, "rng seed");
    gen->add_option("--lo", go.lo, "coupling range low end");
    gen->add_option("--hi", go.hi, "coupling range high end");
    gen->add_option("-o,--out", go.out, "output path, default stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    eo.has_b = ob->count() > 0;
    eo.has_m = om->count() > 0;
    ro.has_site1 = s1->count() > 0;
    ro.has_site2 = s2->count() > 0;
    xo.has_mu = xmu->count() > 0;
    xo.has_z = xz->count() > 0;

    try {
        if (est->parsed()) emit(run_estimate(eo), t0);
        if (orc->parsed()) emit(run_oracle(oo), t0);
        if (zrs->parsed()) emit(run_zeros(zo), t0);
        if (clu->parsed()) emit(run_cluster(co), t0);
        if (cor->parsed()) emit(run_corr(ro), t0);
        if (xxz->parsed()) emit(run_xxz(xo), t0);
        if (bnd->parsed()) emit(run_bound(bo), t0);
        if (gen->parsed()) run_gen(go);
        return 0;
    } catch (const NoCertificateError& e) {
        return fail(2, "no_certificate", e.what());
    } catch (const ParseError& e) {
        return fail(3, "parse", e.what());
    } catch (const CapError& e) {
        return fail(5, "cap", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(4, "invalid_argument", e.what());
    } catch (const std::exception& e) {
        return fail(6, "error", e.what());
    }
}
