#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "partfn/cluster.hpp"
#include "partfn/extrapolation.hpp"
#include "partfn/oracle.hpp"

#include <cmath>

using namespace partfn;

namespace {

LocalHamiltonian single_z() {
    std::vector<Site> sites(1);
    std::vector<LocalTerm> terms(1);
    terms[0].support = {0};
    terms[0].matrix = pauli_string_matrix("Z");
    return LocalHamiltonian(1, 2, std::move(sites), std::move(terms));
}

}  // namespace

TEST_CASE("truncation bound spot values") {
    CHECK(truncation_bound(BoundKind::bounded, 8.0, 2.0, 3) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(truncation_bound(BoundKind::polynomial, 10.0, 2.0, 4) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK_THROWS_AS(truncation_bound(BoundKind::bounded, 8.0, 1.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(truncation_bound(BoundKind::bounded, -1.0, 2.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(truncation_bound(BoundKind::bounded, 8.0, 2.0, -1), std::invalid_argument);
}

TEST_CASE("choose_K returns the least sufficient order") {
    CHECK(choose_K(8.0, 2.0, 1.1) == 3);
    for (double M : {0.5, 4.0, 50.0})
        for (double b : {1.3, 2.0, 6.0})
            for (double eps : {1e-3, 1e-8}) {
                const int K = choose_K(M, b, eps);
                CHECK(truncation_bound(BoundKind::bounded, M, b, K) <= eps);
                if (K > 0) CHECK(truncation_bound(BoundKind::bounded, M, b, K - 1) > eps);
            }
    CHECK_THROWS_AS(choose_K(8.0, 2.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(choose_K(1e6, 1.01, 1e-12, 16), CapError);
}

TEST_CASE("free qubit estimate lands on log 2 cosh beta") {
    auto H = single_z();
    auto est = estimate_log_partition(H, Complex(0.01, 0.0), 1e-8);
    CHECK(std::abs(est.value.real() - 0.6931971797266343) <= 1e-8);
    CHECK(std::abs(est.value.imag()) < 1e-12);
    CHECK(est.b == doctest::Approx(0.07357588823428847 / 0.01).epsilon(1e-12));
    CHECK(est.certified_error <= 1e-8);
    CHECK(est.series.order() == est.K);
}

TEST_CASE("zero beta needs no moments at all") {
    auto H = random_instance("chain", 6, -1.0, 1.0, 5);
    auto est = estimate_log_partition(H, Complex(0.0, 0.0), 1e-10);
    CHECK(est.K == 0);
    CHECK(est.value.real() == doctest::Approx(6.0 * std::log(2.0)).epsilon(1e-15));
    CHECK(est.certified_error == 0.0);
}

TEST_CASE("no certificate beyond the derived radius") {
    auto H = random_instance("chain", 5, -1.0, 1.0, 17);
    const double b0 = beta0(geometry_params(H));
    CHECK_THROWS_WITH_AS(
        (void)estimate_log_partition(H, Complex(1.5 * b0, 0.0), 1e-6),
        doctest::Contains("outside the certified disk"), NoCertificateError);
    CHECK_THROWS_AS((void)estimate_log_partition(H, Complex(b0, 0.0), 1e-6),
                    NoCertificateError);
    // inside the disk the certificate exists
    auto est = estimate_log_partition(H, Complex(0.8 * b0, 0.0), 1e-2);
    CHECK(est.K > 0);
}

TEST_CASE("observed error stays below the certificate") {
    for (std::uint64_t seed : {1001, 1002, 1003}) {
        auto H = random_instance("grid2d", 8, -1.0, 1.0, seed);
        const double b0 = beta0(geometry_params(H));
        const Complex beta(0.4 * b0, 0.3 * b0);
        auto est = estimate_log_partition(H, beta, 1e-6);
        auto S = spectrum(H, false);
        const Complex exact = std::log(partition_function(S, beta));
        CHECK(std::abs(est.value - exact) <= est.certified_error);
        CHECK(est.certified_error <= 1e-6);
    }
}

TEST_CASE("explicit disks override the derived certificate") {
    auto H = single_z();
    // the qubit partition function is entire and |log Z| <= b + log 2 on radius b
    ZeroFreeDisk disk{4.0, 0.0};
    disk.M = 0.02 * 4.0 + std::log(2.0);
    auto est = estimate_log_partition(H, Complex(0.02, 0.0), 1e-9, disk);
    CHECK(est.b == 4.0);
    CHECK(std::abs(est.value.real() - std::log(2.0 * std::cosh(0.02))) <= 1e-9);
    CHECK_THROWS_AS(
        (void)estimate_log_partition(H, Complex(0.02, 0.0), 1e-9, ZeroFreeDisk{0.9, 1.0}),
        std::invalid_argument);
}

TEST_CASE("certified error shrinks as eps tightens") {
    auto H = random_instance("chain", 4, -1.0, 1.0, 23);
    const double b0 = beta0(geometry_params(H));
    double last = 1e300;
    int last_K = -1;
    for (double eps : {1e-2, 1e-5, 1e-9}) {
        auto est = estimate_log_partition(H, Complex(0.5 * b0, 0.0), eps);
        CHECK(est.certified_error <= eps);
        CHECK(est.certified_error < last);
        CHECK(est.K > last_K);
        last = est.certified_error;
        last_K = est.K;
    }
}

TEST_CASE("multiplicative accuracy of Z itself") {
    auto H = random_instance("chain", 7, -1.0, 1.0, 88);
    const double b0 = beta0(geometry_params(H));
    const double eps = 1e-5;
    auto est = estimate_log_partition(H, Complex(0.5 * b0, 0.0), eps);
    auto S = spectrum(H, false);
    const Complex exact = partition_function(S, Complex(0.5 * b0, 0.0));
    const Complex approx = std::exp(est.value);
    CHECK(std::abs(approx - exact) <= 1.05 * eps * std::abs(exact));
}

TEST_CASE("disk region maps linearly") {
    RegionSpec r;
    r.kind = RegionSpec::Kind::disk;
    r.beta = 0.05;
    r.radius = 0.05;
    auto map = map_disk_to_region(r);
    REQUIRE(map.coeffs.size() == 2);
    CHECK(map.coeffs[0] == Complex(0.0, 0.0));
    CHECK(map.coeffs[1].real() == doctest::Approx(0.05));
    CHECK(map.verified);
    CHECK(map.target_beta == doctest::Approx(0.05));
}

TEST_CASE("rect region maps through a verified polynomial") {
    RegionSpec r;
    r.kind = RegionSpec::Kind::rect;
    r.beta = 1.0;
    r.delta = 0.25;
    auto map = map_disk_to_region(r);
    CHECK(map.verified);
    CHECK(map.max_distance <= 0.25);
    CHECK(map.coeffs[0] == Complex(0.0, 0.0));
    Complex at_one(0.0, 0.0);
    for (auto it = map.coeffs.rbegin(); it != map.coeffs.rend(); ++it) at_one = at_one + *it;
    CHECK(std::abs(at_one - Complex(1.0, 0.0)) < 1e-12);
    CHECK(map.samples == 4096);

    RegionSpec wide = r;
    wide.delta = 1.5;  // delta >= beta collapses to the linear map
    auto lin = map_disk_to_region(wide);
    CHECK(lin.coeffs.size() == 2);
    CHECK(lin.verified);

    RegionSpec bad = r;
    bad.beta = -1.0;
    CHECK_THROWS_AS(map_disk_to_region(bad), std::invalid_argument);
    RegionSpec nodelta = r;
    nodelta.delta = 0.0;
    CHECK_THROWS_AS(map_disk_to_region(nodelta), std::invalid_argument);
}
