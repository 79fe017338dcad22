#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "partfn/oracle.hpp"

#include <cmath>

using namespace partfn;

namespace {

LocalHamiltonian single_pauli(const std::string& p) {
    std::vector<Site> sites(1);
    std::vector<LocalTerm> terms(1);
    terms[0].support = {0};
    terms[0].matrix = pauli_string_matrix(p);
    return LocalHamiltonian(1, 2, std::move(sites), std::move(terms));
}

LocalHamiltonian two_free_qubits() {
    std::vector<Site> sites(2);
    sites[0].index = 0;
    sites[1].index = 1;
    std::vector<LocalTerm> terms(2);
    terms[0].support = {0};
    terms[0].matrix = pauli_string_matrix("Z");
    terms[1].support = {1};
    terms[1].matrix = pauli_string_matrix("Z");
    return LocalHamiltonian(2, 2, std::move(sites), std::move(terms));
}

LocalTerm z_on(int site) {
    LocalTerm t;
    t.support = {site};
    t.matrix = pauli_string_matrix("Z");
    return t;
}

}  // namespace

TEST_CASE("partition function of a free qubit is 2 cosh beta") {
    auto S = spectrum(single_pauli("Z"), false);
    CHECK(S.dim() == 2);
    CHECK(log_partition_real(S, 0.01) == doctest::Approx(0.6931971797266343).epsilon(1e-14));
    CHECK(log_partition_real(S, 2.5) == doctest::Approx(std::log(2.0 * std::cosh(2.5))).epsilon(1e-14));
    CHECK(free_energy(S, 2.5) == doctest::Approx(-std::log(2.0 * std::cosh(2.5)) / 2.5));
    CHECK_THROWS_AS(free_energy(S, 0.0), std::invalid_argument);
}

TEST_CASE("partition function vanishes at the first Fisher zero of a qubit") {
    auto S = spectrum(single_pauli("Z"), false);
    Complex z = partition_function(S, Complex(0.0, 1.5707963267948966));
    CHECK(std::abs(z) < 1e-14);
    CHECK(log_abs_partition(S, Complex(0.0, 1.5707963267948966)) < -25.0);
    // away from the zero the compensated sum matches the closed form
    Complex beta(0.3, 0.7);
    Complex want = std::exp(beta) + std::exp(-beta);
    CHECK(std::abs(partition_function(S, beta) - want) < 1e-14);
}

TEST_CASE("gibbs expectation of Z is minus tanh beta") {
    auto S = spectrum(single_pauli("Z"));
    REQUIRE(S.has_basis());
    REQUIRE(S.real_basis());
    for (double beta : {0.1, 0.7, 2.0}) {
        Complex v = gibbs_expectation(S, beta, {z_on(0)});
        CHECK(v.real() == doctest::Approx(-std::tanh(beta)).epsilon(1e-13));
        CHECK(std::abs(v.imag()) < 1e-14);
    }
}

TEST_CASE("a Y term routes through the complex basis") {
    auto S = spectrum(single_pauli("Y"));
    REQUIRE(S.has_basis());
    CHECK_FALSE(S.real_basis());
    CHECK(log_partition_real(S, 0.4) == doctest::Approx(std::log(2.0 * std::cosh(0.4))).epsilon(1e-13));
    LocalTerm y;
    y.support = {0};
    y.matrix = pauli_string_matrix("Y");
    Complex v = gibbs_expectation(S, 0.4, {y});
    CHECK(v.real() == doctest::Approx(-std::tanh(0.4)).epsilon(1e-13));
}

TEST_CASE("covariance separates independent qubits") {
    auto S = spectrum(two_free_qubits());
    double beta = 0.6;
    CHECK(std::abs(gibbs_covariance(S, beta, z_on(0), z_on(1))) < 1e-14);
    double t = std::tanh(beta);
    CHECK(gibbs_covariance(S, beta, z_on(0), z_on(0)).real() ==
          doctest::Approx(1.0 - t * t).epsilon(1e-13));
}

TEST_CASE("scan finds the lone zero of a qubit on the imaginary axis") {
    auto S = spectrum(single_pauli("Z"), false);
    std::vector<std::array<double, 3>> grid;
    auto zeros = fisher_zero_scan(S, -0.5, 0.5, 0.0, 2.0, 21, 41, 1e-10, &grid);
    REQUIRE(zeros.size() == 1);
    CHECK(std::abs(zeros[0].location - Complex(0.0, 1.5707963267948966)) < 1e-9);
    CHECK(zeros[0].residual <= 1e-10);
    CHECK(grid.size() == 21u * 41u);
    // grid rows carry |Z| / d^n at the node, outer loop over the real part
    CHECK(grid[0][0] == doctest::Approx(-0.5));
    CHECK(grid[0][1] == doctest::Approx(0.0));
    CHECK(grid[0][2] == doctest::Approx(std::cosh(0.5)).epsilon(1e-12));
    CHECK(grid.back()[0] == doctest::Approx(0.5));
    CHECK(grid.back()[1] == doctest::Approx(2.0));
}

TEST_CASE("scan of a zero-free box comes back empty") {
    auto S = spectrum(single_pauli("Z"), false);
    auto zeros = fisher_zero_scan(S, -0.3, 0.3, 0.0, 1.0, 13, 13);
    CHECK(zeros.empty());
    CHECK_THROWS_AS(fisher_zero_scan(S, -0.3, 0.3, 0.0, 1.0, 1, 13), std::invalid_argument);
    CHECK_THROWS_AS(fisher_zero_scan(S, 0.3, -0.3, 0.0, 1.0, 13, 13), std::invalid_argument);
}

TEST_CASE("spectrum refuses dimensions above the cap") {
    auto H = two_free_qubits();
    CHECK_THROWS_AS(spectrum(H, false, 2), std::invalid_argument);
    auto S = spectrum(H, false, 4);
    CHECK(S.dim() == 4);
    CHECK_FALSE(S.has_basis());
    CHECK_THROWS_AS(gibbs_expectation(S, 1.0, {z_on(0)}), std::invalid_argument);
}

TEST_CASE("energies ascend") {
    auto S = spectrum(two_free_qubits(), false);
    for (long i = 1; i < S.dim(); ++i) CHECK(S.energies[i] >= S.energies[i - 1]);
    CHECK(S.energies[0] == doctest::Approx(-2.0));
    CHECK(S.energies[3] == doctest::Approx(2.0));
}
