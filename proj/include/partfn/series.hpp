#pragma once

#include <complex>
#include <string>
#include <vector>

namespace partfn {

using Complex = std::complex<double>;

/**
 * Truncated power series c_0 + c_1 x + ... + c_K x^K.
 *
 * The variable label is carried along for bookkeeping only ("beta" or "z");
 * arithmetic never inspects it. All binary operations truncate to the shorter
 * operand's order.
 */
struct PowerSeries {
    std::vector<Complex> coeffs;
    std::string var = "beta";

    PowerSeries() = default;
    explicit PowerSeries(std::vector<Complex> c, std::string v = "beta")
        : coeffs(std::move(c)), var(std::move(v)) {}

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
};

PowerSeries series_add(const PowerSeries& a, const PowerSeries& b);
PowerSeries series_sub(const PowerSeries& a, const PowerSeries& b);
PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b);

/** Truncated quotient a/b; requires b.coeffs[0] != 0. */
PowerSeries series_div(const PowerSeries& a, const PowerSeries& b);

/**
 * Series of log(g) from the series of g, via the triangular recurrence
 * obtained from g' = g f': c_k = (k a_k - sum_{j=1}^{k-1} j c_j a_{k-j}) / (k a_0).
 * Constant term is the principal branch log(a_0); requires a_0 != 0.
 */
PowerSeries log_series(const PowerSeries& zs);

/** Series of exp(f); inverse of log_series up to truncation order. */
PowerSeries exp_series(const PowerSeries& fs);

/** f(g(x)) truncated to the order of f; requires g(0) = 0. */
PowerSeries series_compose(const PowerSeries& f, const PowerSeries& g);

/** Evaluate the polynomial at x (Horner). */
Complex series_eval(const PowerSeries& s, Complex x);

}  // namespace partfn
