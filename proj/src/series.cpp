#include "partfn/series.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace partfn {

namespace {

int joint_order(const PowerSeries& a, const PowerSeries& b) {
    if (a.coeffs.empty() || b.coeffs.empty())
        throw std::invalid_argument("series: empty operand");
    return std::min(a.order(), b.order());
}

}  // namespace

PowerSeries series_add(const PowerSeries& a, const PowerSeries& b) {
    const int K = joint_order(a, b);
    PowerSeries r;
    r.var = a.var;
    r.coeffs.resize(K + 1);
    for (int k = 0; k <= K; ++k) r.coeffs[k] = a.coeffs[k] + b.coeffs[k];
    return r;
}

PowerSeries series_sub(const PowerSeries& a, const PowerSeries& b) {
    const int K = joint_order(a, b);
    PowerSeries r;
    r.var = a.var;
    r.coeffs.resize(K + 1);
    for (int k = 0; k <= K; ++k) r.coeffs[k] = a.coeffs[k] - b.coeffs[k];
    return r;
}

PowerSeries series_mul(const PowerSeries& a, const PowerSeries& b) {
    const int K = joint_order(a, b);
    PowerSeries r;
    r.var = a.var;
    r.coeffs.assign(K + 1, Complex(0.0, 0.0));
    for (int i = 0; i <= K; ++i) {
        if (a.coeffs[i] == Complex(0.0, 0.0)) continue;
        for (int j = 0; i + j <= K; ++j) r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
    }
    return r;
}

PowerSeries series_div(const PowerSeries& a, const PowerSeries& b) {
    const int K = joint_order(a, b);
    if (b.coeffs[0] == Complex(0.0, 0.0))
        throw std::invalid_argument("series_div: denominator constant term is zero");
    PowerSeries r;
    r.var = a.var;
    r.coeffs.resize(K + 1);
    for (int k = 0; k <= K; ++k) {
        Complex s = a.coeffs[k];
        for (int j = 1; j <= k; ++j) s -= b.coeffs[j] * r.coeffs[k - j];
        r.coeffs[k] = s / b.coeffs[0];
    }
    return r;
}

PowerSeries log_series(const PowerSeries& zs) {
    if (zs.coeffs.empty()) throw std::invalid_argument("log_series: empty series");
    const Complex a0 = zs.coeffs[0];
    if (a0 == Complex(0.0, 0.0))
        throw std::invalid_argument("log_series: constant term is zero");
    const int K = zs.order();
    PowerSeries r;
    r.var = zs.var;
    r.coeffs.resize(K + 1);
    r.coeffs[0] = std::log(a0);
    for (int k = 1; k <= K; ++k) {
        Complex s = static_cast<double>(k) * zs.coeffs[k];
        for (int j = 1; j < k; ++j)
            s -= static_cast<double>(j) * r.coeffs[j] * zs.coeffs[k - j];
        r.coeffs[k] = s / (static_cast<double>(k) * a0);
    }
    return r;
}

PowerSeries exp_series(const PowerSeries& fs) {
    if (fs.coeffs.empty()) throw std::invalid_argument("exp_series: empty series");
    const int K = fs.order();
    PowerSeries r;
    r.var = fs.var;
    r.coeffs.resize(K + 1);
    r.coeffs[0] = std::exp(fs.coeffs[0]);
    for (int k = 1; k <= K; ++k) {
        Complex s(0.0, 0.0);
        for (int j = 1; j <= k; ++j)
            s += static_cast<double>(j) * fs.coeffs[j] * r.coeffs[k - j];
        r.coeffs[k] = s / static_cast<double>(k);
    }
    return r;
}

PowerSeries series_compose(const PowerSeries& f, const PowerSeries& g) {
    if (f.coeffs.empty() || g.coeffs.empty())
        throw std::invalid_argument("series_compose: empty operand");
    if (g.coeffs[0] != Complex(0.0, 0.0))
        throw std::invalid_argument("series_compose: inner series must vanish at 0");
    const int K = f.order();
    PowerSeries gt;
    gt.var = g.var;
    gt.coeffs.assign(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
    for (int k = 0; k <= std::min(K, g.order()); ++k) gt.coeffs[static_cast<std::size_t>(k)] = g.coeffs[static_cast<std::size_t>(k)];
    PowerSeries acc;
    acc.var = g.var;
    acc.coeffs.assign(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
    acc.coeffs[0] = f.coeffs[0];
    PowerSeries pw;
    pw.var = g.var;
    pw.coeffs.assign(static_cast<std::size_t>(K) + 1, Complex(0.0, 0.0));
    pw.coeffs[0] = Complex(1.0, 0.0);
    for (int j = 1; j <= K; ++j) {
        pw = series_mul(pw, gt);
        for (int k = 0; k <= K; ++k)
            acc.coeffs[static_cast<std::size_t>(k)] +=
                f.coeffs[static_cast<std::size_t>(j)] * pw.coeffs[static_cast<std::size_t>(k)];
    }
    return acc;
}

Complex series_eval(const PowerSeries& s, Complex x) {
    Complex acc(0.0, 0.0);
    for (auto it = s.coeffs.rbegin(); it != s.coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
}

}  // namespace partfn
