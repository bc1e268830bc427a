#pragma once

// Dense truncated power series over an arbitrary real scalar. These are the
// workhorse of every local expansion: recursions are phrased as "perturb
// coefficient k, watch the residual series, solve". Lengths are explicit and
// small (tens of terms); no attempt at sparse or lazy representations.

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "eulerlab/real.hpp"

namespace eulerlab {

template <class R>
using Series = std::vector<R>;

template <class R>
inline Series<R> s_zero(std::size_t n) {
    return Series<R>(n, R(0));
}

// First few coefficients given, rest zero.
template <class R>
inline Series<R> s_from(std::size_t n, std::initializer_list<R> lead) {
    Series<R> a(n, R(0));
    std::size_t i = 0;
    for (const R& c : lead) {
        if (i >= n) break;
        a[i++] = c;
    }
    return a;
}

template <class R>
inline Series<R> s_const(std::size_t n, const R& c0) {
    Series<R> a(n, R(0));
    if (n) a[0] = c0;
    return a;
}

// Elementwise ops truncate to the shorter operand.
template <class R>
inline Series<R> s_add(const Series<R>& a, const Series<R>& b) {
    std::size_t n = a.size() < b.size() ? a.size() : b.size();
    Series<R> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
    return out;
}

template <class R>
inline Series<R> s_sub(const Series<R>& a, const Series<R>& b) {
    std::size_t n = a.size() < b.size() ? a.size() : b.size();
    Series<R> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
    return out;
}

template <class R>
inline Series<R> s_scale(const Series<R>& a, const R& c) {
    Series<R> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * c;
    return out;
}

// Cauchy product truncated to the length of the first operand.
template <class R>
inline Series<R> s_mul(const Series<R>& a, const Series<R>& b) {
    std::size_t n = a.size();
    Series<R> out(n, R(0));
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) continue;
        std::size_t jmax = n - i < b.size() ? n - i : b.size();
        for (std::size_t j = 0; j < jmax; ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// d/dx, keeping the length (top coefficient becomes zero). Callers that need
// the exact truncation order must ignore the top entry.
template <class R>
inline Series<R> s_deriv(const Series<R>& a) {
    std::size_t n = a.size();
    Series<R> out(n, R(0));
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = a[i + 1] * R(int(i) + 1);
    return out;
}

// Multiply by x^k within the same truncation length.
template <class R>
inline Series<R> s_shift_up(const Series<R>& a, std::size_t k) {
    std::size_t n = a.size();
    Series<R> out(n, R(0));
    for (std::size_t i = 0; i + k < n; ++i) out[i + k] = a[i];
    return out;
}

// 1/a as a power series; requires a[0] != 0 (caller's responsibility).
template <class R>
inline Series<R> s_recip(const Series<R>& a) {
    std::size_t n = a.size();
    Series<R> out(n, R(0));
    out[0] = R(1) / a[0];
    for (std::size_t k = 1; k < n; ++k) {
        R acc(0);
        for (std::size_t j = 1; j <= k; ++j) acc += a[j] * out[k - j];
        out[k] = -acc / a[0];
    }
    return out;
}

// Term-by-term antiderivative with zero constant; out[i+1] = a[i]/(i+1).
template <class R>
inline Series<R> s_integrate(const Series<R>& a) {
    std::size_t n = a.size();
    Series<R> out(n, R(0));
    for (std::size_t i = 0; i + 1 < n; ++i) out[i + 1] = a[i] / R(int(i) + 1);
    return out;
}

template <class R>
inline R s_eval(const Series<R>& a, const R& x) {
    R acc(0);
    for (std::size_t i = a.size(); i-- > 0;) acc = acc * x + a[i];
    return acc;
}

// Evaluate the derivative directly (avoids materializing s_deriv).
template <class R>
inline R s_eval_deriv(const Series<R>& a, const R& x) {
    R acc(0);
    for (std::size_t i = a.size(); i-- > 1;) acc = acc * x + a[i] * R(int(i));
    return acc;
}

// Solve a(x) = target by Newton from seed; the series must be locally
// monotone there (used to invert tail towers, where a'(0) = eta != 0).
template <class R>
inline R s_solve(const Series<R>& a, const R& target, const R& seed) {
    using std::abs;
    R x = seed;
    for (int it = 0; it < 80; ++it) {
        const R step = (s_eval(a, x) - target) / s_eval_deriv(a, x);
        x -= step;
        if (abs(step) <= abs(x) * real_eps<R>() * 4) break;
    }
    return x;
}

}  // namespace eulerlab
