#pragma once

// Parameter bookkeeping, the autonomous phase-plane vector field of the
// self-similar isentropic Euler flow in Emden variables, sonic-point data, and
// the local series expansions (origin, sonic point, far field) that seed and
// close every solver downstream.
//
// Conventions used throughout:
//   x = ln Z, and the flow is  dsigma/dx = -Delta2/Delta,  domega/dx = -Delta1/Delta
//   with Delta  = (omega-1)^2 - sigma^2,
//        Delta1 = omega(omega-1)(omega-r) - (d*omega - ell*(r-1)) sigma^2,
//        Delta2 = (sigma/ell) (Q - ell*sigma^2),
//        Q      = (ell+d-1) omega^2 - (ell+d+(ell-1)r) omega + ell*r.
// The sonic point is the larger root sigma2 of
//   (d-1) sigma^2 - (d-1-(ell-1)(r-1)) sigma + (r-1) = 0,  omega2 = 1 - sigma2.

#include "eulerlab/errors.hpp"
#include "eulerlab/real.hpp"
#include "eulerlab/series.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace eulerlab {

template <class R>
struct CriticalSpeeds {
    R r_star;   // (d+ell)/(ell+sqrt(d)), binding for ell < d
    R r_plus;   // 1 + (d-1)/(1+sqrt(ell))^2, binding for ell > d
    R r_crit;   // the admissible upper bound for this (d, ell)
};

template <class R>
CriticalSpeeds<R> critical_speed(int d, const R& ell) {
    if (d < 2 || !(ell > 0)) throw std::domain_error("critical_speed: need d >= 2 and ell > 0");
    using std::sqrt;
    const R sd = sqrt(R(d));
    const R sl = sqrt(ell);
    CriticalSpeeds<R> out;
    out.r_star = (R(d) + ell) / (ell + sd);
    out.r_plus = 1 + R(d - 1) / ((1 + sl) * (1 + sl));
    out.r_crit = ell < R(d) ? out.r_star : (ell > R(d) ? out.r_plus : out.r_star);
    return out;
}

template <class R>
struct EulerParams {
    int d = 3;
    R ell = R(2);
    R r = R(1);
    std::optional<R> kappa;  // far-field trajectory label, set once a branch is chosen
    R eta = R(1);            // far-field scaling label

    R gamma() const { return 1 + 2 / ell; }

    void validate() const {
        if (d < 2) throw std::domain_error("EulerParams: d >= 2 required");
        if (!(ell > 0)) throw std::domain_error("EulerParams: ell > 0 required");
        if (!(eta > 0)) throw std::domain_error("EulerParams: eta > 0 required");
        const auto cs = critical_speed(d, ell);
        if (!(r > 1 && r < cs.r_crit))
            throw std::domain_error("EulerParams: r outside (1, r_crit)");
    }
};

template <class R>
struct PhasePoint {
    R sigma = R(0);
    R omega = R(0);
};

template <class R>
struct VectorField {
    R Delta, Delta1, Delta2, Q;
};

template <class R>
VectorField<R> vector_field(const PhasePoint<R>& p, const EulerParams<R>& par) {
    const R& s = p.sigma;
    const R& w = p.omega;
    const R d = R(par.d), l = par.ell, r = par.r;
    VectorField<R> f;
    f.Delta = (w - 1) * (w - 1) - s * s;
    f.Delta1 = w * (w - 1) * (w - r) - (d * w - l * (r - 1)) * s * s;
    f.Q = (l + d - 1) * w * w - (l + d + (l - 1) * r) * w + l * r;
    f.Delta2 = (s / l) * (f.Q - l * s * s);
    return f;
}

// Hand-coded closed-form partials of (Delta, Delta1, Delta2) in (omega, sigma);
// these feed both the sonic Jacobian and the collocation Newton matrices.
template <class R>
struct VectorFieldJacobian {
    R dDelta_dw, dDelta_ds;
    R dD1_dw, dD1_ds;
    R dD2_dw, dD2_ds;
};

template <class R>
VectorFieldJacobian<R> vector_field_jacobian(const PhasePoint<R>& p, const EulerParams<R>& par) {
    const R& s = p.sigma;
    const R& w = p.omega;
    const R d = R(par.d), l = par.ell, r = par.r;
    VectorFieldJacobian<R> j;
    j.dDelta_dw = 2 * (w - 1);
    j.dDelta_ds = -2 * s;
    j.dD1_dw = 3 * w * w - 2 * (1 + r) * w + r - d * s * s;
    j.dD1_ds = -2 * s * (d * w - l * (r - 1));
    j.dD2_dw = (s / l) * (2 * (l + d - 1) * w - (l + d + (l - 1) * r));
    const R Q = (l + d - 1) * w * w - (l + d + (l - 1) * r) * w + l * r;
    j.dD2_ds = Q / l - 3 * s * s;
    return j;
}

// Series-in, series-out version of the vector field: s(t), w(t) truncated
// series in any local variable t produce Delta(t), Delta1(t), Delta2(t), Q(t)
// to the same truncation. This is what every coefficient recursion probes.
template <class R>
struct SeriesVectorField {
    Series<R> Delta, Delta1, Delta2, Q;
};

template <class R>
SeriesVectorField<R> series_vector_field(const EulerParams<R>& par, const Series<R>& s,
                                         const Series<R>& w) {
    const std::size_t n = s.size();
    const R d = R(par.d), l = par.ell, r = par.r;
    const Series<R> one = s_const<R>(n, R(1));
    const Series<R> wm1 = s_sub(w, one);
    const Series<R> ss = s_mul(s, s);
    SeriesVectorField<R> f;
    f.Delta = s_sub(s_mul(wm1, wm1), ss);
    f.Delta1 = s_sub(s_mul(s_mul(w, wm1), s_sub(w, s_const<R>(n, r))),
                     s_mul(s_sub(s_scale(w, d), s_const<R>(n, l * (r - 1))), ss));
    f.Q = s_add(s_sub(s_scale(s_mul(w, w), l + d - 1), s_scale(w, l + d + (l - 1) * r)),
                s_const<R>(n, l * r));
    f.Delta2 = s_scale(s_mul(s, s_sub(f.Q, s_scale(ss, l))), 1 / l);
    return f;
}

// Probe-sensitivity floor for the coefficient recursions. Coefficients are
// O(1) polynomials in the parameters, so a fixed absolute floor well above
// rounding is the right scale at every supported precision.
template <class R>
R parse_sens_tol() {
    return parse_real<R>("1e-18");
}

// ---------------------------------------------------------------------------
// Sonic-point data.

template <class R>
struct SonicData {
    R sigma2, sigma3;        // quadratic roots, sigma3 <= sigma2
    R omega2;                // 1 - sigma2
    R c1, c2, c3, c4;        // Jacobian of (Delta1, Delta2) wrt (omega, sigma) at P2
    R lambda_plus, lambda_minus;  // eigenvalues, lambda_minus < lambda_plus < 0
    R nu;                    // lambda_minus / lambda_plus > 1
    R omega_plus, omega_minus;    // tangent slopes domega/dsigma; smooth branch has omega_minus
    R s1, w1;                // first x-derivatives of (sigma, omega) along the smooth branch
    R Kconst;                // (ell+1)(r-1) - (d+1); lambda_plus + lambda_minus = Kconst*sigma2

    // Decay rate of a perturbation that vanishes at order N at the sonic point:
    // N(Omega) interpolates N(0) = nu down to N(Omega_max) = 1.
    R N_of(const R& Omega) const { return nu + (2 / Kconst) * (nu + 1) * Omega; }
    R Omega_max() const { return -Kconst * (nu - 1) / (2 * (nu + 1)); }
};

template <class R>
SonicData<R> sonic_data(const EulerParams<R>& par) {
    using std::abs;
    using std::sqrt;
    const R d = R(par.d), l = par.ell, r = par.r;
    const R a = d - 1;
    const R b = -(d - 1 - (l - 1) * (r - 1));
    const R c = r - 1;
    const R disc2 = b * b - 4 * a * c;
    if (!(disc2 > 0)) throw DegenerateSonicPoint("sonic quadratic has no separated real roots");
    const R disc = sqrt(disc2);
    SonicData<R> sd;
    sd.sigma2 = (-b + disc) / (2 * a);
    sd.sigma3 = (-b - disc) / (2 * a);
    sd.omega2 = 1 - sd.sigma2;
    const R s2 = sd.sigma2, w2 = sd.omega2;

    sd.c1 = 3 * w2 * w2 - 2 * (1 + r) * w2 + r - d * s2 * s2;
    sd.c3 = -2 * s2 * (d * w2 - l * (r - 1));
    sd.c2 = (s2 / l) * (2 * (l + d - 1) * w2 - (l + d + (l - 1) * r));
    sd.c4 = ((l + d - 1) * w2 * w2 - (l + d + (l - 1) * r) * w2 + l * r) / l - 3 * s2 * s2;

    const R rad2 = (sd.c1 - sd.c4) * (sd.c1 - sd.c4) + 4 * sd.c2 * sd.c3;
    if (!(rad2 > 0)) throw DegenerateSonicPoint("complex tangent spectrum at the sonic point");
    const R rad = sqrt(rad2);
    sd.lambda_plus = (sd.c1 + sd.c4 + rad) / 2;
    sd.lambda_minus = (sd.c1 + sd.c4 - rad) / 2;
    if (!(abs(sd.lambda_plus) > 0)) throw DegenerateSonicPoint("vanishing slow eigenvalue");
    sd.nu = sd.lambda_minus / sd.lambda_plus;

    const R den = 4 * s2 * (sd.c1 + sd.c2 - sd.c3 - sd.c4);
    const R num0 =
        sd.c1 * sd.c1 - sd.c1 * sd.c3 + 2 * sd.c2 * sd.c3 - sd.c1 * sd.c4 - sd.c3 * sd.c4;
    sd.w1 = (num0 + (sd.c1 - sd.c3) * rad) / den;
    sd.s1 = -sd.w1 * (sd.c1 - 2 * s2 * sd.w1) / (sd.c3 - 2 * s2 * sd.w1);
    sd.Kconst = (l + 1) * (r - 1) - (d + 1);

    // The two tangent slopes solve c2 m^2 + (c4 - c1) m - c3 = 0; the smooth
    // branch slope is w1/s1 and carries the omega_minus label.
    const R ma = (sd.c1 - sd.c4 + rad) / (2 * sd.c2);
    const R mb = (sd.c1 - sd.c4 - rad) / (2 * sd.c2);
    const R smooth = sd.w1 / sd.s1;
    if (abs(ma - smooth) <= abs(mb - smooth)) {
        sd.omega_minus = ma;
        sd.omega_plus = mb;
    } else {
        sd.omega_minus = mb;
        sd.omega_plus = ma;
    }
    return sd;
}

// Brute-force check quantity: assembled from the sonic data exactly as the
// smoothness-exponent bookkeeping requires, it must reproduce nu identically.
// Kept here so tests and the acceptance gate share one definition.
template <class R>
R t2_identity(const EulerParams<R>& par, const SonicData<R>& sd) {
    const R d = R(par.d), l = par.ell, r = par.r;
    const R Kb = (2 - d + l * (r - 1) - r) + 2 * (d - 1) * sd.sigma2;
    const R sw = sd.s1 + sd.w1;
    return Kb * (sd.w1 - l * sd.s1) / (2 * l * sw * sw);
}

// ---------------------------------------------------------------------------
// Local series expansions.

enum class ExpansionSite { Origin, SonicLeft, SonicRight, Infinity };

template <class R>
struct SeriesPair {
    R s = R(0);  // sigma-like component (see per-site conventions below)
    R w = R(0);  // omega-like component
};

// One local expansion of the trajectory. Component meaning by site:
//  Origin:    variable Z; integer_tower[k] holds coefficients of Z^k with
//             s = coefficient of (Z*sigma)(Z) and w = coefficient of omega(Z);
//             (Z*sigma) is even with value delta at Z=0, omega is even with
//             omega(0) = ell(r-1)/d. leading_exponent = 0.
//  Infinity:  variable y = Z^{-r}; integer_tower[k] = (s_k, w_k) with
//             sigma = sum s_k y^k, omega = sum w_k y^k, s_1 = eta,
//             w_1 = kappa*eta. leading_exponent = r.
//  SonicLeft/SonicRight: variable xi = sigma - sigma2; xi > 0 is the interior
//             side (Z < Z2, label SonicLeft), xi < 0 the exterior. Only the w
//             component is meaningful: omega(xi) = sum integer_tower[n].w xi^n
//             + c_value |xi|^nu sum nonint_tower[n].w xi^n, nonint_tower[0].w = 1.
//             leading_exponent = nu.
template <class R>
struct SeriesExpansion {
    ExpansionSite location = ExpansionSite::Origin;
    std::vector<SeriesPair<R>> integer_tower;
    std::vector<SeriesPair<R>> nonint_tower;
    R leading_exponent = R(0);
    int n_terms = 0;
    R c_value = R(0);  // sonic sides only: weight of the |xi|^nu branch
};

namespace detail {

// Shared pattern of all recursions below: bump a trial coefficient, watch how
// the residual series moves, solve the linear system the probes reveal.
template <class R>
int first_sensitive_order(const Series<R>& dA, const Series<R>& dB, const R& tol) {
    using std::abs;
    for (std::size_t o = 0; o < dA.size(); ++o)
        if (abs(dA[o]) + abs(dB[o]) > tol) return int(o);
    return -1;
}

}  // namespace detail

// Origin expansion. sigma ~ delta/Z + a1 Z + a3 Z^3 + ..., omega even in Z
// with omega(0) = ell(r-1)/d. Works on S = Z*sigma so everything is a plain
// even power series; the two residuals are the Delta-multiplied flow equations
// cleared of 1/Z. delta parameterizes the one-parameter family.
template <class R>
SeriesExpansion<R> series_at_origin(const EulerParams<R>& par, const R& delta, int n_terms) {
    using std::abs;
    const int K = n_terms;
    const std::size_t n = std::size_t(2 * K + 3);
    const R d = R(par.d), l = par.ell, r = par.r;
    const R sens_tol = parse_sens_tol<R>();

    Series<R> S = s_const<R>(n, delta);
    Series<R> w = s_const<R>(n, l * (r - 1) / d);

    auto residuals = [&](const Series<R>& Sv, const Series<R>& wv) {
        const Series<R> one = s_const<R>(n, R(1));
        const Series<R> wm1 = s_sub(wv, one);
        // A = Z^2 (w-1)^2 - S^2
        const Series<R> A = s_sub(s_shift_up(s_mul(wm1, wm1), 2), s_mul(Sv, Sv));
        // B = Z S' - S
        const Series<R> B = s_sub(s_shift_up(s_deriv(Sv), 1), Sv);
        const Series<R> Q =
            s_add(s_sub(s_scale(s_mul(wv, wv), l + d - 1), s_scale(wv, l + d + (l - 1) * r)),
                  s_const<R>(n, l * r));
        const Series<R> SQZ2 = s_shift_up(s_mul(Sv, Q), 2);
        Series<R> Rsig =
            s_add(s_sub(s_mul(A, B), s_mul(s_mul(Sv, Sv), Sv)), s_scale(SQZ2, 1 / l));
        // Rw = A Z w' + Z^2 w(w-1)(w-r) - (d w - l(r-1)) S^2
        const Series<R> Zwp = s_shift_up(s_deriv(wv), 1);
        const Series<R> cub = s_mul(s_mul(wv, wm1), s_sub(wv, s_const<R>(n, r)));
        Series<R> Rw = s_add(s_mul(A, Zwp),
                             s_sub(s_shift_up(cub, 2),
                                   s_mul(s_sub(s_scale(wv, d), s_const<R>(n, l * (r - 1))),
                                         s_mul(Sv, Sv))));
        return std::pair<Series<R>, Series<R>>(std::move(Rsig), std::move(Rw));
    };

    for (int m = 1; m <= K; ++m) {
        const std::size_t i = std::size_t(2 * m);
        const auto base = residuals(S, w);
        S[i] += 1;
        const auto rs = residuals(S, w);
        S[i] -= 1;
        w[i] += 1;
        const auto rw = residuals(S, w);
        w[i] -= 1;

        // For each residual, the lowest order that reacts to either probe.
        struct Row {
            int order, which;
            R a, b, rhs;
        };
        std::vector<Row> rows;
        for (int which = 0; which < 2; ++which) {
            const Series<R>& b0 = which == 0 ? base.first : base.second;
            const Series<R>& bs = which == 0 ? rs.first : rs.second;
            const Series<R>& bw = which == 0 ? rw.first : rw.second;
            for (std::size_t o = 0; o < n; ++o) {
                const R da = bs[o] - b0[o];
                const R db = bw[o] - b0[o];
                if (abs(da) + abs(db) > sens_tol) {
                    rows.push_back(Row{int(o), which, da, db, b0[o]});
                    break;
                }
            }
        }
        if (rows.size() < 2) throw RecursionBreakdown("origin series: insensitive residuals", 2 * m);
        std::sort(rows.begin(), rows.end(), [](const Row& x, const Row& y) {
            return x.order != y.order ? x.order < y.order : x.which < y.which;
        });
        const R det = rows[0].a * rows[1].b - rows[1].a * rows[0].b;
        if (!(abs(det) > sens_tol * sens_tol))
            throw RecursionBreakdown("origin series: singular probe system", 2 * m);
        S[i] += (-rows[0].rhs * rows[1].b + rows[1].rhs * rows[0].b) / det;
        w[i] += (-rows[0].a * rows[1].rhs + rows[1].a * rows[0].rhs) / det;
    }

    SeriesExpansion<R> out;
    out.location = ExpansionSite::Origin;
    out.n_terms = int(n);
    out.leading_exponent = R(0);
    out.integer_tower.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.integer_tower[k].s = S[k];
        out.integer_tower[k].w = w[k];
    }
    return out;
}

// Far-field tower in y = Z^{-r}: sigma = sum s_k y^k, omega = sum w_k y^k with
// s_1 = eta, w_1 = kappa*eta. d/dx = -r y d/dy turns the flow equations into
// Delta * (dsigma/dx) + Delta2 = 0 and the omega analogue; order k >= 2 of the
// residual pair pins (s_k, w_k) through a 2x2 probe solve.
template <class R>
SeriesExpansion<R> series_at_infinity(const EulerParams<R>& par, const R& kappa, const R& eta,
                                      int k_cut) {
    using std::abs;
    const std::size_t n = std::size_t(k_cut + 1);
    const R r = par.r;
    const R sens_tol = parse_sens_tol<R>();

    Series<R> sy = s_zero<R>(n), wy = s_zero<R>(n);
    sy[1] = eta;
    wy[1] = kappa * eta;

    auto resid = [&](const Series<R>& s, const Series<R>& w) {
        Series<R> sp(n), wp(n);
        for (std::size_t k = 0; k < n; ++k) {
            sp[k] = -r * R(int(k)) * s[k];
            wp[k] = -r * R(int(k)) * w[k];
        }
        const auto f = series_vector_field(par, s, w);
        return std::pair<Series<R>, Series<R>>(s_add(s_mul(f.Delta, sp), f.Delta2),
                                               s_add(s_mul(f.Delta, wp), f.Delta1));
    };

    for (std::size_t k = 2; k < n; ++k) {
        const auto base = resid(sy, wy);
        sy[k] += 1;
        const auto ps = resid(sy, wy);
        sy[k] -= 1;
        wy[k] += 1;
        const auto pw = resid(sy, wy);
        wy[k] -= 1;
        const R a11 = ps.first[k] - base.first[k], a12 = pw.first[k] - base.first[k];
        const R a21 = ps.second[k] - base.second[k], a22 = pw.second[k] - base.second[k];
        const R det = a11 * a22 - a12 * a21;
        if (!(abs(det) > sens_tol))
            throw RecursionBreakdown("far-field tower: singular probe system", int(k));
        sy[k] = (-base.first[k] * a22 + base.second[k] * a12) / det;
        wy[k] = (-a11 * base.second[k] + a21 * base.first[k]) / det;
    }

    SeriesExpansion<R> out;
    out.location = ExpansionSite::Infinity;
    out.n_terms = int(n);
    out.leading_exponent = r;
    out.integer_tower.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.integer_tower[k].s = sy[k];
        out.integer_tower[k].w = wy[k];
    }
    return out;
}

// Phase-plane slope series at the far-field end: omega(sigma) = kappa*sigma +
// sum_{k>=2} b_k sigma^k along the trajectory labeled kappa. Cheap seed for
// marches that start at small sigma.
template <class R>
Series<R> far_field_phase_series(const EulerParams<R>& par, const R& kappa, int K) {
    using std::abs;
    const std::size_t n = std::size_t(K + 2);
    const R sens_tol = parse_sens_tol<R>();
    Series<R> w = s_zero<R>(n);
    w[1] = kappa;
    Series<R> s = s_zero<R>(n);
    s[1] = R(1);  // sigma is the series variable itself

    auto resid = [&](const Series<R>& wv) {
        const auto f = series_vector_field(par, s, wv);
        return s_sub(s_mul(f.Delta2, s_deriv(wv)), f.Delta1);
    };

    for (std::size_t k = 2; k <= std::size_t(K); ++k) {
        const Series<R> base = resid(w);
        w[k] += 1;
        const Series<R> probe = resid(w);
        w[k] -= 1;
        int o = -1;
        for (std::size_t i = 0; i < n; ++i)
            if (abs(probe[i] - base[i]) > sens_tol) {
                o = int(i);
                break;
            }
        if (o < 0) throw RecursionBreakdown("far-field phase series: insensitive residual", int(k));
        w[k] -= base[o] / (probe[o] - base[o]);
    }
    return w;
}

// Sonic expansion in xi = sigma - sigma2. Integer tower by one-coefficient
// probes (the sensitivity of residual order k to w_k crosses zero exactly at
// integer nu, which is why integer nu is rejected up front); non-integer tower
// from the linearization around the smooth branch: with B = Delta2/xi and
// A = dDelta1/domega - omega_s' * dDelta2/domega along the branch, a
// perturbation u = c |xi|^nu g(xi) satisfies xi B g' = (A - nu B) g, fixing g
// recursively with g(0) = 1 (and nu = A(0)/B(0), an internal cross-check).
template <class R>
SeriesExpansion<R> series_at_sonic(const EulerParams<R>& par, ExpansionSite side, int n_terms,
                                   const R& c_value, const R& integer_nu_guard = R(1) / 1000) {
    using std::abs;
    using std::floor;
    if (side != ExpansionSite::SonicLeft && side != ExpansionSite::SonicRight)
        throw std::domain_error("series_at_sonic: side must be SonicLeft or SonicRight");
    const SonicData<R> sd = sonic_data(par);
    const R nearest = floor(sd.nu + R(1) / 2);
    if (abs(sd.nu - nearest) < integer_nu_guard)
        throw IntegerNuError("nu within guard band of an integer");

    const int K = n_terms;
    const std::size_t n = std::size_t(K + 2);
    const R sens_tol = parse_sens_tol<R>();
    Series<R> s = s_zero<R>(n), w = s_zero<R>(n);
    s[0] = sd.sigma2;
    s[1] = R(1);
    w[0] = sd.omega2;
    w[1] = sd.w1 / sd.s1;

    for (std::size_t k = 2; k <= std::size_t(K); ++k) {
        const auto f = series_vector_field(par, s, w);
        const Series<R> base = s_sub(s_mul(f.Delta2, s_deriv(w)), f.Delta1);
        w[k] += 1;
        const auto fb = series_vector_field(par, s, w);
        const Series<R> probe = s_sub(s_mul(fb.Delta2, s_deriv(w)), fb.Delta1);
        w[k] -= 1;
        const R co = probe[k] - base[k];
        if (!(abs(co) > sens_tol))
            throw RecursionBreakdown("sonic series: resonant order", int(k));
        w[k] -= base[k] / co;
    }

    // Linearized singular branch g(xi).
    const std::size_t m = std::size_t(K + 1);
    Series<R> A(m), B(m);
    {
        // Partials along the smooth branch as series in xi.
        Series<R> dD1w(m), dD2w(m);
        const R d = R(par.d), l = par.ell, r = par.r;
        Series<R> strunc(s.begin(), s.begin() + m), wtrunc(w.begin(), w.begin() + m);
        const Series<R> ss = s_mul(strunc, strunc);
        dD1w = s_add(s_sub(s_scale(s_mul(wtrunc, wtrunc), R(3)),
                           s_scale(wtrunc, 2 * (1 + r))),
                     s_sub(s_const<R>(m, r), s_scale(ss, d)));
        dD2w = s_mul(s_scale(strunc, 1 / l),
                     s_sub(s_scale(wtrunc, 2 * (l + d - 1)), s_const<R>(m, l + d + (l - 1) * r)));
        const auto f = series_vector_field(par, strunc, wtrunc);
        // B = Delta2 / xi (Delta2 vanishes linearly along the branch)
        for (std::size_t i = 0; i + 1 < m; ++i) B[i] = f.Delta2[i + 1];
        B[m - 1] = R(0);
        A = s_sub(dD1w, s_mul(s_deriv(wtrunc), dD2w));
    }
    if (!(abs(B[0]) > sens_tol)) throw DegenerateSonicPoint("singular branch: B(0) = 0");
    // g_k = [sum_{j<k} (A - nu B)_{k-j} g_j - sum_{i=1..k-1} B_i (k-i) g_{k-i}] / (k B_0)
    const Series<R> C = s_sub(A, s_scale(B, sd.nu));
    Series<R> g = s_zero<R>(m);
    g[0] = R(1);
    for (std::size_t k = 1; k < m; ++k) {
        R acc(0);
        for (std::size_t j = 0; j < k; ++j) acc += C[k - j] * g[j];
        for (std::size_t i = 1; i < k; ++i) acc -= B[i] * R(int(k - i)) * g[k - i];
        g[k] = acc / (B[0] * R(int(k)));
    }

    SeriesExpansion<R> out;
    out.location = side;
    out.n_terms = K;
    out.leading_exponent = sd.nu;
    out.c_value = c_value;
    out.integer_tower.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.integer_tower[k].s = s[k];
        out.integer_tower[k].w = w[k];
    }
    out.nonint_tower.resize(m);
    for (std::size_t k = 0; k < m; ++k) out.nonint_tower[k].w = g[k];
    return out;
}

// Sonic expansion parameterized by zeta = Z - Z2 instead of sigma. Needed by
// collocation boundary rows, where the grid lives in Z. Smooth branch only.
// Seeds are (sigma2, s1/Z2) and (omega2, w1/Z2); higher orders by 2x2 probes
// on the Delta-multiplied flow equations with Z = Z2 + zeta.
template <class R>
SeriesExpansion<R> series_at_sonic_z(const EulerParams<R>& par, const R& Z2, int n_terms) {
    using std::abs;
    const std::size_t m = std::size_t(n_terms + 1);
    const SonicData<R> sd = sonic_data(par);
    const R sens_tol = parse_sens_tol<R>();

    Series<R> sz = s_zero<R>(m), wz = s_zero<R>(m);
    sz[0] = sd.sigma2;
    sz[1] = sd.s1 / Z2;
    wz[0] = sd.omega2;
    wz[1] = sd.w1 / Z2;
    Series<R> Zser = s_zero<R>(m);
    Zser[0] = Z2;
    Zser[1] = R(1);

    auto resid = [&](const Series<R>& s, const Series<R>& w) {
        const auto f = series_vector_field(par, s, w);
        return std::pair<Series<R>, Series<R>>(
            s_add(s_mul(f.Delta, s_mul(Zser, s_deriv(s))), f.Delta2),
            s_add(s_mul(f.Delta, s_mul(Zser, s_deriv(w))), f.Delta1));
    };

    for (std::size_t k = 2; k < m; ++k) {
        const auto base = resid(sz, wz);
        sz[k] += 1;
        const auto ps = resid(sz, wz);
        sz[k] -= 1;
        wz[k] += 1;
        const auto pw = resid(sz, wz);
        wz[k] -= 1;
        const R a11 = ps.first[k] - base.first[k], a12 = pw.first[k] - base.first[k];
        const R a21 = ps.second[k] - base.second[k], a22 = pw.second[k] - base.second[k];
        const R det = a11 * a22 - a12 * a21;
        if (!(abs(det) > sens_tol))
            throw RecursionBreakdown("sonic Z-form series: singular probe system", int(k));
        sz[k] = (-base.first[k] * a22 + base.second[k] * a12) / det;
        wz[k] = (-a11 * base.second[k] + a21 * base.first[k]) / det;
    }

    SeriesExpansion<R> out;
    out.location = ExpansionSite::SonicLeft;
    out.n_terms = n_terms;
    out.leading_exponent = sd.nu;
    out.integer_tower.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        out.integer_tower[k].s = sz[k];
        out.integer_tower[k].w = wz[k];
    }
    return out;
}

// Evaluation helpers ---------------------------------------------------------

template <class R>
PhasePoint<R> eval_origin(const SeriesExpansion<R>& e, const R& Z) {
    R S(0), W(0);
    for (std::size_t k = e.integer_tower.size(); k-- > 0;) {
        S = S * Z + e.integer_tower[k].s;
        W = W * Z + e.integer_tower[k].w;
    }
    return PhasePoint<R>{S / Z, W};
}

template <class R>
PhasePoint<R> eval_infinity(const SeriesExpansion<R>& e, const R& Z) {
    using std::pow;
    const R y = pow(Z, -e.leading_exponent);
    R S(0), W(0);
    for (std::size_t k = e.integer_tower.size(); k-- > 0;) {
        S = S * y + e.integer_tower[k].s;
        W = W * y + e.integer_tower[k].w;
    }
    return PhasePoint<R>{S, W};
}

// omega(xi) on the given side; xi must have the side's sign (xi > 0 on
// SonicLeft, the interior). The |xi|^nu branch uses the stored c_value.
template <class R>
R eval_sonic_omega(const SeriesExpansion<R>& e, const R& xi) {
    using std::abs;
    using std::pow;
    R W(0);
    for (std::size_t k = e.integer_tower.size(); k-- > 0;) W = W * xi + e.integer_tower[k].w;
    if (e.c_value != 0 && !e.nonint_tower.empty()) {
        R G(0);
        for (std::size_t k = e.nonint_tower.size(); k-- > 0;) G = G * xi + e.nonint_tower[k].w;
        W += e.c_value * pow(abs(xi), e.leading_exponent) * G;
    }
    return W;
}

}  // namespace eulerlab
