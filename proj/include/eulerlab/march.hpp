#pragma once

// Taylor marching of profile trajectories in the phase plane, with sigma as
// the independent variable: d(omega)/d(sigma) = Delta1/Delta2 away from the
// sonic line, and d(lnZ)/d(sigma) = -Delta/Delta2 when the Z-frame is needed.
//
// Each step expands (omega, lnZ) as jets in (sigma - sigma_current) and
// evaluates them at a guarded step h.  A step is accepted only when
//   (a) the evaluated displacement |omega(h) - omega(0)| stays below a cap
//       (the jet polynomial of a folding trajectory otherwise evaluates to a
//       plausible-looking value far past the fold),
//   (b) the jet tail terms at h are below tail_tol (the displacement caps
//       bound the step size, not the error; along a near-tangency with the
//       Delta2 = 0 curve the jet radius collapses far below the caps and an
//       uncontrolled march silently loses ~1e-3), and
//   (c) the endpoint stays inside the admissible wedge for the region
//       (exterior: Delta > 0 and Delta2 > 0, interior: both negative).
// On failure h halves; a floor on h classifies the trajectory as folded
// (it ran into the sonic line away from the sonic point).

#include <vector>

#include "eulerlab/phase_core.hpp"
#include "eulerlab/real.hpp"
#include "eulerlab/series.hpp"

namespace eulerlab {

// Taylor coefficients of omega(sigma) along the flow at (s0, w0):
// out[k] = omega^(k)(s0)/k!.  The residual R = Delta2*omega' - Delta1 at
// order k-1 is sensitive to out[k] with weight exactly k*Delta2(0), so one
// residual evaluation per order suffices.
template <class R>
Series<R> omega_jets(const EulerParams<R>& par, const R& s0, const R& w0, int K) {
    const int n = K + 1;
    Series<R> s = s_zero<R>(n);
    s[0] = s0;
    if (n > 1) s[1] = R(1);
    Series<R> w = s_zero<R>(n);
    w[0] = w0;
    for (int k = 1; k <= K; ++k) {
        const auto f = series_vector_field(par, s, w);
        const Series<R> wp = s_deriv(w);
        const Series<R> res = s_sub(s_mul(f.Delta2, wp), f.Delta1);
        w[std::size_t(k)] = -res[std::size_t(k - 1)] / (R(k) * f.Delta2[0]);
    }
    return w;
}

// lnZ as a Taylor series in (sigma - s0) along a trajectory jet w (from
// omega_jets at the same point): x' = -Delta/Delta2, constant term zero.
template <class R>
Series<R> x_jet(const EulerParams<R>& par, const R& s0, const Series<R>& w) {
    const int n = int(w.size());
    Series<R> s = s_zero<R>(std::size_t(n));
    s[0] = s0;
    if (n > 1) s[1] = R(1);
    const auto f = series_vector_field(par, s, w);
    const Series<R> xp = s_scale(s_mul(f.Delta, s_recip(f.Delta2)), R(-1));
    return s_integrate(xp);
}

enum class MarchRegion { Interior, Exterior };
enum class MarchStatus { Ok, Fold, Blowup };

inline const char* to_string(MarchStatus st) {
    switch (st) {
        case MarchStatus::Ok: return "ok";
        case MarchStatus::Fold: return "fold";
        default: return "blowup";
    }
}

template <class R>
struct MarchSample {
    R sigma, omega;
    R x;  // lnZ; meaningful only when the march tracks it
};

template <class R>
struct MarchOptions {
    int jet_order = 14;
    MarchRegion region = MarchRegion::Exterior;
    bool track_x = false;
    R x_start = R(0);
    bool collect = false;          // record samples with |sigma - sigma2| in window
    R collect_lo = R(0);
    R collect_hi = R(0);
    // Per-step cap on |d lnZ|.  x(sigma) has a logarithmic singularity at the
    // tail (sigma -> 0) and steep stretches where Delta2 dips, and the x jets
    // lose accuracy when one step crosses a sizable fraction of either; 0.1
    // keeps the per-step truncation near 1e-15 at jet order 14.
    R x_disp_cap = R(1) / 10;
    // Truncation control: the top two jet terms evaluated at h must stay below
    // tail_tol * (1 + |omega|) (and below tail_tol outright for lnZ).  Zero
    // disables the check and leaves only the displacement caps.
    R tail_tol = R(1e-22);
};

template <class R>
struct MarchResult {
    R sigma = R(0), omega = R(0);
    R x = R(0);
    MarchStatus status = MarchStatus::Ok;
    int nstep = 0;
    R min_abs_delta2 = R(0);       // smallest |Delta2| seen; a fold stops near 0
    std::vector<MarchSample<R>> samples;
};

template <class R>
MarchResult<R> march_guarded(const EulerParams<R>& par, const SonicData<R>& sd,
                             const R& s_start, const R& w_start, const R& s_goal,
                             const MarchOptions<R>& opt = MarchOptions<R>{}) {
    using std::abs;
    using std::isfinite;
    using std::pow;

    const R s2 = sd.sigma2;
    const R wedge_sign = (opt.region == MarchRegion::Exterior) ? R(1) : R(-1);
    const R cap_frac = R(6) / 100;        // step fraction of |sigma - sigma2|
    const R disp_cap = R(5) / 100;        // accepted |omega| displacement per step
    const R tiny = parse_real<R>("1e-30");
    const R h_floor = parse_real<R>("1e-18");

    MarchResult<R> out;
    R s = s_start, w = w_start;
    R x = opt.track_x ? opt.x_start : R(0);
    bool have_min = false;
    const R direction = (s_goal > s) ? R(1) : R(-1);

    while ((s_goal - s) * direction > 0) {
        const auto f = vector_field(PhasePoint<R>{s, w}, par);
        if (!isfinite(w)) {
            out.status = MarchStatus::Blowup;
            break;
        }
        if (!(wedge_sign * f.Delta > 0) || !(wedge_sign * f.Delta2 > 0)) {
            out.status = MarchStatus::Fold;
            break;
        }
        const R ad2 = abs(f.Delta2);
        if (!have_min || ad2 < out.min_abs_delta2) {
            out.min_abs_delta2 = ad2;
            have_min = true;
        }

        const Series<R> wj = omega_jets(par, s, w, opt.jet_order);
        const R xi = s - s2;
        R h = abs(xi) * cap_frac;
        if (R(2) / 5 * s < h) h = R(2) / 5 * s;
        if (R(1) / 20 * (s + 1) < h) h = R(1) / 20 * (s + 1);
        if (abs(s_goal - s) < h) h = abs(s_goal - s);
        R cap_w = (R(1) / 50) * (1 + abs(w)) / (abs(wj[1]) + tiny);
        if (cap_w < h) h = cap_w;
        h *= direction;

        const Series<R> xj = opt.track_x ? x_jet(par, s, wj) : Series<R>{};
        bool ok = false;
        R w_try(0);
        for (int attempt = 0; attempt < 80; ++attempt) {
            w_try = s_eval(wj, h);
            bool acc = isfinite(w_try) && abs(w_try - w) <= disp_cap * (1 + abs(w)) &&
                       (!opt.track_x || abs(s_eval(xj, h)) <= opt.x_disp_cap);
            if (acc && opt.tail_tol > 0) {
                const R ah = abs(h);
                const std::size_t kw = wj.size() - 1;
                const R hpw = pow(ah, int(kw) - 1);
                acc = (abs(wj[kw]) * ah + abs(wj[kw - 1])) * hpw <= opt.tail_tol * (1 + abs(w));
                if (acc && opt.track_x) {
                    const std::size_t kx = xj.size() - 1;
                    const R hpx = pow(ah, int(kx) - 1);
                    acc = (abs(xj[kx]) * ah + abs(xj[kx - 1])) * hpx <= opt.tail_tol;
                }
            }
            if (acc) {
                const auto ft = vector_field(PhasePoint<R>{s + h, w_try}, par);
                if (wedge_sign * ft.Delta > 0 && wedge_sign * ft.Delta2 > 0) {
                    ok = true;
                    break;
                }
            }
            h /= 2;
        }
        if (!ok || abs(h) < h_floor) {
            out.status = MarchStatus::Fold;
            break;
        }
        if (opt.track_x) x += s_eval(xj, h);
        w = w_try;
        s = s + h;
        ++out.nstep;
        if (opt.collect) {
            const R dist = abs(s - s2);
            if (opt.collect_lo <= dist && dist <= opt.collect_hi)
                out.samples.push_back(MarchSample<R>{s, w, x});
        }
    }
    out.sigma = s;
    out.omega = w;
    out.x = x;
    return out;
}

}  // namespace eulerlab
