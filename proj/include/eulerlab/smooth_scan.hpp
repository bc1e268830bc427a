#pragma once

// Non-smooth coefficient extraction at the sonic point and the root searches
// that locate smooth solutions: the discrete speeds r_n (where the interior
// coefficient c_plus vanishes) and the matching kappa* (where the exterior
// c_minus vanishes, when parity allows one).
//
// The phase curve omega(sigma) near the sonic point decomposes as an integer
// tower plus c |xi|^nu g(xi), xi = sigma - sigma2. Extraction samples the
// curve by a guarded jet march from the origin (interior, canonical: delta
// only translates lnZ) or from the far field at the given kappa (exterior,
// eta likewise scales out), differentiates [nu] times via the jets, subtracts
// the analytic tower and least-squares fits the singular remainder.
//
// Two failure modes shape the design:
//  - the decomposition is a linearization in c, valid only while
//    |c| xi_max^nu stays small on the fit window; near the edges of the
//    admissible kappa window the fitted |c| grows until the outer window
//    leaves the model and its sign becomes meaningless. The window ladder
//    below shrinks the window until the fit is back inside the model, so
//    sign scans never bracket out-of-model artifacts.
//  - nu within a guard band of an integer makes the singular columns
//    degenerate against the tower columns; this surfaces as
//    IllConditionedFit (the d = 2 hazard).

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "eulerlab/errors.hpp"
#include "eulerlab/linalg.hpp"
#include "eulerlab/march.hpp"
#include "eulerlab/phase_core.hpp"
#include "eulerlab/real.hpp"
#include "eulerlab/series.hpp"

namespace eulerlab {

enum class FitSide { Plus, Minus };  // interior xi > 0 / exterior xi < 0

template <class R>
struct CoefficientFit {
    FitSide side = FitSide::Plus;
    R nu = R(0);
    int nu_int = 0;                  // [nu], the derivative order used
    R c_value = R(0);
    R a1 = R(0);                     // fitted linear coefficient, analytic + residual
    R a1_error = R(0);               // relative deviation from the analytic a1
    std::pair<R, R> fit_window{R(0), R(0)};
    int n_fit_terms = 5;
    R condition_number = R(0);       // of the column-scaled design matrix
    // Diagnostics beyond the record proper.
    R const_residual = R(0);         // |constant term| / max |rhs|, should be ~0
    R pert = R(0);                   // |c| xi_max^nu, model-validity measure
    int n_samples = 0;
    // Smoothness metrics from the same fit: relative deviation of the
    // numerically fitted tower coefficients [nu] and [nu]+1 from analytic.
    R delta_omega_m = R(0);
    R delta_omega_m1 = R(0);
};

template <class R>
struct ScanOptions {
    int jet_order = 16;        // march jets; also the per-sample derivative jets
    int sub_depth = 14;        // analytic tower subtraction depth
    int seed_terms = 14;       // origin / far-field seed series depth
    R origin_Z = R(1) / 10;    // interior entry radius
    R seed_sigma = R(1) / 10000;  // exterior entry sigma
    R march_tail_tol = R(1e-26);
    R stop_offset = R(7.5e-7);    // march goal distance from sigma2
    // Fit-window ladder, outermost first; entries are |xi| ranges.
    std::vector<std::pair<R, R>> windows{
        {R(1e-4), R(5e-3)}, {R(1e-5), R(1e-3)}, {R(1e-6), R(1e-4)}};
    R pert_max = R(1e-3);
    R const_resid_max = R(1) / 100;
    R cond_max = R(1e10);
    int min_samples = 12;
    R nu_guard = R(1) / 1000;  // integer-nu guard band
    R missed_tol = R(1) / 100; // |omega_end - omega2| beyond this: missed sonic
    R r_tol = R(1e-7);         // refinement stop in r
    R kappa_tol = R(1e-9);     // refinement stop in kappa
    R kappa_lo = R(1) / 100;   // kappa sweep grid
    R kappa_hi = R(10);
    R kappa_ratio = R(13) / 10;
};

template <class R>
R falling_factorial(const R& a, int m) {
    R out(1);
    for (int i = 0; i < m; ++i) out *= a - R(i);
    return out;
}

namespace scan_detail {

template <class R>
int int_floor(const R& x) {
    using std::floor;
    return static_cast<int>(floor(x));
}

// March the phase curve toward the sonic point and collect samples covering
// the whole window ladder.
template <class R>
MarchResult<R> curve_march(const EulerParams<R>& par, const SonicData<R>& sd,
                           FitSide side, const R& kappa, const ScanOptions<R>& opt) {
    MarchOptions<R> mo;
    mo.jet_order = opt.jet_order;
    mo.tail_tol = opt.march_tail_tol;
    mo.collect = true;
    R lo = opt.windows.front().first, hi = opt.windows.front().second;
    for (const auto& w : opt.windows) {
        lo = std::min(lo, w.first);
        hi = std::max(hi, w.second);
    }
    mo.collect_lo = lo * R(9) / 10;
    mo.collect_hi = hi * R(11) / 10;
    if (side == FitSide::Plus) {
        mo.region = MarchRegion::Interior;
        const auto org = series_at_origin(par, R(1), opt.seed_terms);
        const auto p0 = eval_origin(org, opt.origin_Z);
        return march_guarded(par, sd, p0.sigma, p0.omega,
                             sd.sigma2 + opt.stop_offset, mo);
    }
    mo.region = MarchRegion::Exterior;
    const auto tail = far_field_phase_series(par, kappa, opt.seed_terms);
    const R w0 = s_eval(tail, opt.seed_sigma);
    return march_guarded(par, sd, opt.seed_sigma, w0,
                         sd.sigma2 - opt.stop_offset, mo);
}

// One least-squares fit on a fixed window; nullopt when the window holds too
// few samples. Model in the [nu]-th derivative of omega along the curve:
//   b0 + b1 xi + ct t^(nu-m) + ct1 t^(nu-m+1) + ct2 t^(nu-m+2),  t = |xi|,
// fitted to the sampled derivative minus the analytic tower. b0 and b1 vanish
// for a perfect tower and measure the deviation of the [nu] and [nu]+1 tower
// coefficients; ct carries c up to the falling-factorial rescale and, on the
// minus side, the (-1)^m from differentiating |xi|.
template <class R>
std::optional<CoefficientFit<R>> fit_on_window(const EulerParams<R>& par,
                                               const SonicData<R>& sd,
                                               const SeriesExpansion<R>& tower,
                                               const std::vector<MarchSample<R>>& samples,
                                               FitSide side,
                                               const std::pair<R, R>& win,
                                               const ScanOptions<R>& opt) {
    using std::abs;
    using std::pow;
    using std::sqrt;
    const R nu = sd.nu;
    const int m = int_floor(nu);
    const std::size_t kmax = tower.integer_tower.size();

    std::vector<std::array<R, 5>> rows;
    std::vector<R> rhs;
    for (const auto& q : samples) {
        const R xi = q.sigma - sd.sigma2;
        const R t = abs(xi);
        if (!(t >= win.first && t <= win.second)) continue;
        const auto jets = omega_jets(par, q.sigma, q.omega, m + 2);
        const R um = falling_factorial(R(m), m) * jets[std::size_t(m)];
        R ua(0);
        for (std::size_t k = kmax; k-- > std::size_t(m);)
            ua = ua * xi + falling_factorial(R(int(k)), m) * tower.integer_tower[k].w;
        rows.push_back({R(1), xi, pow(t, nu - m), pow(t, nu - m + 1), pow(t, nu - m + 2)});
        rhs.push_back(um - ua);
    }
    const int n = int(rows.size());
    if (n < opt.min_samples) return std::nullopt;

    Mat<R> A(n, 5);
    Vec<R> b(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < 5; ++j) A(i, j) = rows[std::size_t(i)][std::size_t(j)];
        b(i) = rhs[std::size_t(i)];
    }
    // condition number of the column-scaled design, via the 5x5 Gram spectrum
    Mat<R> As = A;
    for (int j = 0; j < 5; ++j) {
        R cs(0);
        for (int i = 0; i < n; ++i) cs = std::max(cs, abs(As(i, j)));
        for (int i = 0; i < n; ++i) As(i, j) /= cs;
    }
    const Mat<R> G = As.transpose() * As;
    Eigen::SelfAdjointEigenSolver<Mat<R>> eig(G, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const R cond = sqrt(abs(ev(4)) / abs(ev(0)));

    const Mat<R> AtA = A.transpose() * A;
    const Vec<R> Atb = A.transpose() * b;
    const Vec<R> sol = lu_solve(AtA, Atb);

    R scale(0);
    for (const R& v : rhs) scale = std::max(scale, abs(v));

    CoefficientFit<R> f;
    f.side = side;
    f.nu = nu;
    f.nu_int = m;
    const R sign = (side == FitSide::Plus || m % 2 == 0) ? R(1) : R(-1);
    f.c_value = sign * sol(2) / falling_factorial(nu, m);
    const R a1_analytic = falling_factorial(R(m + 1), m) * tower.integer_tower[std::size_t(m + 1)].w;
    f.a1 = a1_analytic + sol(1);
    f.a1_error = abs(sol(1)) / abs(a1_analytic);
    f.fit_window = win;
    f.n_fit_terms = 5;
    f.condition_number = cond;
    f.const_residual = abs(sol(0)) / scale;
    f.pert = abs(f.c_value) * pow(win.second, nu);
    f.n_samples = n;
    f.delta_omega_m =
        abs(sol(0) / (falling_factorial(R(m), m) * tower.integer_tower[std::size_t(m)].w));
    // identical normalization: falling(m+1, m) == falling(m+1, m+1) == (m+1)!
    f.delta_omega_m1 = f.a1_error;
    return f;
}

}  // namespace scan_detail

enum class KappaClass { Fold, MissedSonic, OutOfModel, Fit };

// Extract c on the given side of the sonic point for the phase curve picked
// by (par, side, kappa). Walks the window ladder, outermost first, and
// returns the first fit that is inside the linearized model (pert), has a
// clean constant residual, and is well conditioned. Throws WindowExit when
// the curve never reaches the sonic point, IllConditionedFit when no window
// qualifies or nu sits in the integer guard band.
template <class R>
CoefficientFit<R> extract_c_curve(const EulerParams<R>& par, FitSide side,
                                  const R& kappa, const ScanOptions<R>& opt = {}) {
    using std::abs;
    const SonicData<R> sd = sonic_data(par);
    SeriesExpansion<R> tower;
    try {
        tower = series_at_sonic(par, ExpansionSite::SonicLeft, opt.sub_depth, R(0),
                                opt.nu_guard);
    } catch (const IntegerNuError& e) {
        throw IllConditionedFit(std::string("extract_c: ") + e.what());
    }
    const auto M = scan_detail::curve_march(par, sd, side, kappa, opt);
    if (M.status != MarchStatus::Ok)
        throw WindowExit("extract_c: trajectory folds before the sonic point");
    if (abs(M.omega - sd.omega2) > opt.missed_tol)
        throw WindowExit("extract_c: trajectory misses the sonic point");
    for (const auto& win : opt.windows) {
        const auto f = scan_detail::fit_on_window(par, sd, tower, M.samples, side, win, opt);
        if (!f) continue;
        if (f->pert <= opt.pert_max && f->const_residual <= opt.const_resid_max &&
            f->condition_number <= opt.cond_max)
            return *f;
    }
    throw IllConditionedFit("extract_c: no fit window inside the model");
}

template <class R>
CoefficientFit<R> extract_c_plus(const EulerParams<R>& par, const ScanOptions<R>& opt = {}) {
    return extract_c_curve(par, FitSide::Plus, R(0), opt);
}

template <class R>
CoefficientFit<R> extract_c_minus(const EulerParams<R>& par, const R& kappa,
                                  const ScanOptions<R>& opt = {}) {
    return extract_c_curve(par, FitSide::Minus, kappa, opt);
}

// nu as a function of r at fixed (d, ell); monotone increasing up to the
// critical speed, where it diverges.
template <class R>
R nu_of_r(int d, const R& ell, const R& r) {
    EulerParams<R> par;
    par.d = d;
    par.ell = ell;
    par.r = r;
    return sonic_data(par).nu;
}

// Invert nu(r) = target by bisection. NoSignChange when the target is not
// bracketed inside (1, r_crit).
template <class R>
R solve_r_for_nu(int d, const R& ell, const R& target) {
    const auto cs = critical_speed(d, ell);
    const R lo = R(1) + R(1e-9);
    R hi = std::min(cs.r_star, cs.r_plus) - R(1e-9);
    const R f_lo = nu_of_r(d, ell, lo) - target;
    R f_hi(0);
    bool have_hi = false;
    // the sonic point can degenerate right at the cap; back off until it exists
    for (int tries = 0; tries < 60 && !have_hi; ++tries) {
        try {
            f_hi = nu_of_r(d, ell, hi) - target;
            have_hi = true;
        } catch (const DegenerateSonicPoint&) {
            hi = lo + (hi - lo) * R(9) / 10;
        }
    }
    if (!have_hi || !(f_lo < 0 && f_hi > 0))
        throw NoSignChange("solve_r_for_nu: target outside (1, r_crit) range");
    for (int it = 0; it < 200 && hi - lo > R(1e-30); ++it) {
        const R mid = (lo + hi) / 2;
        if (nu_of_r(d, ell, mid) - target > 0)
            hi = mid;
        else
            lo = mid;
    }
    return (lo + hi) / 2;
}

namespace scan_detail {

// Bracketed secant with bisection fallback on a sign-changing scalar map.
// Returns the |f|-weighted average of the final bracket endpoints.
template <class R, class F>
R refine_bracket(F&& f, R xa, R fa, R xb, R fb, const R& xtol) {
    using std::abs;
    for (int it = 0; it < 80 && abs(xb - xa) > xtol; ++it) {
        R x = xb - fb * (xb - xa) / (fb - fa);
        const R lo = std::min(xa, xb), hi = std::max(xa, xb);
        const R gap = (hi - lo) / 16;
        if (!(x >= lo + gap && x <= hi - gap)) x = (xa + xb) / 2;
        const R fx = f(x);
        if ((fx > 0) == (fa > 0)) {
            xa = x;
            fa = fx;
        } else {
            xb = x;
            fb = fx;
        }
    }
    return (xa * abs(fb) + xb * abs(fa)) / (abs(fa) + abs(fb));
}

}  // namespace scan_detail

template <class R>
struct SignSample {
    R at;      // r (c_plus scans) or kappa (c_minus scans)
    int sign;  // of the fitted c
};

template <class R>
struct SmoothRoot {
    int n = 0;  // [nu] on the root's interval
    R r = R(0);
    bool kappa_scanned = false;
    bool kappa_zero_found = false;        // the parity bookkeeping entry
    std::optional<R> kappa_star;
    std::optional<std::pair<R, R>> accuracy;  // (delta_omega_[nu], delta_omega_[nu]+1)
};

template <class R>
struct ScanResult {
    int d = 0;
    R ell = R(0);
    std::vector<SmoothRoot<R>> roots;         // ordered by r
    std::vector<SignSample<R>> sign_samples;  // every (r, sign c_plus) sampled
};

// Scan c_plus(r) over the r-intervals where [nu] equals each integer in
// [nu_int_window.first, nu_int_window.second], bracket its sign changes and
// refine them to r_tol. Intervals with no sign change contribute samples but
// no root; that outcome is recorded, not an error.
template <class R>
ScanResult<R> find_r_n(int d, const R& ell, std::pair<int, int> nu_int_window,
                       int resolution, const ScanOptions<R>& opt = {}) {
    ScanResult<R> out;
    out.d = d;
    out.ell = ell;
    EulerParams<R> par;
    par.d = d;
    par.ell = ell;
    auto cplus = [&](const R& r) {
        EulerParams<R> p = par;
        p.r = r;
        return extract_c_plus(p, opt).c_value;
    };
    for (int n = nu_int_window.first; n <= nu_int_window.second; ++n) {
        std::vector<std::pair<R, R>> samp;
        for (int j = 0; j < resolution; ++j) {
            const R nuj = R(n) + opt.nu_guard +
                          (R(j) + R(1) / 2) / resolution * (R(1) - 2 * opt.nu_guard);
            const R rj = solve_r_for_nu(d, ell, nuj);
            const R cj = cplus(rj);
            samp.emplace_back(rj, cj);
            out.sign_samples.push_back({rj, cj > 0 ? 1 : -1});
        }
        for (std::size_t j = 0; j + 1 < samp.size(); ++j) {
            const auto& [ra, ca] = samp[j];
            const auto& [rb, cb] = samp[j + 1];
            if ((ca > 0) == (cb > 0)) continue;
            SmoothRoot<R> root;
            root.n = n;
            root.r = scan_detail::refine_bracket(cplus, ra, ca, rb, cb, opt.r_tol);
            out.roots.push_back(root);
        }
    }
    return out;
}

// Sweep kappa over a geometric grid, classify each trajectory, fit c_minus
// on the admissible stretch and refine a bracketed zero when one exists.
// Because every accepted fit is inside the linearized model, sign changes
// caused by out-of-model fit breakdown near the window edges never form
// brackets. Returns nullopt when no sign change exists (the parity-excluded
// case); throws WindowExit when no kappa on the grid reaches the sonic point.
template <class R>
std::optional<R> find_kappa_star(int d, const R& ell, const R& r_n,
                                 const ScanOptions<R>& opt = {},
                                 std::vector<SignSample<R>>* trace = nullptr) {
    using std::abs;
    using std::floor;
    EulerParams<R> par;
    par.d = d;
    par.ell = ell;
    par.r = r_n;
    // near-integer nu makes every fit degenerate; abort the scan as a whole
    const R nu = sonic_data(par).nu;
    if (abs(nu - floor(nu + R(1) / 2)) < opt.nu_guard)
        throw IllConditionedFit("find_kappa_star: nu within guard band of an integer");
    struct Node {
        R kappa;
        KappaClass cls;
        R c;
    };
    std::vector<Node> nodes;
    int n_ok = 0;
    for (R k = opt.kappa_lo; k <= opt.kappa_hi; k *= opt.kappa_ratio) {
        Node nd{k, KappaClass::Fold, R(0)};
        try {
            const auto f = extract_c_minus(par, k, opt);
            nd.cls = KappaClass::Fit;
            nd.c = f.c_value;
            ++n_ok;
            if (trace) trace->push_back({k, f.c_value > 0 ? 1 : -1});
        } catch (const WindowExit&) {
            nd.cls = KappaClass::MissedSonic;  // fold or miss; both inadmissible
        } catch (const IllConditionedFit&) {
            nd.cls = KappaClass::OutOfModel;  // unmeasurable point, not a bracket end
        }
        nodes.push_back(nd);
    }
    if (n_ok == 0)
        throw WindowExit("find_kappa_star: no admissible kappa on the sweep grid");
    auto cminus = [&](const R& k) { return extract_c_minus(par, k, opt).c_value; };
    for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
        const auto& a = nodes[j];
        const auto& b = nodes[j + 1];
        if (a.cls != KappaClass::Fit || b.cls != KappaClass::Fit) continue;
        if ((a.c > 0) == (b.c > 0)) continue;
        return scan_detail::refine_bracket(cminus, a.kappa, a.c, b.kappa, b.c,
                                           opt.kappa_tol);
    }
    return std::nullopt;
}

template <class R>
struct SmoothnessReport {
    int nu_int = 0;
    R delta_nu_int = R(0);     // max over the two sides
    R delta_nu_int_p1 = R(0);
    CoefficientFit<R> plus;
    CoefficientFit<R> minus;
};

// Accuracy record for a candidate smooth solution (r at a c_plus root, kappa
// at the matching c_minus zero): how far the numerically fitted tower
// coefficients [nu] and [nu]+1 deviate from the analytic recursion, measured
// on both sides with a tighter window and deeper jets than the sign scans.
template <class R>
SmoothnessReport<R> smoothness_report(int d, const R& ell, const R& r, const R& kappa,
                                      const ScanOptions<R>& opt = {}) {
    ScanOptions<R> so = opt;
    so.windows = {{R(3e-5), R(3e-3)}};
    so.jet_order = 18;
    // the candidate's c is ~0, so the model-validity gate is irrelevant here,
    // but the conditioning and residual gates still apply
    EulerParams<R> par;
    par.d = d;
    par.ell = ell;
    par.r = r;
    SmoothnessReport<R> rep;
    rep.plus = extract_c_plus(par, so);
    rep.minus = extract_c_minus(par, kappa, so);
    rep.nu_int = rep.plus.nu_int;
    rep.delta_nu_int = std::max(rep.plus.delta_omega_m, rep.minus.delta_omega_m);
    rep.delta_nu_int_p1 = std::max(rep.plus.delta_omega_m1, rep.minus.delta_omega_m1);
    return rep;
}

}  // namespace eulerlab
