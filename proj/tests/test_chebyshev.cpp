#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "eulerlab/chebyshev.hpp"
#include "eulerlab/real.hpp"

using namespace eulerlab;
using R = real50;

namespace {

R rl(const char* s) { return parse_real<R>(s); }

bool close_abs(const R& a, const R& b, const R& tol) {
    using std::abs;
    return abs(a - b) <= tol;
}

bool close_rel(const R& a, const R& b, const R& tol) {
    using std::abs;
    return abs(a - b) <= tol * abs(b);
}

std::vector<R> sample(const CollocationGrid<R>& g, R (*f)(const R&)) {
    std::vector<R> v;
    v.reserve(g.nodes_Z.size());
    for (const auto& Z : g.nodes_Z) v.push_back(f(Z));
    return v;
}

}  // namespace

TEST_CASE("gauss-lobatto nodes, N=4 on [0,1]") {
    auto g = build_grid(1, R(0), R(1), 4);
    REQUIRE(g.nodes_Z.size() == 5);
    using std::acos;
    using std::cos;
    const R c = cos(acos(R(-1)) / 4);  // cos(pi/4)
    CHECK(g.nodes_Z[0] == R(0));
    CHECK(close_abs(g.nodes_Z[1], (1 - c) / 2, rl("1e-49")));
    CHECK(close_abs(g.nodes_Z[2], R(1) / 2, rl("1e-49")));
    CHECK(close_abs(g.nodes_Z[3], (1 + c) / 2, rl("1e-49")));
    CHECK(g.nodes_Z[4] == R(1));
    for (std::size_t i = 0; i + 1 < g.nodes_Z.size(); ++i)
        CHECK(g.nodes_Z[i] < g.nodes_Z[i + 1]);
    // x grid antisymmetric by construction
    CHECK(g.nodes_x[1] == -g.nodes_x[3]);
    CHECK(g.nodes_x[2] == R(0));
}

TEST_CASE("grid input validation") {
    CHECK_THROWS_AS(build_grid(1, R(1), R(1), 8), std::domain_error);
    CHECK_THROWS_AS(build_grid(1, R(0), R(1), 1), std::domain_error);
    CHECK_THROWS_AS(build_grid(2, R(0), R(1), 8, GridMap::ExpCluster, R(0)), std::domain_error);
    CHECK_THROWS_AS(build_grids(R(0), R(1), 8, 8), std::domain_error);
    CHECK_THROWS_AS(build_grids(R(2), R(1), 8, 8), std::domain_error);
}

TEST_CASE("differentiation of constants and row sums") {
    for (int N : {8, 21}) {
        auto g = build_grid(1, rl("0.3"), rl("2.7"), N);
        auto D = diff_matrix(g);
        // constants differentiate to zero at 10^-(p-3) with p working digits
        const R tol = rl("1e-47");
        for (int i = 0; i <= N; ++i) {
            R rowsum(0);
            for (int j = 0; j <= N; ++j) rowsum += D.D(i, j);
            CHECK(close_abs(rowsum, R(0), tol));
        }
        // negative-sum diagonal must still match the closed forms
        const R scale = (rl("2.7") - rl("0.3")) / 2;
        const R corner = (R(2) * N * N + 1) / 6 / scale;
        CHECK(close_rel(D.D(0, 0), -corner, rl("1e-44")));
        CHECK(close_rel(D.D(N, N), corner, rl("1e-44")));
        for (int j = 1; j < N; ++j) {
            const R xj = g.nodes_x[std::size_t(j)];
            if (xj == R(0)) {
                CHECK(close_abs(D.D(j, j), R(0), rl("1e-44")));
                continue;
            }
            const R diag = xj / (2 * (1 - xj * xj)) / scale;
            CHECK(close_rel(D.D(j, j), diag, rl("1e-42")));
        }
    }
}

TEST_CASE("polynomial exactness on the affine map") {
    auto g = build_grid(1, R(0), R(1), 12);
    auto D1 = diff_matrix(g);
    auto D2 = diff_matrix(g, 2);
    CHECK(D2.order == 2);

    auto fsq = sample(g, +[](const R& Z) { return Z * Z; });
    auto fcu = sample(g, +[](const R& Z) { return Z * Z * Z; });
    for (int i = 0; i <= g.N; ++i) {
        R d1(0), d2(0);
        for (int j = 0; j <= g.N; ++j) {
            d1 += D1.D(i, j) * fsq[std::size_t(j)];
            d2 += D2.D(i, j) * fcu[std::size_t(j)];
        }
        CHECK(close_abs(d1, 2 * g.nodes_Z[std::size_t(i)], rl("1e-45")));
        CHECK(close_abs(d2, 6 * g.nodes_Z[std::size_t(i)], rl("1e-43")));
    }
}

TEST_CASE("spectral accuracy of the derivative on a smooth function") {
    // f = exp(Z) on [0,1]; error should collapse geometrically as N doubles.
    using std::abs;
    using std::exp;
    R err[2];
    int idx = 0;
    for (int N : {16, 32}) {
        auto g = build_grid(1, R(0), R(1), N);
        auto D = diff_matrix(g);
        auto f = sample(g, +[](const R& Z) { return exp(Z); });
        R worst(0);
        for (int i = 0; i <= N; ++i) {
            R d(0);
            for (int j = 0; j <= N; ++j) d += D.D(i, j) * f[std::size_t(j)];
            const R e = abs(d - exp(g.nodes_Z[std::size_t(i)]));
            if (e > worst) worst = e;
        }
        err[idx++] = worst;
    }
    CHECK(err[0] < rl("1e-12"));
    CHECK(err[1] < rl("1e-30"));
    CHECK(err[1] < err[0] * rl("1e-10"));
}

TEST_CASE("barycentric interpolation") {
    auto g = build_grid(1, rl("0.5"), rl("3.5"), 10);
    // degree-10 polynomial: reproduce everywhere to roundoff
    auto poly = [](const R& Z) {
        R acc(0);
        for (int k = 10; k >= 0; --k) acc = acc * Z + R(k + 1);
        return acc;
    };
    std::vector<R> vals;
    for (const auto& Z : g.nodes_Z) vals.push_back(poly(Z));

    SUBCASE("nodal values exactly") {
        for (std::size_t n = 0; n < g.nodes_Z.size(); ++n)
            CHECK(barycentric_eval(g, vals, g.nodes_Z[n]) == vals[n]);
    }
    SUBCASE("off-node polynomial reproduction") {
        for (const char* zs : {"0.61", "1.1", "1.9", "2.515", "3.49"}) {
            const R Z = rl(zs);
            const R p = barycentric_eval(g, vals, Z);
            CHECK(close_abs(p, poly(Z), rl("1e-42") * (1 + abs(poly(Z)))));
        }
    }
    SUBCASE("smooth-function interpolation converges geometrically") {
        using std::abs;
        using std::exp;
        R errs[2];
        int idx = 0;
        for (int N : {12, 24}) {
            auto gg = build_grid(1, R(0), R(2), N);
            std::vector<R> fv;
            for (const auto& Z : gg.nodes_Z) fv.push_back(exp(-Z));
            R worst(0);
            for (int k = 0; k < 40; ++k) {
                const R Z = R(2) * R(2 * k + 1) / R(80);
                const R e = abs(barycentric_eval(gg, fv, Z) - exp(-Z));
                if (e > worst) worst = e;
            }
            errs[idx++] = worst;
        }
        CHECK(errs[1] < errs[0] * rl("1e-8"));
    }
}

TEST_CASE("exponential clustering map") {
    const R beta = rl("4");
    auto g = build_grid(2, R(1), R(5), 48, GridMap::ExpCluster, beta);
    REQUIRE(g.nodes_Z.size() == 49);
    CHECK(g.nodes_Z[0] == R(1));
    CHECK(g.nodes_Z[48] == R(5));
    for (std::size_t i = 0; i + 1 < g.nodes_Z.size(); ++i)
        CHECK(g.nodes_Z[i] < g.nodes_Z[i + 1]);
    // clustering toward Z_lo: first gap far smaller than the affine first gap
    auto ga = build_grid(2, R(1), R(5), 48);
    CHECK(g.nodes_Z[1] - g.nodes_Z[0] < (ga.nodes_Z[1] - ga.nodes_Z[0]) / 3);

    // chain rule: derivative of a smooth function still spectrally accurate
    using std::abs;
    using std::exp;
    auto D = diff_matrix(g);
    std::vector<R> f;
    for (const auto& Z : g.nodes_Z) f.push_back(exp(-Z / 2));
    R worst(0);
    for (int i = 0; i <= g.N; ++i) {
        R d(0);
        for (int j = 0; j <= g.N; ++j) d += D.D(i, j) * f[std::size_t(j)];
        const R e = abs(d + exp(-g.nodes_Z[std::size_t(i)] / 2) / 2);
        if (e > worst) worst = e;
    }
    CHECK(worst < rl("1e-12"));

    // inverse map round-trips off-node points
    for (const char* zs : {"1.002", "1.7", "4.2"}) {
        const R Z = rl(zs);
        CHECK(close_abs(g.Z_of_x(g.x_of_Z(Z)), Z, rl("1e-45")));
    }

    // interpolation respects the map (degree-1 data is linear in Z only under
    // the affine map, so use nodal samples of the map itself)
    std::vector<R> zvals(g.nodes_Z);
    for (const char* zs : {"1.01", "2.3", "4.9"}) {
        const R Z = rl(zs);
        CHECK(close_abs(barycentric_eval(g, zvals, Z), Z, rl("1e-25")));
    }
}

TEST_CASE("build_grids pairs the intervals") {
    auto [g1, g2] = build_grids(rl("1.27"), rl("25.4"), 16, 20, rl("3"));
    CHECK(g1.interval_id == 1);
    CHECK(g2.interval_id == 2);
    CHECK(g1.Z_lo == R(0));
    CHECK(g1.Z_hi == rl("1.27"));
    CHECK(g2.Z_lo == rl("1.27"));
    CHECK(g2.Z_hi == rl("25.4"));
    CHECK(g2.map == GridMap::ExpCluster);
    auto [a1, a2] = build_grids(rl("1.27"), rl("25.4"), 16, 20);
    CHECK(a2.map == GridMap::Affine);
    CHECK(a1.nodes_Z.back() == a2.nodes_Z.front());
}
