#pragma once

// Chebyshev-Gauss-Lobatto collocation grids on an interval [Z_lo, Z_hi],
// differentiation matrices in the physical variable, and barycentric
// interpolation.  The reference variable is x_n = cos(pi n / N), descending
// from +1 to -1; the map to Z is orientation-reversing, so nodes_Z ascends
// with the same index order.
//
// Two maps are supported: plain affine, and an exponential clustering map
//   s = (e^(beta u) - 1)/(e^beta - 1),  u = (1 - x)/2,  Z = Z_lo + (Z_hi - Z_lo) s,
// which compresses node spacing near Z_lo by a factor ~ beta/(e^beta - 1)
// while keeping dZ/dx bounded away from zero (a pure power stretch would not).

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "eulerlab/linalg.hpp"
#include "eulerlab/real.hpp"

namespace eulerlab {

enum class GridMap { Affine, ExpCluster };

template <class R>
struct CollocationGrid {
    int interval_id = 1;          // 1: origin-to-sonic, 2: sonic-to-far-field
    int N = 0;                    // polynomial order; N+1 nodes
    std::vector<R> nodes_x;       // cos(pi n / N), descending
    std::vector<R> nodes_Z;       // mapped nodes, ascending
    R Z_lo = R(0), Z_hi = R(0);
    GridMap map = GridMap::Affine;
    R beta = R(0);                // ExpCluster strength

    R map_s(const R& u) const {   // interval fraction as a function of u = (1-x)/2
        using std::expm1;
        if (map == GridMap::Affine) return u;
        return expm1(beta * u) / expm1(beta);
    }
    R map_ds_du(const R& u) const {
        using std::exp;
        using std::expm1;
        if (map == GridMap::Affine) return R(1);
        return beta * exp(beta * u) / expm1(beta);
    }
    R map_u_of_s(const R& s) const {
        using std::expm1;
        using std::log1p;
        if (map == GridMap::Affine) return s;
        return log1p(expm1(beta) * s) / beta;
    }
    R Z_of_x(const R& x) const {
        return Z_lo + (Z_hi - Z_lo) * map_s((1 - x) / 2);
    }
    R x_of_Z(const R& Z) const {
        return 1 - 2 * map_u_of_s((Z - Z_lo) / (Z_hi - Z_lo));
    }
    // dZ/dx at a node; negative (the x grid descends as Z ascends).
    R dZ_dx(const R& x) const {
        return -(Z_hi - Z_lo) / 2 * map_ds_du((1 - x) / 2);
    }
};

template <class R>
CollocationGrid<R> build_grid(int interval_id, const R& Z_lo, const R& Z_hi, int N,
                              GridMap map = GridMap::Affine, const R& beta = R(0)) {
    using std::acos;
    using std::cos;
    if (!(Z_hi > Z_lo)) throw std::domain_error("build_grid: Z_hi <= Z_lo");
    if (N < 2) throw std::domain_error("build_grid: N < 2");
    if (map == GridMap::ExpCluster && !(beta > 0))
        throw std::domain_error("build_grid: ExpCluster needs beta > 0");

    CollocationGrid<R> g;
    g.interval_id = interval_id;
    g.N = N;
    g.Z_lo = Z_lo;
    g.Z_hi = Z_hi;
    g.map = map;
    g.beta = beta;
    g.nodes_x.resize(std::size_t(N) + 1);
    const R pi = acos(R(-1));
    // Exact endpoints and an exactly antisymmetric interior: compute the upper
    // half and mirror, pinning the midpoint of an even grid to zero.
    g.nodes_x[0] = R(1);
    g.nodes_x[std::size_t(N)] = R(-1);
    for (int n = 1; n <= N / 2; ++n) g.nodes_x[std::size_t(n)] = cos(pi * n / N);
    if (N % 2 == 0) g.nodes_x[std::size_t(N / 2)] = R(0);
    for (int n = N / 2 + 1; n < N; ++n)
        g.nodes_x[std::size_t(n)] = -g.nodes_x[std::size_t(N - n)];

    g.nodes_Z.resize(std::size_t(N) + 1);
    for (int n = 0; n <= N; ++n) g.nodes_Z[std::size_t(n)] = g.Z_of_x(g.nodes_x[std::size_t(n)]);
    g.nodes_Z[0] = Z_lo;            // map endpoints exactly
    g.nodes_Z[std::size_t(N)] = Z_hi;
    return g;
}

// I1 = [0, Zp1] affine, I2 = [Zp1, Zp2] optionally clustered toward Zp1.
template <class R>
std::pair<CollocationGrid<R>, CollocationGrid<R>> build_grids(const R& Zp1, const R& Zp2,
                                                              int N1, int N2,
                                                              const R& cluster_beta = R(0)) {
    if (!(Zp1 > 0 && Zp2 > Zp1)) throw std::domain_error("build_grids: need 0 < Zp1 < Zp2");
    auto g1 = build_grid(1, R(0), Zp1, N1);
    auto g2 = (cluster_beta > 0)
                  ? build_grid(2, Zp1, Zp2, N2, GridMap::ExpCluster, cluster_beta)
                  : build_grid(2, Zp1, Zp2, N2);
    return {std::move(g1), std::move(g2)};
}

template <class R>
struct DifferentiationMatrix {
    int order = 1;
    Mat<R> D;      // acts on nodal values in the grid's index order
};

// First-derivative collocation matrix in the physical variable Z.
template <class R>
DifferentiationMatrix<R> diff_matrix(const CollocationGrid<R>& g) {
    const int N = g.N;
    const int n1 = N + 1;
    Mat<R> Dx(n1, n1);
    auto cw = [&](int i) { return (i == 0 || i == N) ? R(2) : R(1); };
    for (int i = 0; i <= N; ++i) {
        for (int j = 0; j <= N; ++j) {
            if (i == j) continue;
            const R sign = ((i + j) % 2 == 0) ? R(1) : R(-1);
            Dx(i, j) = (cw(i) / cw(j)) * sign /
                       (g.nodes_x[std::size_t(i)] - g.nodes_x[std::size_t(j)]);
        }
    }
    // Diagonal by the negative-sum trick: constants then differentiate to a
    // clean zero instead of a catastrophically cancelled one.  The values it
    // produces agree with the closed forms (2N^2+1)/6 and -x_j/(2(1-x_j^2))
    // to roundoff.
    for (int i = 0; i <= N; ++i) {
        R acc(0);
        for (int j = 0; j <= N; ++j)
            if (j != i) acc += Dx(i, j);
        Dx(i, i) = -acc;
    }
    DifferentiationMatrix<R> out;
    out.order = 1;
    out.D = Dx;
    for (int i = 0; i <= N; ++i) {
        const R scale = 1 / g.dZ_dx(g.nodes_x[std::size_t(i)]);
        for (int j = 0; j <= N; ++j) out.D(i, j) *= scale;
    }
    return out;
}

template <class R>
DifferentiationMatrix<R> diff_matrix(const CollocationGrid<R>& g, int order) {
    if (order < 1) throw std::domain_error("diff_matrix: order < 1");
    DifferentiationMatrix<R> d1 = diff_matrix(g);
    DifferentiationMatrix<R> out = d1;
    for (int k = 1; k < order; ++k) {
        out.D = out.D * d1.D;
        ++out.order;
    }
    return out;
}

// Barycentric evaluation of the interpolant through (nodes_Z, values) at Z.
// Exact nodal reproduction: a zero denominator factor short-circuits to the
// nodal value.
template <class R>
R barycentric_eval(const CollocationGrid<R>& g, const std::vector<R>& values, const R& Z) {
    const int N = g.N;
    if (int(values.size()) != N + 1)
        throw std::invalid_argument("barycentric_eval: values size mismatch");
    for (int n = 0; n <= N; ++n)
        if (Z == g.nodes_Z[std::size_t(n)]) return values[std::size_t(n)];
    const R x = g.x_of_Z(Z);
    R num(0), den(0);
    for (int n = 0; n <= N; ++n) {
        const R diff = x - g.nodes_x[std::size_t(n)];
        if (diff == 0) return values[std::size_t(n)];
        R w = (n % 2 == 0) ? R(1) : R(-1);
        if (n == 0 || n == N) w /= 2;
        const R q = w / diff;
        num += q * values[std::size_t(n)];
        den += q;
    }
    return num / den;
}

}  // namespace eulerlab
