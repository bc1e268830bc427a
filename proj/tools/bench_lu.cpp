// Timing sanity for multiprecision dense solves at collocation sizes.
#include <chrono>
#include <cstdio>

#include "eulerlab/linalg.hpp"
#include "eulerlab/real.hpp"

using namespace eulerlab;

template <class R>
static double bench(int n, int reps) {
    Mat<R> A(n, n);
    Vec<R> b(n);
    // deterministic well-conditioned fill
    R x(1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            x = x * R(1103515245) + R(12345);
            x = x - floor(x / R(2147483648)) * R(2147483648);
            A(i, j) = x / R(2147483648) + (i == j ? R(n) : R(0));
        }
        b(i) = R(i + 1);
    }
    auto t0 = std::chrono::steady_clock::now();
    Vec<R> sol;
    for (int k = 0; k < reps; ++k) sol = lu_solve(A, b);
    auto t1 = std::chrono::steady_clock::now();
    (void)sol;
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

int main() {
    for (int n : {100, 200, 400}) {
        const double t50 = bench<real50>(n, n <= 200 ? 3 : 1);
        std::printf("real50  n=%4d  %.3f s/solve\n", n, t50);
    }
    const double t100 = bench<real100>(200, 1);
    std::printf("real100 n= 200  %.3f s/solve\n", t100);
    return 0;
}
