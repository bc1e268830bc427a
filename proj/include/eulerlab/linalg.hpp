#pragma once

// Dense linear algebra over the extended-precision scalars.  Eigen supplies
// the containers and LU; the boost.multiprecision interop header wires the
// scalar traits.  Solves deliberately use full pivoting: Newton systems here
// are small (a few hundred unknowns) and the collocation matrices can get
// ill-conditioned near the sonic point, where a silent bad pivot would be
// much more expensive than the extra O(n) pivot search.

#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include "eulerlab/errors.hpp"
#include "eulerlab/real.hpp"

namespace eulerlab {

template <class R>
using Mat = Eigen::Matrix<R, Eigen::Dynamic, Eigen::Dynamic>;

template <class R>
using Vec = Eigen::Matrix<R, Eigen::Dynamic, 1>;

// Solve A x = b, throwing SingularJacobian when the pivot collapse says the
// matrix has (numerically) deficient rank.
template <class R>
Vec<R> lu_solve(const Mat<R>& A, const Vec<R>& b) {
    Eigen::FullPivLU<Mat<R>> lu(A);
    // FullPivLU's default threshold is scaled for IEEE doubles; rescale to the
    // working precision so genuinely tiny pivots are flagged.
    lu.setThreshold(real_eps<R>() * R(A.rows()));
    if (lu.rank() < A.rows()) throw SingularJacobian("lu_solve: rank-deficient matrix");
    return lu.solve(b);
}

}  // namespace eulerlab
