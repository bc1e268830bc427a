#pragma once

// Scalar precision policy. Profile construction, scans and mode solves run on
// fixed-precision MPFR reals; time evolution runs on hardware floats. The
// multiprecision types use allocate_stack (no heap traffic per value) and
// et_off so they behave like plain scalars inside Eigen and std algorithms.

#include <boost/multiprecision/mpfr.hpp>

#include <sstream>
#include <string>

namespace eulerlab {

namespace bmp = boost::multiprecision;

// 50 digits is the working precision; 100 digits exists to re-run a
// computation and measure how many digits of the 50-digit answer survive.
using real50 = bmp::number<bmp::mpfr_float_backend<50, bmp::allocate_stack>, bmp::et_off>;
using real100 = bmp::number<bmp::mpfr_float_backend<100, bmp::allocate_stack>, bmp::et_off>;

template <class R>
struct real_traits;

template <>
struct real_traits<real50> {
    static constexpr int digits10 = 50;
    static constexpr const char* name = "real50";
};
template <>
struct real_traits<real100> {
    static constexpr int digits10 = 100;
    static constexpr const char* name = "real100";
};
template <>
struct real_traits<double> {
    static constexpr int digits10 = 17;
    static constexpr const char* name = "double";
};
template <>
struct real_traits<long double> {
    static constexpr int digits10 = 21;
    static constexpr const char* name = "long double";
};

// Decimal-string conversions. All JSON I/O goes through these so extended
// precision survives a round trip.
template <class R>
inline R parse_real(const std::string& s) {
    return R(s);
}
template <>
inline double parse_real<double>(const std::string& s) {
    return std::stod(s);
}
template <>
inline long double parse_real<long double>(const std::string& s) {
    return std::stold(s);
}

template <class R>
inline std::string format_real(const R& x) {
    return x.str(real_traits<R>::digits10, std::ios_base::scientific);
}
template <>
inline std::string format_real<double>(const double& x) {
    std::ostringstream os;
    os.precision(17);
    os << std::scientific << x;
    return os.str();
}
template <>
inline std::string format_real<long double>(const long double& x) {
    std::ostringstream os;
    os.precision(21);
    os << std::scientific << x;
    return os.str();
}

// Machine-epsilon analogue at the working precision, for tolerance defaults.
template <class R>
inline R real_eps() {
    R e = 1;
    const R half = R(1) / 2;
    while (R(1) + e / 2 != R(1)) e *= half;
    return e;
}

// Runtime precision selection for the CLI: EULERLAB_DIGITS chooses which
// instantiation the drivers run (50 or 100).
int selected_digits();

}  // namespace eulerlab
