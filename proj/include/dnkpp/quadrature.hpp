#pragma once

// Thin wrappers around Boost.Math double-exponential quadrature. Every
// integral in the library goes through here so tolerances live in one place.

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>

namespace dnkpp::quad {

inline constexpr double default_tolerance = 1e-14;
inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace detail {

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule(12);
    return rule;
}

inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule;
}

}  // namespace detail

/// Integral of `f` over [0, inf). `f` must decay at infinity.
template <class F>
double half_line(F&& f, double tol = default_tolerance) {
    return detail::exp_sinh_rule().integrate(
        [&](double x) {
            const double v = f(x);
            return std::isfinite(v) ? v : 0.0;
        },
        0.0, inf, tol);
}

/// Integral of `f` over [a, inf).
template <class F>
double tail(F&& f, double a, double tol = default_tolerance) {
    return half_line([&](double x) { return f(a + x); }, tol);
}

/// Integral of `f` over the finite interval [a, b]; endpoint singularities are fine.
template <class F>
double interval(F&& f, double a, double b, double tol = default_tolerance) {
    if (a == b) {
        return 0.0;
    }
    if (b < a) {
        return -interval(f, b, a, tol);
    }
    return detail::tanh_sinh_rule().integrate(
        [&](double x) {
            const double v = f(x);
            return std::isfinite(v) ? v : 0.0;
        },
        a, b, tol);
}

/// Integral of `f` over the whole real line, split at `center`.
template <class F>
double real_line(F&& f, double center = 0.0, double tol = default_tolerance) {
    return half_line([&](double x) { return f(center + x); }, tol) +
           half_line([&](double x) { return f(center - x); }, tol);
}

}  // namespace dnkpp::quad
