#pragma once
/// @file dual.hpp
/// @brief Nestable forward-mode dual numbers.
///
/// `Dual<T>` carries a value and one directional derivative. Nesting
/// `Dual<Dual<double>>` yields exact second directional derivatives; deeper
/// nesting is used when a derived field (for example a reduced Lagrangian that
/// itself differentiates its parent) is differentiated again.

#include <cmath>
#include <type_traits>

namespace routh {

template <class T>
struct Dual {
    T re{};
    T du{};

    Dual() = default;
    Dual(double v) : re(v), du(0.0) {}  // NOLINT(google-explicit-constructor)
    Dual(const T& v, const T& d) : re(v), du(d) {}
    template <class U = T, std::enable_if_t<!std::is_same_v<U, double>, int> = 0>
    Dual(const T& v) : re(v), du(0.0) {}  // NOLINT(google-explicit-constructor)

    Dual& operator+=(const Dual& o) { re += o.re; du += o.du; return *this; }
    Dual& operator-=(const Dual& o) { re -= o.re; du -= o.du; return *this; }
    Dual& operator*=(const Dual& o) { du = du * o.re + re * o.du; re *= o.re; return *this; }
    Dual& operator/=(const Dual& o) {
        T inv = T(1.0) / o.re;
        re *= inv;
        du = (du - re * o.du) * inv;
        return *this;
    }
};

template <class T> struct is_dual : std::false_type {};
template <class T> struct is_dual<Dual<T>> : std::true_type {};

/// Nesting depth: 0 for double, 1 for Dual<double>, ...
template <class T> inline constexpr int depth_v = 0;
template <class T> inline constexpr int depth_v<Dual<T>> = 1 + depth_v<T>;

template <int D> struct scalar_at { using type = Dual<typename scalar_at<D - 1>::type>; };
template <> struct scalar_at<0> { using type = double; };
template <int D> using scalar_at_t = typename scalar_at<D>::type;

/// Deepest scalar type any field can be evaluated at.
inline constexpr int kMaxDepth = 6;

inline double value_of(double x) { return x; }
template <class T> double value_of(const Dual<T>& x) { return value_of(x.re); }

template <class T> Dual<T> operator+(Dual<T> a, const Dual<T>& b) { return a += b; }
template <class T> Dual<T> operator-(Dual<T> a, const Dual<T>& b) { return a -= b; }
template <class T> Dual<T> operator*(Dual<T> a, const Dual<T>& b) { return a *= b; }
template <class T> Dual<T> operator/(Dual<T> a, const Dual<T>& b) { return a /= b; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return Dual<T>(-a.re, -a.du); }
template <class T> Dual<T> operator+(const Dual<T>& a) { return a; }

template <class T> Dual<T> operator+(Dual<T> a, double b) { a.re += b; return a; }
template <class T> Dual<T> operator+(double b, Dual<T> a) { a.re += b; return a; }
template <class T> Dual<T> operator-(Dual<T> a, double b) { a.re -= b; return a; }
template <class T> Dual<T> operator-(double b, const Dual<T>& a) { return Dual<T>(b - a.re, -a.du); }
template <class T> Dual<T> operator*(Dual<T> a, double b) { a.re *= b; a.du *= b; return a; }
template <class T> Dual<T> operator*(double b, Dual<T> a) { a.re *= b; a.du *= b; return a; }
template <class T> Dual<T> operator/(Dual<T> a, double b) { a.re /= b; a.du /= b; return a; }
template <class T> Dual<T> operator/(double b, const Dual<T>& a) { return Dual<T>(b) / a; }

template <class T> bool operator<(const Dual<T>& a, const Dual<T>& b) { return value_of(a) < value_of(b); }
template <class T> bool operator>(const Dual<T>& a, const Dual<T>& b) { return value_of(a) > value_of(b); }
template <class T> bool operator<=(const Dual<T>& a, const Dual<T>& b) { return value_of(a) <= value_of(b); }
template <class T> bool operator>=(const Dual<T>& a, const Dual<T>& b) { return value_of(a) >= value_of(b); }
template <class T> bool operator<(const Dual<T>& a, double b) { return value_of(a) < b; }
template <class T> bool operator>(const Dual<T>& a, double b) { return value_of(a) > b; }
template <class T> bool operator<(double a, const Dual<T>& b) { return a < value_of(b); }
template <class T> bool operator>(double a, const Dual<T>& b) { return a > value_of(b); }

template <class T> Dual<T> sin(const Dual<T>& a) { using std::sin; using std::cos; return {sin(a.re), a.du * cos(a.re)}; }
template <class T> Dual<T> cos(const Dual<T>& a) { using std::sin; using std::cos; return {cos(a.re), -(a.du * sin(a.re))}; }
template <class T> Dual<T> exp(const Dual<T>& a) { using std::exp; T e = exp(a.re); return {e, a.du * e}; }
template <class T> Dual<T> log(const Dual<T>& a) { using std::log; return {log(a.re), a.du / a.re}; }
template <class T> Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.re);
    return {s, a.du / (2.0 * s)};
}
template <class T> Dual<T> tan(const Dual<T>& a) {
    using std::tan;
    T t = tan(a.re);
    return {t, a.du * (1.0 + t * t)};
}
template <class T> Dual<T> atan(const Dual<T>& a) { using std::atan; return {atan(a.re), a.du / (1.0 + a.re * a.re)}; }
template <class T> Dual<T> atan2(const Dual<T>& y, const Dual<T>& x) {
    using std::atan2;
    T r2 = x.re * x.re + y.re * y.re;
    return {atan2(y.re, x.re), (x.re * y.du - y.re * x.du) / r2};
}
template <class T> Dual<T> pow(const Dual<T>& a, double p) {
    using std::pow;
    T ap = pow(a.re, p - 1.0);
    return {ap * a.re, a.du * (p * ap)};
}
template <class T> Dual<T> abs(const Dual<T>& a) { return value_of(a) < 0.0 ? -a : a; }

template <class T> bool isfinite(const Dual<T>& a) {
    using std::isfinite;
    return isfinite(a.re) && isfinite(a.du);
}

/// Lift a value to the next nesting level with derivative seed `seed`.
template <class T> Dual<T> seeded(const T& v, double seed) { return Dual<T>(v, T(seed)); }

}  // namespace routh
