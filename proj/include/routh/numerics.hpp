#pragma once
/// @file numerics.hpp
/// @brief Differentiation, dense linear solves, Newton iteration, RK4 and sampled exterior calculus.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "routh/dual.hpp"
#include "routh/errors.hpp"
#include "routh/smooth_map.hpp"

namespace routh {

/// Dense row-major matrix over any scalar of the tower.
template <class T>
struct Mat {
    int rows = 0;
    int cols = 0;
    Vec<T> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r * c), T(0.0)) {}
    T& operator()(int i, int j) { return a[static_cast<std::size_t>(i * cols + j)]; }
    const T& operator()(int i, int j) const { return a[static_cast<std::size_t>(i * cols + j)]; }
};

using Matrix = Mat<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
template <class T> bool is_finite(const Dual<T>& x) { return is_finite(x.re) && is_finite(x.du); }

template <class T>
Vec<T> matvec(const Mat<T>& m, const Vec<T>& x) {
    Vec<T> y(static_cast<std::size_t>(m.rows), T(0.0));
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) y[i] += m(i, j) * x[j];
    return y;
}

template <class T>
Mat<T> transpose(const Mat<T>& m) {
    Mat<T> t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    return t;
}

template <class T>
Mat<T> matmul(const Mat<T>& x, const Mat<T>& y) {
    Mat<T> r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k)
            for (int j = 0; j < y.cols; ++j) r(i, j) += x(i, k) * y(k, j);
    return r;
}

template <class T>
T dot(const Vec<T>& x, const Vec<T>& y) {
    T s(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

/// Solve A x = b by LU with partial pivoting. Pivots are chosen on values;
/// a pivot below 1e-12 times the largest entry raises RankError.
template <class T>
Vec<T> lu_solve(Mat<T> A, Vec<T> b, const std::string& what = "linear system") {
    const int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n)
        throw StructuralError("lu_solve: dimension mismatch in " + what);
    double scale = 0.0;
    for (const auto& e : A.a) scale = std::max(scale, std::abs(value_of(e)));
    const double tol = 1e-12 * scale;
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(value_of(A(k, k)));
        for (int i = k + 1; i < n; ++i) {
            double v = std::abs(value_of(A(i, k)));
            if (v > best) { best = v; piv = i; }
        }
        if (best <= tol || best == 0.0) throw RankError("singular matrix in " + what);
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            T f = A(i, k) / A(k, k);
            if (value_of(f) == 0.0 && depth_v<T> == 0) continue;
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    Vec<T> x(static_cast<std::size_t>(n), T(0.0));
    for (int i = n - 1; i >= 0; --i) {
        T s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

/// Numerical rank from singular values (relative threshold).
int numerical_rank(const Matrix& m, double rel_tol = 1e-9);

/// Orthonormal basis of the null space of m (columns of the result).
Matrix null_space(const Matrix& m, double rel_tol = 1e-9);

/// Minimum-norm least-squares solution of m x = b.
Vec<double> least_squares(const Matrix& m, const Vec<double>& b);

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

/// Lift a point one level up the tower with zero tangent.
template <class T>
Vec<Dual<T>> lift(const Vec<T>& x) {
    Vec<Dual<T>> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = Dual<T>(x[i], T(0.0));
    return y;
}

/// Lift with tangent direction u.
template <class T>
Vec<Dual<T>> lift(const Vec<T>& x, const Vec<T>& u) {
    Vec<Dual<T>> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = Dual<T>(x[i], u[i]);
    return y;
}

template <class T>
Vec<T> re_part(const Vec<Dual<T>>& y) {
    Vec<T> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i].re;
    return r;
}

template <class T>
Vec<T> du_part(const Vec<Dual<T>>& y) {
    Vec<T> r(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = y[i].du;
    return r;
}

inline void check_finite(const Vec<double>& y, const Vec<double>& at, const char* what) {
    for (double v : y)
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite evaluation of ") + what, at);
}

template <class T>
Vec<double> values(const Vec<T>& x) {
    Vec<double> r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = value_of(x[i]);
    return r;
}

/// Directional derivative D_u f(x) of a map, at any tower scalar.
template <class T>
Vec<T> directional(const SmoothMap& f, const Vec<T>& x, const Vec<T>& u) {
    return du_part(f(lift(x, u)));
}

template <class T>
T directional(const ScalarField& f, const Vec<T>& x, const Vec<T>& u) {
    return f(lift(x, u)).du;
}

template <class T>
Vec<T> unit(std::size_t n, std::size_t i) {
    Vec<T> e(n, T(0.0));
    e[i] = T(1.0);
    return e;
}

/// Jacobian (out x in) of a map at x.
template <class T>
Mat<T> jacobian(const SmoothMap& f, const Vec<T>& x) {
    Mat<T> J(f.out_dim(), static_cast<int>(x.size()));
    for (std::size_t j = 0; j < x.size(); ++j) {
        Vec<T> col = directional(f, x, unit<T>(x.size(), j));
        for (int i = 0; i < f.out_dim(); ++i) J(i, static_cast<int>(j)) = col[i];
    }
    return J;
}

template <class T>
Vec<T> gradient(const ScalarField& f, const Vec<T>& x) {
    Vec<T> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = directional(f, x, unit<T>(x.size(), i));
    if constexpr (depth_v<T> == 0) check_finite(g, x, "gradient");
    return g;
}

/// Mixed second derivative d^2 f / (du dw) at x.
template <class T>
T second_directional(const ScalarField& f, const Vec<T>& x, const Vec<T>& u, const Vec<T>& w) {
    Vec<Dual<Dual<T>>> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = Dual<Dual<T>>(Dual<T>(x[i], w[i]), Dual<T>(u[i], T(0.0)));
    return f(y).du.du;
}

template <class T>
Mat<T> hessian(const ScalarField& f, const Vec<T>& x) {
    const int n = static_cast<int>(x.size());
    Mat<T> H(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            H(i, j) = second_directional(f, x, unit<T>(n, i), unit<T>(n, j));
            H(j, i) = H(i, j);
        }
    if constexpr (depth_v<T> == 0) check_finite(H.a, x, "hessian");
    return H;
}

/// Central finite-difference gradient, used only as a test oracle.
Vec<double> fd_gradient(const ScalarField& f, const Vec<double>& x, double step = 1e-6);

// ---------------------------------------------------------------------------
// Newton
// ---------------------------------------------------------------------------

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 50;
};

/// Newton iteration on residual(x) = 0. `residual` must be callable at T and Dual<T>.
/// At dual scalars an extra step after value convergence settles the tangent parts.
template <class T, class R>
Vec<T> newton_solve(const R& residual, Vec<T> x, NewtonOptions opt = {}) {
    const std::size_t n = x.size();
    double res = 0.0;
    bool converged = false;
    for (int it = 0; it <= opt.max_iter; ++it) {
        Vec<T> r = residual(x);
        if (r.size() != n) throw StructuralError("newton_solve: residual dimension mismatch");
        res = 0.0;
        for (const auto& v : r) res = std::max(res, std::abs(value_of(v)));
        if (!std::isfinite(res)) throw NumericError("newton_solve: non-finite residual", values(x));
        if (res <= opt.tol) {
            if (depth_v<T> == 0 || converged) return x;
            converged = true;
        }
        if (it == opt.max_iter) break;
        Mat<T> J(static_cast<int>(n), static_cast<int>(n));
        for (std::size_t j = 0; j < n; ++j) {
            Vec<Dual<T>> col = residual(lift(x, unit<T>(n, j)));
            for (std::size_t i = 0; i < n; ++i) J(static_cast<int>(i), static_cast<int>(j)) = col[i].du;
        }
        for (auto& v : r) v = -v;
        Vec<T> dx = lu_solve(J, r, "Newton Jacobian");
        for (std::size_t i = 0; i < n; ++i) x[i] += dx[i];
    }
    if (converged) return x;
    throw ConvergenceError("newton_solve: max_iter exceeded", res);
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

/// Time-stamped states with named audit columns.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec<double>> states;
    std::vector<std::pair<std::string, std::vector<double>>> audits;

    const std::vector<double>& audit(const std::string& name) const;
    std::size_t size() const { return times.size(); }
};

using VectorFieldFn = std::function<Vec<double>(double, const Vec<double>&)>;

/// Classical RK4 with fixed step h; the last step is shortened to land on t1.
Trajectory rk4_integrate(const VectorFieldFn& field, Vec<double> x0, double t0, double t1, double h);

// ---------------------------------------------------------------------------
// Exterior calculus
// ---------------------------------------------------------------------------

/// Differential form of degree 1 or 2 on a chart of dimension dim. Degree-2
/// components are a row-major antisymmetric dim x dim matrix.
struct SampledForm {
    int degree = 1;
    int dim = 0;
    SmoothMap components;

    template <class T>
    Vec<T> coefficients(const Vec<T>& x) const { return components(x); }

    template <class T>
    Mat<T> matrix(const Vec<T>& x) const {
        Mat<T> m(dim, dim);
        m.a = components(x);
        return m;
    }

    static SampledForm zero(int degree, int dim) {
        return {degree, dim, SmoothMap::zero(dim, degree == 1 ? dim : dim * dim)};
    }
};

/// Evaluate a form on vectors.
double evaluate(const SampledForm& form, const Vec<double>& x, const Vec<double>& u);
double evaluate(const SampledForm& form, const Vec<double>& x, const Vec<double>& u, const Vec<double>& v);

/// dα(u,v) = D_u(α(v)) − D_v(α(u)) for constant vector fields in the chart.
double exterior_derivative(const SampledForm& form, const Vec<double>& x, const Vec<double>& u,
                           const Vec<double>& v);

/// dβ(u,v,w) = D_u β(v,w) − D_v β(u,w) + D_w β(u,v).
double exterior_derivative(const SampledForm& form, const Vec<double>& x, const Vec<double>& u,
                           const Vec<double>& v, const Vec<double>& w);

/// d of a one-form as a degree-2 form (evaluable at every tower level it can support).
SampledForm exterior_derivative(const SampledForm& one_form);

/// Max over coordinate triples of |dβ|, used as a closedness residual.
double closedness_residual(const SampledForm& two_form, const Vec<double>& x);

}  // namespace routh
