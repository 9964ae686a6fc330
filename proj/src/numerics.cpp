#include "routh/numerics.hpp"

#include <Eigen/Dense>

namespace routh {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows, m.cols);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) e(i, j) = m(i, j);
    return e;
}

}  // namespace

int numerical_rank(const Matrix& m, double rel_tol) {
    if (m.rows == 0 || m.cols == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

Matrix null_space(const Matrix& m, double rel_tol) {
    Eigen::MatrixXd e = to_eigen(m);
    if (m.rows == 0) {
        Matrix id(m.cols, m.cols);
        for (int i = 0; i < m.cols; ++i) id(i, i) = 1.0;
        return id;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(0) > 0.0 && s(i) > rel_tol * s(0)) ++r;
    const int k = m.cols - r;
    Matrix out(m.cols, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < m.cols; ++i) out(i, j) = svd.matrixV()(i, r + j);
    return out;
}

Vec<double> least_squares(const Matrix& m, const Vec<double>& b) {
    if (m.cols == 0) return {};
    Eigen::VectorXd rhs(m.rows);
    for (int i = 0; i < m.rows; ++i) rhs(i) = b[i];
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(to_eigen(m));
    Eigen::VectorXd x = cod.solve(rhs);
    return Vec<double>(x.data(), x.data() + x.size());
}

Vec<double> fd_gradient(const ScalarField& f, const Vec<double>& x, double step) {
    Vec<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        Vec<double> xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        g[i] = (f(xp) - f(xm)) / (2.0 * step);
    }
    return g;
}

const std::vector<double>& Trajectory::audit(const std::string& name) const {
    for (const auto& [n, col] : audits)
        if (n == name) return col;
    throw StructuralError("trajectory has no audit column " + name);
}

Trajectory rk4_integrate(const VectorFieldFn& field, Vec<double> x0, double t0, double t1, double h) {
    if (!(h > 0.0)) throw ConfigurationError("rk4_integrate: step must be positive");
    if (t1 < t0) throw ConfigurationError("rk4_integrate: t_end before t_start");
    Trajectory tr;
    tr.times.push_back(t0);
    tr.states.push_back(x0);
    const std::size_t n = x0.size();
    auto axpy = [n](const Vec<double>& x, double a, const Vec<double>& k) {
        Vec<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * k[i];
        return y;
    };
    const double span = t1 - t0;
    const auto full_steps = static_cast<long long>(std::floor(span / h * (1.0 + 1e-12)));
    Vec<double> x = std::move(x0);
    double t = t0;
    auto step = [&](double dt) {
        Vec<double> k1 = field(t, x);
        Vec<double> k2 = field(t + 0.5 * dt, axpy(x, 0.5 * dt, k1));
        Vec<double> k3 = field(t + 0.5 * dt, axpy(x, 0.5 * dt, k2));
        Vec<double> k4 = field(t + dt, axpy(x, dt, k3));
        Vec<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for (double v : y)
            if (!std::isfinite(v)) throw NumericError("rk4_integrate: non-finite state", x, t);
        x = std::move(y);
    };
    for (long long i = 1; i <= full_steps; ++i) {
        step(h);
        t = t0 + static_cast<double>(i) * h;
        tr.times.push_back(t);
        tr.states.push_back(x);
    }
    const double rest = t1 - t;
    if (rest > 1e-12 * h) {
        step(rest);
        t = t1;
        tr.times.push_back(t);
        tr.states.push_back(x);
    }
    return tr;
}

double evaluate(const SampledForm& form, const Vec<double>& x, const Vec<double>& u) {
    if (form.degree != 1) throw StructuralError("evaluate: expected a one-form");
    return dot(form.coefficients(x), u);
}

double evaluate(const SampledForm& form, const Vec<double>& x, const Vec<double>& u, const Vec<double>& v) {
    if (form.degree != 2) throw StructuralError("evaluate: expected a two-form");
    return dot(u, matvec(form.matrix(x), v));
}

double exterior_derivative(const SampledForm& form, const Vec<double>& x, const Vec<double>& u,
                           const Vec<double>& v) {
    if (form.degree != 1) throw StructuralError("exterior_derivative: expected a one-form");
    Vec<double> du_alpha = directional(form.components, x, u);
    Vec<double> dv_alpha = directional(form.components, x, v);
    return dot(du_alpha, v) - dot(dv_alpha, u);
}

double exterior_derivative(const SampledForm& form, const Vec<double>& x, const Vec<double>& u,
                           const Vec<double>& v, const Vec<double>& w) {
    if (form.degree != 2) throw StructuralError("exterior_derivative: expected a two-form");
    const int n = form.dim;
    auto pair = [n](const Vec<double>& m, const Vec<double>& a, const Vec<double>& b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += a[i] * m[i * n + j] * b[j];
        return s;
    };
    Vec<double> du_b = directional(form.components, x, u);
    Vec<double> dv_b = directional(form.components, x, v);
    Vec<double> dw_b = directional(form.components, x, w);
    return pair(du_b, v, w) - pair(dv_b, u, w) + pair(dw_b, u, v);
}

SampledForm exterior_derivative(const SampledForm& one_form) {
    if (one_form.degree != 1) throw StructuralError("exterior_derivative: expected a one-form");
    const int n = one_form.dim;
    SmoothMap alpha = one_form.components;
    SmoothMap comps = SmoothMap::from(n, n * n, [alpha, n](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> out(static_cast<std::size_t>(n * n), T(0.0));
        if constexpr (depth_available<T, 1>()) {
            Mat<T> J = jacobian(alpha, Vec<T>(x.begin(), x.end()));
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[i * n + j] = J(j, i) - J(i, j);
        } else {
            throw_depth_exceeded();
        }
        return out;
    });
    return {2, n, comps};
}

double closedness_residual(const SampledForm& two_form, const Vec<double>& x) {
    const int n = two_form.dim;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                double r = exterior_derivative(two_form, x, unit<double>(n, i), unit<double>(n, j),
                                               unit<double>(n, k));
                worst = std::max(worst, std::abs(r));
            }
    return worst;
}

}  // namespace routh
