#pragma once
/// @file lie.hpp
/// @brief Closed family of Lie groups with closed-form exp and Ad, group actions,
/// and the cocycles attached to a potential.
///
/// Coordinates: RealN additive; Circle an angle; SE2 (x, y, theta) with
/// algebra basis e1, e2 (translations) and e3 (rotation); Heisenberg (x, y, s)
/// with algebra coordinates (vx, vy, v). Pairings are Euclidean dot products in
/// these bases. Ad*_g is the transpose of Ad_g and ad*_xi the transpose of ad_xi.

#include <cmath>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "routh/numerics.hpp"
#include "routh/smooth_map.hpp"

namespace routh {

enum class GroupKind { RealN, Circle, SE2, Heisenberg, Product };

namespace detail {

/// sin(w)/w, smooth through 0.
template <class T>
T sinc(const T& w) {
    using std::sin;
    if (std::abs(value_of(w)) < 1e-3) {
        T w2 = w * w;
        return 1.0 - w2 / 6.0 + w2 * w2 / 120.0 - w2 * w2 * w2 / 5040.0;
    }
    return sin(w) / w;
}

/// (1 - cos w)/w, smooth through 0.
template <class T>
T cosc(const T& w) {
    using std::cos;
    if (std::abs(value_of(w)) < 1e-3) {
        T w2 = w * w;
        return w / 2.0 - w * w2 / 24.0 + w * w2 * w2 / 720.0 - w * w2 * w2 * w2 / 40320.0;
    }
    return (1.0 - cos(w)) / w;
}

}  // namespace detail

class LieGroupModel {
public:
    static LieGroupModel real(int n);
    static LieGroupModel circle();
    static LieGroupModel se2();
    static LieGroupModel heisenberg();
    static LieGroupModel product(std::vector<LieGroupModel> factors);

    GroupKind kind() const { return kind_; }
    int dim() const { return dim_; }
    std::string name() const;
    bool operator==(const LieGroupModel& o) const;
    bool is_abelian() const;

    /// Indices of coordinates that are angles (compared modulo 2π).
    std::vector<int> angle_coordinates() const;

    /// Group distance in coordinates, angles compared by angular distance.
    double distance(const Vec<double>& g, const Vec<double>& h) const;

    template <class T> Vec<T> identity() const { return Vec<T>(static_cast<std::size_t>(dim_), T(0.0)); }

    template <class T>
    Vec<T> compose(std::span<const T> g, std::span<const T> h) const {
        check(g.size());
        check(h.size());
        using std::cos;
        using std::sin;
        switch (kind_) {
            case GroupKind::RealN:
            case GroupKind::Circle: {
                Vec<T> r(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) r[i] = g[i] + h[i];
                return r;
            }
            case GroupKind::SE2: {
                T c = cos(g[2]), s = sin(g[2]);
                return {h[0] * c - h[1] * s + g[0], h[0] * s + h[1] * c + g[1], g[2] + h[2]};
            }
            case GroupKind::Heisenberg:
                return {g[0] + h[0], g[1] + h[1], g[2] + h[2] + 0.5 * (g[0] * h[1] - g[1] * h[0])};
            case GroupKind::Product: {
                Vec<T> r;
                std::size_t off = 0;
                for (const auto& f : *factors_) {
                    auto d = static_cast<std::size_t>(f.dim());
                    Vec<T> part = f.compose(g.subspan(off, d), h.subspan(off, d));
                    r.insert(r.end(), part.begin(), part.end());
                    off += d;
                }
                return r;
            }
        }
        return {};
    }
    template <class T> Vec<T> compose(const Vec<T>& g, const Vec<T>& h) const {
        return compose(std::span<const T>(g), std::span<const T>(h));
    }

    template <class T>
    Vec<T> inverse(std::span<const T> g) const {
        check(g.size());
        using std::cos;
        using std::sin;
        switch (kind_) {
            case GroupKind::RealN:
            case GroupKind::Circle:
            case GroupKind::Heisenberg: {
                Vec<T> r(g.size());
                for (std::size_t i = 0; i < g.size(); ++i) r[i] = -g[i];
                return r;
            }
            case GroupKind::SE2: {
                T c = cos(g[2]), s = sin(g[2]);
                return {-(c * g[0] + s * g[1]), s * g[0] - c * g[1], -g[2]};
            }
            case GroupKind::Product:
                return per_factor(g, [](const LieGroupModel& f, std::span<const T> p) { return f.inverse(p); });
        }
        return {};
    }
    template <class T> Vec<T> inverse(const Vec<T>& g) const { return inverse(std::span<const T>(g)); }

    template <class T>
    Vec<T> exp(std::span<const T> xi) const {
        check(xi.size());
        switch (kind_) {
            case GroupKind::RealN:
            case GroupKind::Circle:
            case GroupKind::Heisenberg:
                return Vec<T>(xi.begin(), xi.end());
            case GroupKind::SE2: {
                T a = detail::sinc(xi[2]), b = detail::cosc(xi[2]);
                return {a * xi[0] - b * xi[1], b * xi[0] + a * xi[1], xi[2]};
            }
            case GroupKind::Product:
                return per_factor(xi, [](const LieGroupModel& f, std::span<const T> p) { return f.exp(p); });
        }
        return {};
    }
    template <class T> Vec<T> exp(const Vec<T>& xi) const { return exp(std::span<const T>(xi)); }

    /// Adjoint action: derivative at t = 0 of g exp(t xi) g^{-1}.
    template <class T>
    Vec<T> Ad(std::span<const T> g, std::span<const T> xi) const {
        check(g.size());
        check(xi.size());
        using std::cos;
        using std::sin;
        switch (kind_) {
            case GroupKind::RealN:
            case GroupKind::Circle:
                return Vec<T>(xi.begin(), xi.end());
            case GroupKind::SE2: {
                T c = cos(g[2]), s = sin(g[2]);
                return {c * xi[0] - s * xi[1] + xi[2] * g[1], s * xi[0] + c * xi[1] - xi[2] * g[0], xi[2]};
            }
            case GroupKind::Heisenberg:
                return {xi[0], xi[1], xi[2] + g[0] * xi[1] - g[1] * xi[0]};
            case GroupKind::Product: {
                Vec<T> r;
                std::size_t off = 0;
                for (const auto& f : *factors_) {
                    auto d = static_cast<std::size_t>(f.dim());
                    Vec<T> part = f.Ad(g.subspan(off, d), xi.subspan(off, d));
                    r.insert(r.end(), part.begin(), part.end());
                    off += d;
                }
                return r;
            }
        }
        return {};
    }
    template <class T> Vec<T> Ad(const Vec<T>& g, const Vec<T>& xi) const {
        return Ad(std::span<const T>(g), std::span<const T>(xi));
    }

    /// Lie bracket with the structure constants of the fixed basis.
    template <class T>
    Vec<T> bracket(std::span<const T> xi, std::span<const T> eta) const {
        check(xi.size());
        check(eta.size());
        switch (kind_) {
            case GroupKind::RealN:
            case GroupKind::Circle:
                return Vec<T>(xi.size(), T(0.0));
            case GroupKind::SE2:
                // Matrix commutator: [e1,e2] = 0, [e1,e3] = -e2, [e2,e3] = e1. Brackets of the
                // left-action generators carry the opposite sign.
                return {xi[1] * eta[2] - eta[1] * xi[2], eta[0] * xi[2] - xi[0] * eta[2], T(0.0)};
            case GroupKind::Heisenberg:
                return {T(0.0), T(0.0), xi[0] * eta[1] - xi[1] * eta[0]};
            case GroupKind::Product: {
                Vec<T> r;
                std::size_t off = 0;
                for (const auto& f : *factors_) {
                    auto d = static_cast<std::size_t>(f.dim());
                    Vec<T> part = f.bracket(xi.subspan(off, d), eta.subspan(off, d));
                    r.insert(r.end(), part.begin(), part.end());
                    off += d;
                }
                return r;
            }
        }
        return {};
    }
    template <class T> Vec<T> bracket(const Vec<T>& xi, const Vec<T>& eta) const {
        return bracket(std::span<const T>(xi), std::span<const T>(eta));
    }

    /// Ad*_g mu, defined by <Ad*_g mu, xi> = <mu, Ad_g xi>.
    template <class T>
    Vec<T> coadjoint(const Vec<T>& g, const Vec<T>& mu) const {
        Vec<T> r(mu.size(), T(0.0));
        for (int j = 0; j < dim_; ++j) r[j] = dot(mu, Ad(g, unit<T>(dim_, j)));
        return r;
    }

    /// ad*_xi mu, defined by <ad*_xi mu, eta> = <mu, [xi, eta]>.
    template <class T>
    Vec<T> coad_inf(const Vec<T>& xi, const Vec<T>& mu) const {
        Vec<T> r(mu.size(), T(0.0));
        for (int j = 0; j < dim_; ++j) r[j] = dot(mu, bracket(xi, unit<T>(dim_, j)));
        return r;
    }

    /// exp of a uniformly random algebra element in [-scale, scale]^dim.
    Vec<double> random_element(std::mt19937_64& rng, double scale = 1.0) const;

private:
    LieGroupModel(GroupKind k, int dim) : kind_(k), dim_(dim) {}
    void check(std::size_t n) const {
        if (static_cast<int>(n) != dim_)
            throw StructuralError("element of dimension " + std::to_string(n) + " used with group " + name());
    }
    template <class T, class F>
    Vec<T> per_factor(std::span<const T> x, F f) const {
        Vec<T> r;
        std::size_t off = 0;
        for (const auto& fac : *factors_) {
            auto d = static_cast<std::size_t>(fac.dim());
            Vec<T> part = f(fac, x.subspan(off, d));
            r.insert(r.end(), part.begin(), part.end());
            off += d;
        }
        return r;
    }

    GroupKind kind_;
    int dim_;
    std::shared_ptr<const std::vector<LieGroupModel>> factors_;
};

enum class ActionSide { Left, Right };

/// Action of a group on a chart manifold. `act` takes the concatenation
/// (group coordinates, point coordinates) and returns point coordinates.
struct GroupAction {
    LieGroupModel group = LieGroupModel::real(1);
    SmoothMap act;
    ActionSide side = ActionSide::Right;
    int manifold_dim = 0;
    std::function<bool(const Vec<double>&)> domain;  ///< optional chart domain

    static GroupAction make(LieGroupModel group, int manifold_dim, ActionSide side, SmoothMap act,
                            std::function<bool(const Vec<double>&)> domain = {});

    template <class T>
    Vec<T> apply(const Vec<T>& g, const Vec<T>& m) const {
        Vec<T> in(g);
        in.insert(in.end(), m.begin(), m.end());
        return act(in);
    }

    void require_domain(const Vec<double>& m) const {
        if (domain && !domain(m)) throw DomainError("point outside chart domain of the acting manifold");
    }

    /// Tangent map of m -> act(g, m) applied to u.
    template <class T>
    Vec<T> push_forward(const Vec<T>& g, const Vec<T>& m, const Vec<T>& u) const {
        return du_part(apply(lift(g), lift(m, u)));
    }
};

/// d/de act(exp(e xi), m) at e = 0.
template <class T>
Vec<T> fundamental_vector(const GroupAction& action, const Vec<T>& m, const Vec<T>& xi) {
    if constexpr (depth_v<T> == 0) action.require_domain(m);
    const auto d = static_cast<std::size_t>(action.group.dim());
    Vec<Dual<T>> eps_xi(d);
    for (std::size_t i = 0; i < d; ++i) eps_xi[i] = Dual<T>(T(0.0), xi[i]);
    Vec<Dual<T>> g = action.group.exp(eps_xi);
    return du_part(action.apply(g, lift(m)));
}

/// Generators of all basis elements as columns (manifold_dim x dim g).
template <class T>
Mat<T> fundamental_matrix(const GroupAction& action, const Vec<T>& m) {
    const int d = action.group.dim();
    Mat<T> out(action.manifold_dim, d);
    for (int j = 0; j < d; ++j) {
        Vec<T> col = fundamental_vector(action, m, unit<T>(d, j));
        for (int i = 0; i < action.manifold_dim; ++i) out(i, j) = col[i];
    }
    return out;
}

/// Non-equivariance cocycle of a potential delta (a map P -> g*).
/// Right actions: delta(m g^{-1}) - Ad*_{g^{-1}} delta(m).
/// Left actions:  delta(g m) - Ad*_{g^{-1}} delta(m).
Vec<double> sigma_cocycle(const GroupAction& action, const SmoothMap& delta, const Vec<double>& g,
                          const Vec<double>& m);

/// Infinitesimal cocycle Sigma(xi, eta).
/// Right actions: xi_P(delta_eta) - delta_[xi,eta]; left actions: -xi_P(delta_eta) - delta_[xi,eta].
double sigma_inf(const GroupAction& action, const SmoothMap& delta, const Vec<double>& xi,
                 const Vec<double>& eta, const Vec<double>& m);

/// Matrix of Sigma in the algebra basis, checked to be independent of the base
/// point at the supplied points (throws ConsistencyError otherwise).
Matrix sigma_matrix(const GroupAction& action, const SmoothMap& delta, const std::vector<Vec<double>>& points,
                    double tol = 1e-8);

/// sigma_cocycle evaluated at each point; throws ConsistencyError if they differ.
Vec<double> sigma_cocycle_checked(const GroupAction& action, const SmoothMap& delta, const Vec<double>& g,
                                  const std::vector<Vec<double>>& points, double tol = 1e-8);

/// Left or right multiplication of a group on itself.
GroupAction self_action(const LieGroupModel& group, ActionSide side);

}  // namespace routh
