#include "routh/lie.hpp"

#include <algorithm>
#include <numbers>

namespace routh {

LieGroupModel LieGroupModel::real(int n) {
    if (n < 1) throw ConfigurationError("RealN needs n >= 1");
    return {GroupKind::RealN, n};
}
LieGroupModel LieGroupModel::circle() { return {GroupKind::Circle, 1}; }
LieGroupModel LieGroupModel::se2() { return {GroupKind::SE2, 3}; }
LieGroupModel LieGroupModel::heisenberg() { return {GroupKind::Heisenberg, 3}; }

LieGroupModel LieGroupModel::product(std::vector<LieGroupModel> factors) {
    int d = 0;
    for (const auto& f : factors) d += f.dim();
    LieGroupModel m(GroupKind::Product, d);
    m.factors_ = std::make_shared<const std::vector<LieGroupModel>>(std::move(factors));
    return m;
}

std::string LieGroupModel::name() const {
    switch (kind_) {
        case GroupKind::RealN: return "R^" + std::to_string(dim_);
        case GroupKind::Circle: return "S^1";
        case GroupKind::SE2: return "SE(2)";
        case GroupKind::Heisenberg: return "H";
        case GroupKind::Product: {
            std::string s;
            for (const auto& f : *factors_) s += (s.empty() ? "" : " x ") + f.name();
            return s;
        }
    }
    return "?";
}

bool LieGroupModel::operator==(const LieGroupModel& o) const {
    if (kind_ != o.kind_ || dim_ != o.dim_) return false;
    if (kind_ != GroupKind::Product) return true;
    return *factors_ == *o.factors_;
}

bool LieGroupModel::is_abelian() const {
    switch (kind_) {
        case GroupKind::RealN:
        case GroupKind::Circle: return true;
        case GroupKind::SE2:
        case GroupKind::Heisenberg: return false;
        case GroupKind::Product:
            return std::all_of(factors_->begin(), factors_->end(), [](const auto& f) { return f.is_abelian(); });
    }
    return false;
}

std::vector<int> LieGroupModel::angle_coordinates() const {
    switch (kind_) {
        case GroupKind::Circle: return {0};
        case GroupKind::SE2: return {2};
        case GroupKind::Product: {
            std::vector<int> out;
            int off = 0;
            for (const auto& f : *factors_) {
                for (int i : f.angle_coordinates()) out.push_back(off + i);
                off += f.dim();
            }
            return out;
        }
        default: return {};
    }
}

double LieGroupModel::distance(const Vec<double>& g, const Vec<double>& h) const {
    check(g.size());
    check(h.size());
    const auto angles = angle_coordinates();
    double worst = 0.0;
    for (int i = 0; i < dim_; ++i) {
        double d = g[i] - h[i];
        if (std::find(angles.begin(), angles.end(), i) != angles.end()) {
            d = std::remainder(d, 2.0 * std::numbers::pi);
        }
        worst = std::max(worst, std::abs(d));
    }
    return worst;
}

Vec<double> LieGroupModel::random_element(std::mt19937_64& rng, double scale) const {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec<double> xi(static_cast<std::size_t>(dim_));
    for (auto& v : xi) v = u(rng);
    return exp(xi);
}

GroupAction GroupAction::make(LieGroupModel group, int manifold_dim, ActionSide side, SmoothMap act,
                              std::function<bool(const Vec<double>&)> domain) {
    if (act.in_dim() != group.dim() + manifold_dim || act.out_dim() != manifold_dim)
        throw StructuralError("action map has wrong arity for group " + group.name());
    GroupAction a{std::move(group), std::move(act), side, manifold_dim, std::move(domain)};
    return a;
}

Vec<double> sigma_cocycle(const GroupAction& action, const SmoothMap& delta, const Vec<double>& g,
                          const Vec<double>& m) {
    const auto& G = action.group;
    Vec<double> g_inv = G.inverse(g);
    Vec<double> moved = action.apply(action.side == ActionSide::Right ? g_inv : g, m);
    Vec<double> a = delta(moved);
    Vec<double> b = G.coadjoint(g_inv, delta(m));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

double sigma_inf(const GroupAction& action, const SmoothMap& delta, const Vec<double>& xi,
                 const Vec<double>& eta, const Vec<double>& m) {
    Vec<double> xi_p = fundamental_vector(action, m, xi);
    double derivative = dot(directional(delta, m, xi_p), eta);
    double bracket_term = dot(delta(m), action.group.bracket(xi, eta));
    return (action.side == ActionSide::Right ? derivative : -derivative) - bracket_term;
}

Matrix sigma_matrix(const GroupAction& action, const SmoothMap& delta, const std::vector<Vec<double>>& points,
                    double tol) {
    const int d = action.group.dim();
    if (points.empty()) throw StructuralError("sigma_matrix needs at least one base point");
    Matrix ref(d, d);
    for (std::size_t k = 0; k < points.size(); ++k) {
        Matrix s(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                s(i, j) = sigma_inf(action, delta, unit<double>(d, i), unit<double>(d, j), points[k]);
        if (k == 0) {
            ref = s;
            continue;
        }
        for (std::size_t i = 0; i < s.a.size(); ++i)
            if (std::abs(s.a[i] - ref.a[i]) > tol)
                throw ConsistencyError("infinitesimal cocycle depends on the base point; potential is not valid");
    }
    return ref;
}

Vec<double> sigma_cocycle_checked(const GroupAction& action, const SmoothMap& delta, const Vec<double>& g,
                                  const std::vector<Vec<double>>& points, double tol) {
    Vec<double> ref;
    for (const auto& m : points) {
        Vec<double> s = sigma_cocycle(action, delta, g, m);
        if (ref.empty()) {
            ref = s;
            continue;
        }
        for (std::size_t i = 0; i < s.size(); ++i)
            if (std::abs(s[i] - ref[i]) > tol)
                throw ConsistencyError("cocycle depends on the base point; potential is not valid");
    }
    return ref;
}

GroupAction self_action(const LieGroupModel& group, ActionSide side) {
    const int d = group.dim();
    SmoothMap act = SmoothMap::from(2 * d, d, [group, side, d](auto x) {
        auto g = x.subspan(0, static_cast<std::size_t>(d));
        auto m = x.subspan(static_cast<std::size_t>(d));
        return side == ActionSide::Left ? group.compose(g, m) : group.compose(m, g);
    });
    return GroupAction::make(group, d, side, act);
}

}  // namespace routh
