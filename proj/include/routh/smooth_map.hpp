#pragma once
/// @file smooth_map.hpp
/// @brief Type-erased maps R^a -> R^b evaluable at every scalar of the dual tower.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "routh/dual.hpp"
#include "routh/errors.hpp"

namespace routh {

template <class T> using Vec = std::vector<T>;

/// Element type of a span argument inside generic lambdas.
template <class S> using elem_t = typename std::remove_cvref_t<S>::value_type;

namespace detail {

template <class T> using MapFn = std::function<Vec<T>(std::span<const T>)>;

template <class Seq> struct FnTable;
template <int... D> struct FnTable<std::integer_sequence<int, D...>> {
    std::tuple<MapFn<scalar_at_t<D>>...> fns;
};
using Table = FnTable<std::make_integer_sequence<int, kMaxDepth + 1>>;

}  // namespace detail

/// Smooth map between chart coordinates. Built from a generic callable that is
/// instantiated for every scalar type up to kMaxDepth.
class SmoothMap {
public:
    SmoothMap() = default;

    template <class F>
    static SmoothMap from(int in_dim, int out_dim, F f) {
        SmoothMap m;
        m.in_ = in_dim;
        m.out_ = out_dim;
        auto table = std::make_shared<detail::Table>();
        fill(*table, f, std::make_integer_sequence<int, kMaxDepth + 1>{});
        m.table_ = std::move(table);
        return m;
    }

    /// Zero map.
    static SmoothMap zero(int in_dim, int out_dim) {
        return from(in_dim, out_dim, [out_dim](auto x) {
            using T = elem_t<decltype(x)>;
            return Vec<T>(static_cast<std::size_t>(out_dim), T(0.0));
        });
    }

    template <class T>
    Vec<T> operator()(std::span<const T> x) const {
        if (!table_) throw StructuralError("evaluating an empty map");
        if (static_cast<int>(x.size()) != in_) {
            throw StructuralError("map arity " + std::to_string(in_) + " called with " +
                                  std::to_string(x.size()) + " arguments");
        }
        return std::get<depth_v<T>>(table_->fns)(x);
    }
    template <class T>
    Vec<T> operator()(const Vec<T>& x) const { return (*this)(std::span<const T>(x)); }

    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    bool empty() const { return !table_; }

private:
    template <class F, int... D>
    static void fill(detail::Table& t, const F& f, std::integer_sequence<int, D...>) {
        ((std::get<D>(t.fns) = [f](std::span<const scalar_at_t<D>> x) {
              return Vec<scalar_at_t<D>>(f(x));
          }),
         ...);
    }

    int in_ = 0;
    int out_ = 0;
    std::shared_ptr<const detail::Table> table_;
};

/// Real-valued smooth function (a SmoothMap with one output).
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(SmoothMap m) : map_(std::move(m)) {
        if (map_.out_dim() != 1) throw StructuralError("scalar field must have one output");
    }

    template <class F>
    static ScalarField from(int arity, F f) {
        return ScalarField(SmoothMap::from(arity, 1, [f](auto x) {
            using T = elem_t<decltype(x)>;
            return Vec<T>{T(f(x))};
        }));
    }

    template <class T>
    T operator()(std::span<const T> x) const { return map_(x)[0]; }
    template <class T>
    T operator()(const Vec<T>& x) const { return map_(std::span<const T>(x))[0]; }

    int arity() const { return map_.in_dim(); }
    const SmoothMap& map() const { return map_; }

private:
    SmoothMap map_;
};

/// Throws NumericError when a derived field would need scalars deeper than the tower.
template <class T, int Extra>
constexpr bool depth_available() { return depth_v<T> + Extra <= kMaxDepth; }

[[noreturn]] inline void throw_depth_exceeded() {
    throw NumericError("differentiation depth exceeded for a derived field");
}

}  // namespace routh
