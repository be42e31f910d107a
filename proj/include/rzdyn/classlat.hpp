#pragma once

// Classes on the tower of blowups of a base surface.
//
// A Cartier class is stored as its incarnation on the base surface plus a
// finitely supported coordinate vector in the basis {alpha_E} of total
// transforms of exceptional primes. The basis is orthonormal for minus the
// intersection form and orthogonal to the base, so
//
//     (a . b) = gram(a_base, b_base) - sum_E c_E(a) c_E(b).
//
// Sign convention: c_E(alpha_E) = +1, (alpha_E^2) = -1, and therefore
// (a . alpha_E) = -c_E(a). Positive coordinates mean effective exceptional
// support.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "rational.hpp"

namespace rzdyn {

/// H^{1,1} of the base surface: a Minkowski lattice with named generators.
struct BaseLattice {
    std::vector<std::string> labels;
    QMatrix gram;
    std::optional<QVector> canonical;

    std::size_t rank() const noexcept { return labels.size(); }

    /// P^2 with the line class H, (H^2) = 1 and K = -3H.
    static BaseLattice projective_plane() {
        BaseLattice b;
        b.labels = {"H"};
        b.gram = QMatrix::from_rows({{Rational(1)}});
        b.canonical = QVector{Rational(-3)};
        return b;
    }

    /// Throws ValidationError unless gram is symmetric of signature (1, rank-1).
    void validate() const {
        if (labels.empty()) throw ValidationError("base lattice must have positive rank");
        if (gram.rows() != rank() || gram.cols() != rank())
            throw ValidationError("gram matrix does not match the number of labels");
        for (std::size_t i = 0; i < rank(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (gram(i, j) != gram(j, i)) throw ValidationError("gram matrix is not symmetric");
        auto sig = signature(gram);
        if (sig.positive != 1 || sig.negative != rank() - 1)
            throw ValidationError("gram matrix is not of Minkowski type");
        if (canonical && canonical->size() != rank())
            throw ValidationError("canonical class has wrong length");
    }
};

struct BasePoint {
    std::string label;
    bool operator==(const BasePoint&) const = default;
};

struct PrimeParent {
    std::string id;
    bool operator==(const PrimeParent&) const = default;
};

using Parent = std::variant<BasePoint, PrimeParent>;

/// An exceptional prime: the divisor created by blowing up a point lying on
/// its parent (or on the base surface).
struct ExcPrime {
    std::string id;
    Parent parent;
    int level = 0;
};

using PrimeSet = std::set<std::string>;

class PrimeTree {
public:
    explicit PrimeTree(BaseLattice base) : base_(std::move(base)) { base_.validate(); }

    /// Appends a prime; parents must already be present. Returns the stored prime.
    const ExcPrime& add(std::string id, Parent parent) {
        if (index_.count(id)) throw ValidationError("duplicate prime id '" + id + "'");
        int level = 0;
        if (auto* p = std::get_if<PrimeParent>(&parent)) {
            auto it = index_.find(p->id);
            if (it == index_.end())
                throw ValidationError("prime '" + id + "' has unknown parent '" + p->id + "'");
            level = primes_[it->second].level + 1;
        }
        index_.emplace(id, primes_.size());
        primes_.push_back(ExcPrime{std::move(id), std::move(parent), level});
        return primes_.back();
    }

    const BaseLattice& base() const noexcept { return base_; }
    const std::vector<ExcPrime>& primes() const noexcept { return primes_; }
    std::size_t size() const noexcept { return primes_.size(); }

    bool contains(const std::string& id) const { return index_.count(id) != 0; }

    const ExcPrime& prime(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown prime '" + id + "'");
        return primes_[it->second];
    }

    /// Position in insertion order; parents always precede children.
    std::size_t position(const std::string& id) const {
        auto it = index_.find(id);
        if (it == index_.end()) throw ValidationError("unknown prime '" + id + "'");
        return it->second;
    }

    /// True iff every member of s is a prime of the tree and s contains its parents.
    bool is_parent_closed(const PrimeSet& s) const {
        for (const auto& id : s) {
            if (!contains(id)) return false;
            if (auto* p = std::get_if<PrimeParent>(&prime(id).parent))
                if (!s.count(p->id)) return false;
        }
        return true;
    }

    PrimeSet all() const {
        PrimeSet s;
        for (const auto& p : primes_) s.insert(p.id);
        return s;
    }

private:
    BaseLattice base_;
    std::vector<ExcPrime> primes_;
    std::unordered_map<std::string, std::size_t> index_;
};

using TreePtr = std::shared_ptr<const PrimeTree>;

class ClassVector {
public:
    ClassVector(TreePtr tree, QVector base, std::map<std::string, Rational> exc = {})
        : tree_(std::move(tree)), base_(std::move(base)) {
        if (!tree_) throw ValidationError("class vector needs an ambient tree");
        if (base_.size() != tree_->base().rank())
            throw ValidationError("base part has wrong length");
        for (auto& [id, c] : exc) {
            if (!tree_->contains(id)) throw ValidationError("coordinate on unknown prime '" + id + "'");
            if (c != 0) exc_.emplace(id, std::move(c));
        }
    }

    static ClassVector zero(TreePtr tree) {
        QVector b(tree->base().rank(), Rational(0));
        return ClassVector(std::move(tree), std::move(b));
    }

    static ClassVector exceptional(TreePtr tree, const std::string& id, Rational coeff = 1) {
        QVector b(tree->base().rank(), Rational(0));
        return ClassVector(std::move(tree), std::move(b), {{id, std::move(coeff)}});
    }

    const TreePtr& tree() const noexcept { return tree_; }
    const QVector& base() const noexcept { return base_; }
    const std::map<std::string, Rational>& exc() const noexcept { return exc_; }

    Rational coeff(const std::string& id) const {
        auto it = exc_.find(id);
        return it == exc_.end() ? Rational(0) : it->second;
    }

    PrimeSet support() const {
        PrimeSet s;
        for (const auto& [id, c] : exc_) s.insert(id);
        return s;
    }

    bool operator==(const ClassVector& o) const {
        return tree_ == o.tree_ && base_ == o.base_ && exc_ == o.exc_;
    }

    friend ClassVector operator+(const ClassVector& a, const ClassVector& b) { return combine(a, b, 1); }
    friend ClassVector operator-(const ClassVector& a, const ClassVector& b) { return combine(a, b, -1); }

    friend ClassVector operator*(const Rational& t, const ClassVector& a) {
        QVector base = a.base_;
        for (auto& x : base) x *= t;
        std::map<std::string, Rational> exc;
        for (const auto& [id, c] : a.exc_) exc.emplace(id, t * c);
        return ClassVector(a.tree_, std::move(base), std::move(exc));
    }

private:
    static ClassVector combine(const ClassVector& a, const ClassVector& b, int sign) {
        if (a.tree_ != b.tree_) throw AmbientMismatch("classes live over different prime trees");
        QVector base = a.base_;
        for (std::size_t i = 0; i < base.size(); ++i) base[i] += sign * b.base_[i];
        std::map<std::string, Rational> exc = a.exc_;
        for (const auto& [id, c] : b.exc_) exc[id] += sign * c;
        return ClassVector(a.tree_, std::move(base), std::move(exc));
    }

    TreePtr tree_;
    QVector base_;
    std::map<std::string, Rational> exc_;
};

inline void require_same_tree(const ClassVector& a, const ClassVector& b) {
    if (a.tree() != b.tree()) throw AmbientMismatch("classes live over different prime trees");
}

inline void require_model(const PrimeTree& tree, const PrimeSet& s) {
    if (!tree.is_parent_closed(s)) throw InvalidModel("prime set is not closed under parents");
}

/// Intersection pairing.
inline Rational pair(const ClassVector& a, const ClassVector& b) {
    require_same_tree(a, b);
    Rational s = bilinear(a.tree()->base().gram, a.base(), b.base());
    const auto& small = a.exc().size() <= b.exc().size() ? a.exc() : b.exc();
    const auto& large = a.exc().size() <= b.exc().size() ? b.exc() : a.exc();
    for (const auto& [id, c] : small) {
        auto it = large.find(id);
        if (it != large.end()) s -= c * it->second;
    }
    return s;
}

inline Rational self_intersection(const ClassVector& a) { return pair(a, a); }

/// Incarnation on the model whose exceptional primes are s.
inline ClassVector incarnation(const ClassVector& a, const PrimeSet& s) {
    require_model(*a.tree(), s);
    std::map<std::string, Rational> exc;
    for (const auto& [id, c] : a.exc())
        if (s.count(id)) exc.emplace(id, c);
    return ClassVector(a.tree(), a.base(), std::move(exc));
}

/// Self-intersections of the incarnations along an increasing chain of models.
inline std::vector<Rational> defect_sequence(const ClassVector& a, const std::vector<PrimeSet>& chain) {
    std::vector<Rational> out;
    out.reserve(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (i > 0 && !std::includes(chain[i].begin(), chain[i].end(), chain[i - 1].begin(), chain[i - 1].end()))
            throw InvalidModel("chain of models is not increasing");
        out.push_back(self_intersection(incarnation(a, chain[i])));
    }
    return out;
}

/// Incarnation of the canonical class on the model s: K_base + sum_{E in s} alpha_E.
inline ClassVector canonical_class(const TreePtr& tree, const PrimeSet& s) {
    if (!tree->base().canonical) throw ConfigurationError("base canonical class is not configured");
    require_model(*tree, s);
    std::map<std::string, Rational> exc;
    for (const auto& id : s) exc.emplace(id, Rational(1));
    return ClassVector(tree, *tree->base().canonical, std::move(exc));
}

/// (a_s . K_s) on the model s.
inline Rational canonical_pairing(const ClassVector& a, const PrimeSet& s) {
    return pair(incarnation(a, s), canonical_class(a.tree(), s));
}

/// A Weil class given lazily: a base part and a coefficient for every prime.
struct WeilClass {
    QVector base;
    std::function<Rational(const ExcPrime&)> coefficient;
};

/// The Cartier class determined by the incarnation of w on the model s.
inline ClassVector truncate(const TreePtr& tree, const WeilClass& w, const PrimeSet& s) {
    require_model(*tree, s);
    std::map<std::string, Rational> exc;
    for (const auto& id : s) exc.emplace(id, w.coefficient(tree->prime(id)));
    return ClassVector(tree, w.base, std::move(exc));
}

inline std::vector<Rational> defect_sequence(const TreePtr& tree, const WeilClass& w,
                                             const std::vector<PrimeSet>& chain) {
    std::vector<Rational> out;
    for (const auto& s : chain) out.push_back(self_intersection(truncate(tree, w, s)));
    for (std::size_t i = 1; i < chain.size(); ++i)
        if (!std::includes(chain[i].begin(), chain[i].end(), chain[i - 1].begin(), chain[i - 1].end()))
            throw InvalidModel("chain of models is not increasing");
    return out;
}

/// Gram matrix of the pairing on base (+) R^s, base coordinates first then s in order.
inline QMatrix model_gram(const PrimeTree& tree, const PrimeSet& s) {
    const std::size_t r = tree.base().rank();
    QMatrix g(r + s.size(), r + s.size());
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) g(i, j) = tree.base().gram(i, j);
    for (std::size_t k = 0; k < s.size(); ++k) g(r + k, r + k) = -1;
    return g;
}

inline QVector model_coordinates(const ClassVector& a, const PrimeSet& s) {
    QVector v = a.base();
    for (const auto& id : s) v.push_back(a.coeff(id));
    return v;
}

/// Hodge index at truncation: is the pairing negative definite on the
/// a-orthogonal classes supported on base (+) R^s? Requires (a^2) > 0.
inline bool negative_definite_on_orthogonal(const ClassVector& a, const PrimeSet& s) {
    require_model(*a.tree(), s);
    if (self_intersection(a) <= 0) throw PreconditionError("class must have positive self-intersection");
    const QMatrix g = model_gram(*a.tree(), s);
    const QVector ga = g * model_coordinates(incarnation(a, s), s);
    QMatrix functional(1, ga.size());
    for (std::size_t j = 0; j < ga.size(); ++j) functional(0, j) = ga[j];
    auto basis = nullspace(functional);
    if (basis.empty()) return true;
    QMatrix restricted(basis.size(), basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = i; j < basis.size(); ++j)
            restricted(i, j) = restricted(j, i) = bilinear(g, basis[i], basis[j]);
    return signature(restricted).negative == basis.size();
}

// ---------------------------------------------------------------------------
// JSON: primes as {id, parent, level}; classes as {base: ["p/q"], exc: {id: "p/q"}}.

inline nlohmann::json to_json(const BaseLattice& b) {
    nlohmann::json j;
    j["labels"] = b.labels;
    nlohmann::json g = nlohmann::json::array();
    for (std::size_t i = 0; i < b.rank(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t k = 0; k < b.rank(); ++k) row.push_back(to_string(b.gram(i, k)));
        g.push_back(row);
    }
    j["gram"] = g;
    if (b.canonical) {
        nlohmann::json k = nlohmann::json::array();
        for (const auto& x : *b.canonical) k.push_back(to_string(x));
        j["canonical"] = k;
    }
    return j;
}

inline BaseLattice base_lattice_from_json(const nlohmann::json& j) {
    try {
        BaseLattice b;
        b.labels = j.at("labels").get<std::vector<std::string>>();
        std::vector<std::vector<Rational>> rows;
        for (const auto& row : j.at("gram")) {
            rows.emplace_back();
            for (const auto& x : row) rows.back().push_back(parse_rational(x.get<std::string>()));
        }
        b.gram = QMatrix::from_rows(rows);
        if (j.contains("canonical")) {
            QVector k;
            for (const auto& x : j.at("canonical")) k.push_back(parse_rational(x.get<std::string>()));
            b.canonical = std::move(k);
        }
        b.validate();
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad base lattice JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const PrimeTree& t) {
    nlohmann::json j;
    j["schema"] = "v1";
    j["base"] = to_json(t.base());
    nlohmann::json primes = nlohmann::json::array();
    for (const auto& p : t.primes()) {
        nlohmann::json e;
        e["id"] = p.id;
        if (auto* bp = std::get_if<BasePoint>(&p.parent))
            e["parent"] = {{"base_point", bp->label}};
        else
            e["parent"] = {{"prime", std::get<PrimeParent>(p.parent).id}};
        e["level"] = p.level;
        primes.push_back(e);
    }
    j["primes"] = primes;
    return j;
}

inline PrimeTree prime_tree_from_json(const nlohmann::json& j) {
    try {
        PrimeTree t(base_lattice_from_json(j.at("base")));
        for (const auto& e : j.at("primes")) {
            const auto& par = e.at("parent");
            Parent parent = par.contains("prime") ? Parent{PrimeParent{par.at("prime").get<std::string>()}}
                                                  : Parent{BasePoint{par.at("base_point").get<std::string>()}};
            const auto& stored = t.add(e.at("id").get<std::string>(), parent);
            if (e.contains("level") && e.at("level").get<int>() != stored.level)
                throw ValidationError("prime '" + stored.id + "' has inconsistent level");
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad prime tree JSON: ") + e.what());
    }
}

inline nlohmann::json to_json(const ClassVector& a) {
    nlohmann::json j;
    nlohmann::json base = nlohmann::json::array();
    for (const auto& x : a.base()) base.push_back(to_string(x));
    j["base"] = base;
    nlohmann::json exc = nlohmann::json::object();
    for (const auto& [id, c] : a.exc()) exc[id] = to_string(c);
    j["exc"] = exc;
    return j;
}

inline ClassVector class_vector_from_json(const TreePtr& tree, const nlohmann::json& j) {
    try {
        QVector base;
        for (const auto& x : j.at("base")) base.push_back(parse_rational(x.get<std::string>()));
        std::map<std::string, Rational> exc;
        for (const auto& [id, x] : j.at("exc").items()) exc.emplace(id, parse_rational(x.get<std::string>()));
        return ClassVector(tree, std::move(base), std::move(exc));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("bad class JSON: ") + e.what());
    }
}

}  // namespace rzdyn
