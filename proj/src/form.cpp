#include "crres/form.hpp"

#include <algorithm>

namespace crres {

namespace {

/// Sorts idx in place; returns the permutation sign, or 0 on a repeat.
int sort_sign(MultiIndex& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        std::size_t j = i;
        while (j > 0 && idx[j - 1] > idx[j]) {
            std::swap(idx[j - 1], idx[j]);
            sign = -sign;
            --j;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

} // namespace

DifferentialForm::DifferentialForm(int degree, CoordsPtr coords)
    : degree_(degree), coords_(std::move(coords)) {
    if (degree_ < 0) throw DomainError("form degree must be nonnegative");
}

DifferentialForm DifferentialForm::zero(int degree, CoordsPtr coords) {
    return DifferentialForm(degree, std::move(coords));
}

DifferentialForm DifferentialForm::from_scalar(const ScalarExpr& f) {
    DifferentialForm w(0, f.coords());
    w.set_coefficient({}, f);
    return w;
}

DifferentialForm DifferentialForm::d_coord(int i, CoordsPtr coords) {
    DifferentialForm w(1, coords);
    w.set_coefficient({i}, ScalarExpr::integer(1, coords));
    return w;
}

ScalarExpr DifferentialForm::coefficient(const MultiIndex& idx) const {
    auto it = comps_.find(idx);
    if (it != comps_.end()) return it->second;
    return ScalarExpr::integer(0, coords_);
}

void DifferentialForm::set_coefficient(const MultiIndex& idx, const ScalarExpr& c) {
    if (static_cast<int>(idx.size()) != degree_)
        throw DomainError("multi-index length must match form degree");
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= coords_->dim())
            throw DomainError("multi-index out of range");
        if (i > 0 && idx[i] <= idx[i - 1])
            throw DomainError("multi-index must be strictly increasing");
    }
    if (c.is_literal_zero()) comps_.erase(idx);
    else comps_[idx] = c;
}

void DifferentialForm::add_term(MultiIndex idx, ScalarExpr c) {
    if (static_cast<int>(idx.size()) != degree_)
        throw DomainError("multi-index length must match form degree");
    int sign = sort_sign(idx);
    if (sign == 0 || c.is_literal_zero()) return;
    ScalarExpr t = sign == 1 ? c : -c;
    auto it = comps_.find(idx);
    if (it == comps_.end()) comps_.emplace(std::move(idx), std::move(t));
    else it->second = it->second + t;
}

DifferentialForm DifferentialForm::simplified() const {
    DifferentialForm out(degree_, coords_);
    for (const auto& [idx, c] : comps_) {
        ScalarExpr s = simplify(c);
        if (!s.is_literal_zero()) out.comps_.emplace(idx, std::move(s));
    }
    return out;
}

void DifferentialForm::check(const DifferentialForm& o) const {
    if (!same_coords(coords_, o.coords_))
        throw DomainError("forms over different charts");
    if (degree_ != o.degree_) throw DomainError("form degrees differ");
}

DifferentialForm DifferentialForm::operator+(const DifferentialForm& o) const {
    check(o);
    DifferentialForm out = *this;
    for (const auto& [idx, c] : o.comps_) {
        auto it = out.comps_.find(idx);
        if (it == out.comps_.end()) out.comps_.emplace(idx, c);
        else it->second = it->second + c;
    }
    return out;
}

DifferentialForm DifferentialForm::operator-(const DifferentialForm& o) const {
    return *this + (-o);
}

DifferentialForm DifferentialForm::operator*(const ScalarExpr& s) const {
    DifferentialForm out(degree_, coords_);
    for (const auto& [idx, c] : comps_) out.comps_.emplace(idx, c * s);
    return out;
}

DifferentialForm DifferentialForm::operator-() const {
    DifferentialForm out(degree_, coords_);
    for (const auto& [idx, c] : comps_) out.comps_.emplace(idx, -c);
    return out;
}

ZeroCheck DifferentialForm::is_zero(const ZeroTestOptions& opt) const {
    ZeroCheck agg;
    agg.verdict = Verdict::ExactZero;
    for (const auto& [idx, c] : comps_) {
        ZeroCheck z = crres::is_zero(c, opt);
        if (!z.zero()) return z;
        if (z.verdict == Verdict::ProbablyZero) agg.verdict = Verdict::ProbablyZero;
    }
    return agg;
}

// ---------------------------------------------------------------------------

SmoothMap::SmoothMap(CoordsPtr src, CoordsPtr tgt, std::vector<ScalarExpr> comps)
    : source(std::move(src)), target(std::move(tgt)), components(std::move(comps)) {
    if (static_cast<int>(components.size()) != target->dim())
        throw DomainError("map component count must equal target dimension");
    for (const auto& c : components)
        if (!same_coords(c.coords(), source))
            throw DomainError("map components must use source coordinates");
}

std::vector<double> SmoothMap::apply(const std::vector<double>& pt) const {
    std::vector<double> out;
    out.reserve(components.size());
    for (const auto& c : components) {
        auto v = c.evaluate(pt);
        if (std::abs(v.imag()) > 1e-9)
            throw EvalError("map component evaluated to a non-real value");
        out.push_back(v.real());
    }
    return out;
}

SmoothMap SmoothMap::compose(const SmoothMap& g, const SmoothMap& f) {
    if (!same_coords(f.target, g.source))
        throw DomainError("compose: inner map target must match outer map source");
    std::vector<ScalarExpr> comps;
    comps.reserve(g.components.size());
    for (const auto& c : g.components)
        comps.push_back(c.substitute(f.components, f.source));
    return SmoothMap(f.source, g.target, std::move(comps));
}

// ---------------------------------------------------------------------------

VectorField::VectorField(CoordsPtr c, std::vector<ScalarExpr> v)
    : coords(std::move(c)), coeffs(std::move(v)) {
    if (static_cast<int>(coeffs.size()) != coords->dim())
        throw DomainError("vector field needs one coefficient per coordinate");
}

VectorField VectorField::zero(CoordsPtr c) {
    std::vector<ScalarExpr> v(c->dim(), ScalarExpr::integer(0, c));
    return VectorField(std::move(c), std::move(v));
}

VectorField VectorField::coordinate(int i, CoordsPtr c) {
    VectorField X = zero(c);
    X.coeffs.at(i) = ScalarExpr::integer(1, c);
    return X;
}

VectorField VectorField::wirtinger(const std::string& alias, const CoordsPtr& c,
                                   bool conjugate) {
    const ComplexAlias* a = c->complex_alias(alias);
    if (!a) throw DomainError("unknown complex alias: " + alias);
    VectorField X = zero(c);
    ScalarExpr half = ScalarExpr::constant(CRat(Rat(1, 2)), c);
    ScalarExpr ihalf = ScalarExpr::constant(CRat(Rat(0), Rat(1, 2)), c);
    X.coeffs.at(a->re) = half;
    // d/dz = (d/dx - i d/dy)/2 ; d/dzbar = (d/dx + i d/dy)/2
    X.coeffs.at(a->im) = conjugate ? ihalf : -ihalf;
    return X;
}

VectorField VectorField::operator+(const VectorField& o) const {
    if (!same_coords(coords, o.coords)) throw DomainError("vector fields over different charts");
    VectorField r = *this;
    for (int i = 0; i < coords->dim(); ++i) r.coeffs[i] = r.coeffs[i] + o.coeffs[i];
    return r;
}

VectorField VectorField::operator*(const ScalarExpr& s) const {
    VectorField r = *this;
    for (auto& c : r.coeffs) c = c * s;
    return r;
}

VectorField VectorField::conj() const {
    VectorField r = *this;
    for (auto& c : r.coeffs) c = c.conj();
    return r;
}

ScalarExpr VectorField::apply(const ScalarExpr& f) const {
    if (!same_coords(f.coords(), coords))
        throw DomainError("vector field applied across charts");
    ScalarExpr acc = ScalarExpr::integer(0, coords);
    for (int i = 0; i < coords->dim(); ++i)
        acc = acc + coeffs[i] * f.partial(i);
    return acc;
}

VectorField VectorField::bracket(const VectorField& o) const {
    if (!same_coords(coords, o.coords)) throw DomainError("vector fields over different charts");
    VectorField r = zero(coords);
    for (int k = 0; k < coords->dim(); ++k)
        r.coeffs[k] = apply(o.coeffs[k]) - o.apply(coeffs[k]);
    return r;
}

// ---------------------------------------------------------------------------

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b) {
    if (!same_coords(a.coords(), b.coords()))
        throw DomainError("wedge: forms over different charts");
    int deg = a.degree() + b.degree();
    DifferentialForm out(deg, a.coords());
    if (deg > a.coords()->dim()) return out; // zero by reasons of degree
    for (const auto& [ia, ca] : a.components()) {
        for (const auto& [ib, cb] : b.components()) {
            MultiIndex idx = ia;
            idx.insert(idx.end(), ib.begin(), ib.end());
            out.add_term(std::move(idx), ca * cb);
        }
    }
    return out.simplified();
}

DifferentialForm exterior_derivative(const DifferentialForm& a) {
    DifferentialForm out(a.degree() + 1, a.coords());
    if (a.degree() + 1 > a.coords()->dim()) return out;
    for (const auto& [idx, c] : a.components()) {
        for (int i = 0; i < a.coords()->dim(); ++i) {
            ScalarExpr dc = c.partial(i);
            if (dc.is_literal_zero()) continue;
            MultiIndex j;
            j.reserve(idx.size() + 1);
            j.push_back(i);
            j.insert(j.end(), idx.begin(), idx.end());
            out.add_term(std::move(j), std::move(dc));
        }
    }
    return out.simplified();
}

DifferentialForm pullback(const SmoothMap& F, const DifferentialForm& a) {
    if (!same_coords(F.target, a.coords()))
        throw DomainError("pullback: form does not live on the map target");
    DifferentialForm out(a.degree(), F.source);
    if (a.degree() > F.source->dim()) return out;
    // dF_i as 1-forms on the source
    std::vector<DifferentialForm> dF;
    dF.reserve(F.components.size());
    for (const auto& c : F.components)
        dF.push_back(exterior_derivative(DifferentialForm::from_scalar(c)));
    for (const auto& [idx, c] : a.components()) {
        ScalarExpr coeff = c.substitute(F.components, F.source);
        DifferentialForm term = DifferentialForm::from_scalar(coeff);
        for (int i : idx) term = wedge(term, dF[i]);
        out = out + term;
    }
    return out.simplified();
}

DifferentialForm contract(const VectorField& X, const DifferentialForm& a) {
    if (!same_coords(X.coords, a.coords()))
        throw DomainError("contract: field and form over different charts");
    if (a.degree() == 0)
        throw DomainError("contract: cannot contract a 0-form");
    DifferentialForm out(a.degree() - 1, a.coords());
    for (const auto& [idx, c] : a.components()) {
        for (std::size_t pos = 0; pos < idx.size(); ++pos) {
            const ScalarExpr& xi = X.coeffs[idx[pos]];
            if (xi.is_literal_zero()) continue;
            MultiIndex rest;
            rest.reserve(idx.size() - 1);
            for (std::size_t t = 0; t < idx.size(); ++t)
                if (t != pos) rest.push_back(idx[t]);
            ScalarExpr term = xi * c;
            if (pos % 2 == 1) term = -term;
            out.add_term(std::move(rest), std::move(term));
        }
    }
    return out.simplified();
}

} // namespace crres
