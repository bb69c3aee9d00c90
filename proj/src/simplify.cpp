#include "crres/simplify.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace crres {

namespace {

struct Blowup {};

struct Budget {
    std::size_t left;
    void spend(std::size_t n) {
        if (n > left) throw Blowup{};
        left -= n;
    }
};

// -- monomials over atoms ----------------------------------------------------
//
// An atom is a canonical Coord/Pi/Exp/Sin/Cos node. Monomials are sorted
// (atom, exponent) lists with positive exponents; polynomials are monomial
// maps with complex rational coefficients. Denominators are kept factored
// as (normalized base polynomial, power) multisets, so cancellation never
// needs a multivariate gcd.

using Mono = std::vector<std::pair<NodePtr, int>>;

int compare_mono(const Mono& a, const Mono& b) {
    // lex order, earliest atom most significant; larger exponent = larger mono
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (i == a.size()) return -1; // b has a factor a lacks -> b larger
        if (j == b.size()) return 1;
        int c = compare(a[i].first, b[j].first);
        if (c < 0) return 1;  // a has the smaller atom with positive exponent
        if (c > 0) return -1;
        if (a[i].second != b[j].second)
            return a[i].second > b[j].second ? 1 : -1;
        ++i;
        ++j;
    }
    return 0;
}

struct MonoLess {
    bool operator()(const Mono& a, const Mono& b) const {
        return compare_mono(a, b) < 0;
    }
};

using Poly = std::map<Mono, CRat, MonoLess>;

Poly poly_const(const CRat& c) {
    Poly p;
    if (!c.is_zero()) p[{}] = c;
    return p;
}

Poly poly_atom(NodePtr atom) {
    Poly p;
    p[Mono{{std::move(atom), 1}}] = CRat(1);
    return p;
}

void poly_add_term(Poly& p, const Mono& m, const CRat& c) {
    if (c.is_zero()) return;
    auto it = p.find(m);
    if (it == p.end()) {
        p.emplace(m, c);
    } else {
        it->second += c;
        if (it->second.is_zero()) p.erase(it);
    }
}

Poly poly_add(const Poly& a, const Poly& b) {
    Poly r = a;
    for (const auto& [m, c] : b) poly_add_term(r, m, c);
    return r;
}

Poly poly_neg(const Poly& a) {
    Poly r;
    for (const auto& [m, c] : a) r.emplace(m, -c);
    return r;
}

Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (i == a.size()) { r.push_back(b[j++]); continue; }
        if (j == b.size()) { r.push_back(a[i++]); continue; }
        int c = compare(a[i].first, b[j].first);
        if (c < 0) r.push_back(a[i++]);
        else if (c > 0) r.push_back(b[j++]);
        else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i; ++j;
        }
    }
    return r;
}

Poly poly_mul(const Poly& a, const Poly& b, Budget& bud) {
    bud.spend(a.size() * b.size());
    Poly r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b)
            poly_add_term(r, mono_mul(ma, mb), ca * cb);
    return r;
}

Poly poly_scale(const Poly& a, const CRat& c) {
    Poly r;
    if (c.is_zero()) return r;
    for (const auto& [m, v] : a) r.emplace(m, v * c);
    return r;
}

/// Divides mono a by b; nullopt unless b's exponents all fit inside a's.
std::optional<Mono> mono_div(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t i = 0;
    for (const auto& [atom, e] : b) {
        while (i < a.size() && compare(a[i].first, atom) < 0) r.push_back(a[i++]);
        if (i == a.size() || compare(a[i].first, atom) != 0 || a[i].second < e)
            return std::nullopt;
        if (a[i].second > e) r.emplace_back(a[i].first, a[i].second - e);
        ++i;
    }
    while (i < a.size()) r.push_back(a[i++]);
    return r;
}

/// Exact division a / b; nullopt when b does not divide a.
std::optional<Poly> poly_div_exact(const Poly& a, const Poly& b, Budget& bud) {
    if (b.empty()) throw DomainError("polynomial division by zero");
    Poly rem = a, quot;
    auto lead_b = std::prev(b.end());
    while (!rem.empty()) {
        bud.spend(b.size());
        auto lead_r = std::prev(rem.end());
        auto m = mono_div(lead_r->first, lead_b->first);
        if (!m) return std::nullopt;
        CRat c = lead_r->second / lead_b->second;
        poly_add_term(quot, *m, c);
        for (const auto& [mb, cb] : b)
            poly_add_term(rem, mono_mul(*m, mb), -(c * cb));
    }
    return quot;
}

int compare_poly(const Poly& a, const Poly& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    auto i = a.begin();
    auto j = b.begin();
    for (; i != a.end(); ++i, ++j) {
        int c = compare_mono(i->first, j->first);
        if (c) return c;
        if (!(i->second == j->second)) return i->second < j->second ? -1 : 1;
    }
    return 0;
}

/// Scales a nonconstant polynomial so its leading coefficient is 1.
/// Returns the removed scalar.
CRat normalize_base(Poly& p) {
    CRat lead = std::prev(p.end())->second;
    if (!lead.is_one()) {
        for (auto& [m, c] : p) c = c / lead;
    }
    return lead;
}

// -- factored rational sums --------------------------------------------------

struct PolyLess {
    bool operator()(const Poly& a, const Poly& b) const {
        return compare_poly(a, b) < 0;
    }
};

using Den = std::map<Poly, int, PolyLess>; // factor -> power (>0)

int compare_den(const Den& a, const Den& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    auto i = a.begin();
    auto j = b.begin();
    for (; i != a.end(); ++i, ++j) {
        int c = compare_poly(i->first, j->first);
        if (c) return c;
        if (i->second != j->second) return i->second < j->second ? -1 : 1;
    }
    return 0;
}

struct DenLess {
    bool operator()(const Den& a, const Den& b) const { return compare_den(a, b) < 0; }
};

/// Canonical carrier: a sum of fractions N/D with factored denominators.
using RatSum = std::map<Den, Poly, DenLess>;

void rs_insert(RatSum& r, const Den& d, const Poly& n) {
    if (n.empty()) return;
    auto it = r.find(d);
    if (it == r.end()) {
        r.emplace(d, n);
    } else {
        it->second = poly_add(it->second, n);
        if (it->second.empty()) r.erase(it);
    }
}

RatSum rs_const(const CRat& c) {
    RatSum r;
    rs_insert(r, {}, poly_const(c));
    return r;
}

RatSum rs_add(const RatSum& a, const RatSum& b) {
    RatSum r = a;
    for (const auto& [d, n] : b) rs_insert(r, d, n);
    return r;
}

RatSum rs_neg(const RatSum& a) {
    RatSum r;
    for (const auto& [d, n] : a) r.emplace(d, poly_neg(n));
    return r;
}

/// Cancels denominator factors that exactly divide the numerator.
void reduce_part(Den& d, Poly& n, Budget& bud) {
    if (n.empty()) { d.clear(); return; }
    for (auto it = d.begin(); it != d.end();) {
        bool erased = false;
        while (it->second > 0) {
            auto q = poly_div_exact(n, it->first, bud);
            if (!q) break;
            n = std::move(*q);
            if (--it->second == 0) {
                it = d.erase(it);
                erased = true;
                break;
            }
            if (n.size() == 1 && n.begin()->first.empty()) break; // constant
        }
        if (!erased) ++it;
    }
}

RatSum rs_mul(const RatSum& a, const RatSum& b, Budget& bud) {
    RatSum r;
    for (const auto& [da, na] : a) {
        for (const auto& [db, nb] : b) {
            Den d = da;
            for (const auto& [f, k] : db) d[f] += k;
            Poly n = poly_mul(na, nb, bud);
            reduce_part(d, n, bud);
            rs_insert(r, d, n);
        }
    }
    return r;
}

RatSum rs_pow(const RatSum& a, int k, Budget& bud);

/// Collapses a multi-part sum over its common denominator.
std::pair<Den, Poly> rs_collect(const RatSum& a, Budget& bud) {
    Den lcm;
    for (const auto& [d, n] : a)
        for (const auto& [f, k] : d)
            if (lcm[f] < k) lcm[f] = k;
    Poly total;
    for (const auto& [d, n] : a) {
        Poly t = n;
        for (const auto& [f, k] : lcm) {
            int have = 0;
            auto it = d.find(f);
            if (it != d.end()) have = it->second;
            for (int j = have; j < k; ++j) t = poly_mul(t, f, bud);
        }
        total = poly_add(total, t);
    }
    return {lcm, total};
}

RatSum rs_invert(const RatSum& a, Budget& bud) {
    if (a.empty()) throw DomainError("division by zero expression");
    Den d;
    Poly n;
    if (a.size() == 1) {
        d = a.begin()->first;
        n = a.begin()->second;
    } else {
        std::tie(d, n) = rs_collect(a, bud);
        if (n.empty()) throw DomainError("division by zero expression");
    }
    // invert n/d
    Poly num = poly_const(CRat(1));
    for (const auto& [f, k] : d)
        for (int j = 0; j < k; ++j) num = poly_mul(num, f, bud);
    Den den;
    if (n.size() == 1 && n.begin()->first.empty()) {
        num = poly_scale(num, CRat(1) / n.begin()->second);
    } else {
        Poly base = n;
        CRat lead = normalize_base(base);
        num = poly_scale(num, CRat(1) / lead);
        den[std::move(base)] = 1;
    }
    Poly nn = std::move(num);
    reduce_part(den, nn, bud);
    RatSum r;
    rs_insert(r, den, nn);
    return r;
}

RatSum rs_pow(const RatSum& a, int k, Budget& bud) {
    if (k == 0) return rs_const(CRat(1));
    if (k < 0) return rs_pow(rs_invert(a, bud), -k, bud);
    RatSum base = a;
    RatSum r = rs_const(CRat(1));
    while (k) {
        if (k & 1) r = rs_mul(r, base, bud);
        k >>= 1;
        if (k) base = rs_mul(base, base, bud);
    }
    return r;
}

// -- conjugation elimination -------------------------------------------------

NodePtr strip_conj(const NodePtr& n, bool conjugate);

NodePtr rebuild(const NodePtr& n, bool conjugate) {
    Node out;
    out.kind = n->kind;
    out.cval = conjugate ? n->cval.conj() : n->cval;
    out.coord = n->coord;
    out.expo = n->expo;
    out.kids.reserve(n->kids.size());
    for (const auto& k : n->kids) out.kids.push_back(strip_conj(k, conjugate));
    return std::make_shared<const Node>(std::move(out));
}

NodePtr strip_conj(const NodePtr& n, bool conjugate) {
    if (n->kind == Kind::Conj) return strip_conj(n->kids[0], !conjugate);
    // chart coordinates are real, so conjugation distributes through
    // every remaining operation and lands on the constants
    return rebuild(n, conjugate);
}

// -- canonicalization --------------------------------------------------------

NodePtr emit(const RatSum& r);

bool poly_is_negative_lead(const Poly& p) {
    const CRat& c = std::prev(p.end())->second;
    return c.re < 0 || (c.re == 0 && c.im < 0);
}

RatSum canon(const NodePtr& n, Budget& bud);

/// Multiplies acc by tree^power, keeping Mul/Pow denominator spellings
/// factored instead of expanding them.
void mul_power(RatSum& acc, const NodePtr& tree, int power, Budget& bud) {
    if (power == 0) return;
    switch (tree->kind) {
    case Kind::Mul:
        for (const auto& k : tree->kids) mul_power(acc, k, power, bud);
        return;
    case Kind::Pow:
        mul_power(acc, tree->kids[0], power * tree->expo, bud);
        return;
    case Kind::Div:
        mul_power(acc, tree->kids[0], power, bud);
        mul_power(acc, tree->kids[1], -power, bud);
        return;
    default: {
        RatSum r = canon(tree, bud);
        if (power < 0) {
            if (r.size() == 1 && r.begin()->first.empty()) {
                // plain polynomial: keep it as a single denominator factor
                Poly base = r.begin()->second;
                if (base.empty()) throw DomainError("division by zero expression");
                RatSum f;
                if (base.size() == 1 && base.begin()->first.empty()) {
                    f = rs_const(CRat(1) / base.begin()->second);
                } else {
                    CRat lead = normalize_base(base);
                    Den d;
                    d[std::move(base)] = 1;
                    RatSum tmp;
                    rs_insert(tmp, d, poly_const(CRat(1) / lead));
                    f = std::move(tmp);
                }
                acc = rs_mul(acc, rs_pow(f, -power, bud), bud);
            } else {
                acc = rs_mul(acc, rs_pow(rs_invert(r, bud), -power, bud), bud);
            }
        } else {
            acc = rs_mul(acc, rs_pow(r, power, bud), bud);
        }
        return;
    }
    }
}

NodePtr make_func(Kind k, NodePtr arg) {
    Node n;
    n.kind = k;
    n.kids = {std::move(arg)};
    return std::make_shared<const Node>(std::move(n));
}

RatSum canon_func(Kind k, const NodePtr& rawarg, Budget& bud) {
    RatSum a = canon(rawarg, bud);
    if (a.empty()) { // argument is zero
        switch (k) {
        case Kind::Exp: return rs_const(CRat(1));
        case Kind::Sin: return {};
        case Kind::Cos: return rs_const(CRat(1));
        default: break;
        }
    }
    bool negate_out = false;
    if (!a.empty() && (k == Kind::Sin || k == Kind::Cos)) {
        if (poly_is_negative_lead(a.begin()->second)) {
            a = rs_neg(a);
            if (k == Kind::Sin) negate_out = true;
        }
    }
    RatSum r;
    rs_insert(r, {}, poly_atom(make_func(k, emit(a))));
    return negate_out ? rs_neg(r) : r;
}

RatSum canon(const NodePtr& n, Budget& bud) {
    switch (n->kind) {
    case Kind::Const:
        return rs_const(n->cval);
    case Kind::Coord:
    case Kind::Pi: {
        RatSum r;
        rs_insert(r, {}, poly_atom(n));
        return r;
    }
    case Kind::Add: {
        RatSum r;
        for (const auto& k : n->kids) r = rs_add(r, canon(k, bud));
        return r;
    }
    case Kind::Mul: {
        RatSum r = rs_const(CRat(1));
        mul_power(r, n, 1, bud);
        return r;
    }
    case Kind::Pow: {
        RatSum r = rs_const(CRat(1));
        mul_power(r, n->kids[0], n->expo, bud);
        return r;
    }
    case Kind::Div: {
        RatSum r = rs_const(CRat(1));
        mul_power(r, n->kids[0], 1, bud);
        mul_power(r, n->kids[1], -1, bud);
        return r;
    }
    case Kind::Exp:
        return canon_func(Kind::Exp, n->kids[0], bud);
    case Kind::Sin:
        return canon_func(Kind::Sin, n->kids[0], bud);
    case Kind::Cos:
        return canon_func(Kind::Cos, n->kids[0], bud);
    case Kind::Conj:
        throw DomainError("conjugation should have been eliminated");
    }
    throw DomainError("unreachable expression kind");
}

// -- emission ----------------------------------------------------------------

NodePtr emit_mono_term(const Mono& m, const CRat& c) {
    std::vector<NodePtr> factors;
    if (!c.is_one() || m.empty()) {
        Node cn;
        cn.kind = Kind::Const;
        cn.cval = c;
        factors.push_back(std::make_shared<const Node>(std::move(cn)));
    }
    for (const auto& [atom, e] : m) {
        if (e == 1) {
            factors.push_back(atom);
        } else {
            Node p;
            p.kind = Kind::Pow;
            p.expo = e;
            p.kids = {atom};
            factors.push_back(std::make_shared<const Node>(std::move(p)));
        }
    }
    if (factors.size() == 1) return factors[0];
    Node mul;
    mul.kind = Kind::Mul;
    mul.kids = std::move(factors);
    return std::make_shared<const Node>(std::move(mul));
}

NodePtr emit_poly(const Poly& p) {
    if (p.empty()) {
        Node z;
        z.kind = Kind::Const;
        z.cval = CRat(0);
        return std::make_shared<const Node>(std::move(z));
    }
    std::vector<NodePtr> terms;
    // leading monomial first
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        terms.push_back(emit_mono_term(it->first, it->second));
    if (terms.size() == 1) return terms[0];
    Node add;
    add.kind = Kind::Add;
    add.kids = std::move(terms);
    return std::make_shared<const Node>(std::move(add));
}

NodePtr emit_den(const Den& d) {
    std::vector<NodePtr> factors;
    for (const auto& [f, k] : d) {
        NodePtr base = emit_poly(f);
        if (k == 1) {
            factors.push_back(base);
        } else {
            Node p;
            p.kind = Kind::Pow;
            p.expo = k;
            p.kids = {base};
            factors.push_back(std::make_shared<const Node>(std::move(p)));
        }
    }
    if (factors.size() == 1) return factors[0];
    Node mul;
    mul.kind = Kind::Mul;
    mul.kids = std::move(factors);
    return std::make_shared<const Node>(std::move(mul));
}

NodePtr emit(const RatSum& r) {
    if (r.empty()) {
        Node z;
        z.kind = Kind::Const;
        z.cval = CRat(0);
        return std::make_shared<const Node>(std::move(z));
    }
    std::vector<NodePtr> parts;
    for (const auto& [d, n] : r) {
        NodePtr num = emit_poly(n);
        if (d.empty()) {
            parts.push_back(num);
        } else {
            Node div;
            div.kind = Kind::Div;
            div.kids = {num, emit_den(d)};
            parts.push_back(std::make_shared<const Node>(std::move(div)));
        }
    }
    if (parts.size() == 1) return parts[0];
    Node add;
    add.kind = Kind::Add;
    add.kids = std::move(parts);
    return std::make_shared<const Node>(std::move(add));
}

RatSum canonical_ratsum(const ScalarExpr& e, Budget& bud) {
    NodePtr noconj = strip_conj(e.node(), false);
    return canon(noconj, bud);
}

// -- atom scanning -----------------------------------------------------------

bool mono_algebraic(const Mono& m) {
    for (const auto& [atom, e] : m) {
        (void)e;
        if (atom->kind == Kind::Exp || atom->kind == Kind::Sin ||
            atom->kind == Kind::Cos)
            return false;
    }
    return true;
}

bool poly_algebraic(const Poly& p) {
    for (const auto& [m, c] : p) {
        (void)c;
        if (!mono_algebraic(m)) return false;
    }
    return true;
}

bool rs_algebraic(const RatSum& r) {
    for (const auto& [d, n] : r) {
        if (!poly_algebraic(n)) return false;
        for (const auto& [f, k] : d) {
            (void)k;
            if (!poly_algebraic(f)) return false;
        }
    }
    return true;
}

bool rs_has_pi(const RatSum& r) {
    auto mono_pi = [](const Mono& m) {
        for (const auto& [atom, e] : m) {
            (void)e;
            if (atom->kind == Kind::Pi) return true;
        }
        return false;
    };
    for (const auto& [d, n] : r) {
        for (const auto& [m, c] : n) {
            (void)c;
            if (mono_pi(m)) return true;
        }
        for (const auto& [f, k] : d) {
            (void)k;
            for (const auto& [m, c] : f) {
                (void)c;
                if (mono_pi(m)) return true;
            }
        }
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------

ScalarExpr simplify(const ScalarExpr& e) {
    if (e.empty()) return e;
    Budget bud{4u << 20};
    try {
        RatSum r = canonical_ratsum(e, bud);
        return ScalarExpr(emit(r), e.coords());
    } catch (const Blowup&) {
        return e; // best effort: canonicalization exceeded its budget
    }
}

SampleBox SampleBox::unit(int dim, double a, double b) {
    SampleBox box;
    box.lo.assign(dim, a);
    box.hi.assign(dim, b);
    return box;
}

bool is_rational_class(const ScalarExpr& e) {
    Budget bud{4u << 20};
    try {
        RatSum r = canonical_ratsum(e, bud);
        return rs_algebraic(r) && !rs_has_pi(r);
    } catch (const Blowup&) {
        return false;
    }
}

std::optional<ScalarExpr> divide_exact(const ScalarExpr& num,
                                       const ScalarExpr& den) {
    Budget bud{4u << 20};
    try {
        RatSum rden = canonical_ratsum(den, bud);
        if (rden.size() != 1 || !rden.begin()->first.empty()) return std::nullopt;
        const Poly& B = rden.begin()->second;
        if (B.empty()) throw DomainError("division by zero expression");
        RatSum rnum = canonical_ratsum(num, bud);
        RatSum out;
        for (const auto& [d, n] : rnum) {
            auto q = poly_div_exact(n, B, bud);
            if (!q) return std::nullopt;
            rs_insert(out, d, *q);
        }
        return ScalarExpr(emit(out), num.coords());
    } catch (const Blowup&) {
        return std::nullopt;
    }
}

ZeroCheck is_zero(const ScalarExpr& e, const ZeroTestOptions& opt) {
    ZeroCheck out;
    if (e.empty()) {
        out.verdict = Verdict::ExactZero;
        return out;
    }
    bool canonical_ok = false;
    RatSum r;
    {
        Budget bud{4u << 20};
        try {
            r = canonical_ratsum(e, bud);
            canonical_ok = true;
        } catch (const Blowup&) {
        }
    }
    if (canonical_ok) {
        if (r.empty()) {
            out.verdict = Verdict::ExactZero;
            return out;
        }
        // Over Q(i), a polynomial identity in algebraically independent
        // atoms (coordinates and pi) decides exactly.
        if (rs_algebraic(r)) {
            Budget bud{opt.budget};
            try {
                auto [lcm, total] = rs_collect(r, bud);
                (void)lcm;
                out.verdict = total.empty() ? Verdict::ExactZero : Verdict::ExactNonzero;
                return out;
            } catch (const Blowup&) {
            }
        }
    }
    // probabilistic fallback
    int dim = e.coords()->dim();
    SampleBox box = opt.box.value_or(SampleBox::unit(dim));
    std::mt19937 rng(opt.seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    int good = 0, attempts = 0;
    const int max_attempts = opt.samples * 4;
    while (good < opt.samples && attempts < max_attempts) {
        ++attempts;
        std::vector<double> pt(dim);
        for (int k = 0; k < dim; ++k)
            pt[k] = box.lo[k] + (box.hi[k] - box.lo[k]) * uni(rng);
        try {
            auto v = e.evaluate(pt);
            ++good;
            if (std::abs(v) > opt.tol) {
                out.verdict = Verdict::ProbablyNonzero;
                out.witness = pt;
                return out;
            }
        } catch (const EvalError&) {
            continue; // resample
        }
    }
    out.verdict = good >= opt.samples ? Verdict::ProbablyZero : Verdict::Undecidable;
    return out;
}

} // namespace crres
