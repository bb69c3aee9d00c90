#include "crres/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <sstream>

namespace crres {

std::string to_string(const Rat& r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

std::string to_string(const CRat& c) {
    if (c.im == 0) return to_string(c.re);
    if (c.re == 0) {
        if (c.im == 1) return "i";
        if (c.im == -1) return "-i";
        return to_string(c.im) + "*i";
    }
    std::string im = (c.im == 1) ? "i" : (c.im == -1 ? "-i" : to_string(c.im) + "*i");
    if (!im.empty() && im[0] != '-') return to_string(c.re) + "+" + im;
    return to_string(c.re) + im;
}

// ---------------------------------------------------------------------------
// node construction and ordering
// ---------------------------------------------------------------------------

namespace {

NodePtr make_node(Node n) { return std::make_shared<const Node>(std::move(n)); }

NodePtr nconst(CRat v) {
    Node n;
    n.kind = Kind::Const;
    n.cval = std::move(v);
    return make_node(std::move(n));
}

NodePtr ncoord(int idx) {
    Node n;
    n.kind = Kind::Coord;
    n.coord = idx;
    return make_node(std::move(n));
}

NodePtr nary(Kind k, std::vector<NodePtr> kids) {
    Node n;
    n.kind = k;
    n.kids = std::move(kids);
    return make_node(std::move(n));
}

NodePtr npow(NodePtr base, int k) {
    Node n;
    n.kind = Kind::Pow;
    n.expo = k;
    n.kids = {std::move(base)};
    return make_node(std::move(n));
}

std::size_t hash_combine(std::size_t h, std::size_t v) {
    return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

} // namespace

std::size_t Node::hash() const {
    if (hash_cache) return hash_cache;
    std::size_t h = static_cast<std::size_t>(kind) * 1099511628211ULL;
    switch (kind) {
    case Kind::Const:
        h = hash_combine(h, std::hash<std::string>{}(to_string(cval)));
        break;
    case Kind::Coord:
        h = hash_combine(h, static_cast<std::size_t>(coord));
        break;
    case Kind::Pow:
        h = hash_combine(h, static_cast<std::size_t>(expo) + 0x7f);
        break;
    default:
        break;
    }
    for (const auto& k : kids) h = hash_combine(h, k->hash());
    hash_cache = h ? h : 1;
    return hash_cache;
}

int compare(const NodePtr& a, const NodePtr& b) {
    if (a.get() == b.get()) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
    case Kind::Const:
        if (a->cval == b->cval) return 0;
        return a->cval < b->cval ? -1 : 1;
    case Kind::Coord:
        if (a->coord == b->coord) return 0;
        return a->coord < b->coord ? -1 : 1;
    case Kind::Pow:
        if (a->expo != b->expo) return a->expo < b->expo ? -1 : 1;
        break;
    default:
        break;
    }
    if (a->kids.size() != b->kids.size())
        return a->kids.size() < b->kids.size() ? -1 : 1;
    for (std::size_t i = 0; i < a->kids.size(); ++i) {
        int c = compare(a->kids[i], b->kids[i]);
        if (c) return c;
    }
    return 0;
}

bool equal_nodes(const NodePtr& a, const NodePtr& b) {
    if (a.get() == b.get()) return true;
    if (a->hash() != b->hash()) return false;
    return compare(a, b) == 0;
}

// ---------------------------------------------------------------------------
// ScalarExpr surface
// ---------------------------------------------------------------------------

ScalarExpr ScalarExpr::constant(CRat v, CoordsPtr c) {
    return ScalarExpr(nconst(std::move(v)), std::move(c));
}

ScalarExpr ScalarExpr::pi(CoordsPtr c) {
    Node n;
    n.kind = Kind::Pi;
    return ScalarExpr(make_node(std::move(n)), std::move(c));
}

ScalarExpr ScalarExpr::coordinate(int idx, CoordsPtr c) {
    if (idx < 0 || idx >= c->dim()) throw DomainError("coordinate index out of range");
    return ScalarExpr(ncoord(idx), std::move(c));
}

ScalarExpr ScalarExpr::coordinate(const std::string& name, const CoordsPtr& c) {
    return coordinate(c->require(name), c);
}

ScalarExpr ScalarExpr::complex_alias(const std::string& name, const CoordsPtr& c) {
    const ComplexAlias* a = c->complex_alias(name);
    if (!a) throw DomainError("unknown complex alias: " + name);
    return coordinate(a->re, c) + iunit(c) * coordinate(a->im, c);
}

void ScalarExpr::check_same(const ScalarExpr& o) const {
    if (!same_coords(coords_, o.coords_))
        throw DomainError("expressions over different coordinate charts");
}

bool ScalarExpr::is_literal_zero() const {
    return node_ && node_->kind == Kind::Const && node_->cval.is_zero();
}

bool ScalarExpr::is_literal_one() const {
    return node_ && node_->kind == Kind::Const && node_->cval.is_one();
}

const CRat* ScalarExpr::as_const() const {
    if (node_ && node_->kind == Kind::Const) return &node_->cval;
    return nullptr;
}

ScalarExpr ScalarExpr::operator+(const ScalarExpr& o) const {
    check_same(o);
    if (is_literal_zero()) return o;
    if (o.is_literal_zero()) return *this;
    return ScalarExpr(nary(Kind::Add, {node_, o.node_}), coords_);
}

ScalarExpr ScalarExpr::operator-(const ScalarExpr& o) const { return *this + (-o); }

ScalarExpr ScalarExpr::operator*(const ScalarExpr& o) const {
    check_same(o);
    if (is_literal_zero() || o.is_literal_zero())
        return constant(CRat(0), coords_);
    if (is_literal_one()) return o;
    if (o.is_literal_one()) return *this;
    return ScalarExpr(nary(Kind::Mul, {node_, o.node_}), coords_);
}

ScalarExpr ScalarExpr::operator/(const ScalarExpr& o) const {
    check_same(o);
    if (o.is_literal_zero()) throw DomainError("division by literal zero");
    if (o.is_literal_one()) return *this;
    return ScalarExpr(nary(Kind::Div, {node_, o.node_}), coords_);
}

ScalarExpr ScalarExpr::operator-() const {
    return constant(CRat(-1), coords_) * (*this);
}

ScalarExpr ScalarExpr::pow(int k) const {
    if (k == 0) return constant(CRat(1), coords_);
    if (k == 1) return *this;
    return ScalarExpr(npow(node_, k), coords_);
}

ScalarExpr ScalarExpr::conj() const {
    return ScalarExpr(nary(Kind::Conj, {node_}), coords_);
}

ScalarExpr ScalarExpr::exp(const ScalarExpr& e) {
    return ScalarExpr(nary(Kind::Exp, {e.node_}), e.coords_);
}
ScalarExpr ScalarExpr::sin(const ScalarExpr& e) {
    return ScalarExpr(nary(Kind::Sin, {e.node_}), e.coords_);
}
ScalarExpr ScalarExpr::cos(const ScalarExpr& e) {
    return ScalarExpr(nary(Kind::Cos, {e.node_}), e.coords_);
}

// ---------------------------------------------------------------------------
// differentiation
// ---------------------------------------------------------------------------

namespace {

NodePtr diff_node(const NodePtr& n, int coord) {
    switch (n->kind) {
    case Kind::Const:
    case Kind::Pi:
        return nconst(CRat(0));
    case Kind::Coord:
        return nconst(CRat(n->coord == coord ? 1 : 0));
    case Kind::Add: {
        std::vector<NodePtr> kids;
        kids.reserve(n->kids.size());
        for (const auto& k : n->kids) kids.push_back(diff_node(k, coord));
        return nary(Kind::Add, std::move(kids));
    }
    case Kind::Mul: {
        std::vector<NodePtr> terms;
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
            std::vector<NodePtr> fac = n->kids;
            fac[i] = diff_node(n->kids[i], coord);
            terms.push_back(nary(Kind::Mul, std::move(fac)));
        }
        return nary(Kind::Add, std::move(terms));
    }
    case Kind::Pow: {
        // d base^k = k base^(k-1) base'
        NodePtr dbase = diff_node(n->kids[0], coord);
        return nary(Kind::Mul,
                    {nconst(CRat(n->expo)), npow(n->kids[0], n->expo - 1), dbase});
    }
    case Kind::Div: {
        // (a/b)' = a'/b - a b'/b^2
        NodePtr da = diff_node(n->kids[0], coord);
        NodePtr db = diff_node(n->kids[1], coord);
        NodePtr t1 = nary(Kind::Div, {da, n->kids[1]});
        NodePtr t2 = nary(Kind::Mul, {nconst(CRat(-1)),
                                      nary(Kind::Div,
                                           {nary(Kind::Mul, {n->kids[0], db}),
                                            npow(n->kids[1], 2)})});
        return nary(Kind::Add, {t1, t2});
    }
    case Kind::Exp:
        return nary(Kind::Mul, {diff_node(n->kids[0], coord), n});
    case Kind::Sin:
        return nary(Kind::Mul,
                    {diff_node(n->kids[0], coord), nary(Kind::Cos, {n->kids[0]})});
    case Kind::Cos:
        return nary(Kind::Mul, {nconst(CRat(-1)), diff_node(n->kids[0], coord),
                                nary(Kind::Sin, {n->kids[0]})});
    case Kind::Conj:
        // coordinates are real, so conjugation commutes with d/dx
        return nary(Kind::Conj, {diff_node(n->kids[0], coord)});
    }
    throw DomainError("unreachable expression kind");
}

} // namespace

ScalarExpr ScalarExpr::partial(int coord) const {
    if (coord < 0 || coord >= coords_->dim())
        throw DomainError("partial: coordinate index out of range");
    return ScalarExpr(diff_node(node_, coord), coords_);
}

ScalarExpr ScalarExpr::partial(const std::string& name) const {
    return partial(coords_->require(name));
}

// ---------------------------------------------------------------------------
// substitution
// ---------------------------------------------------------------------------

namespace {

NodePtr subst_node(const NodePtr& n, const std::vector<ScalarExpr>& repl) {
    switch (n->kind) {
    case Kind::Const:
    case Kind::Pi:
        return n;
    case Kind::Coord:
        return repl.at(n->coord).node();
    default: {
        Node out;
        out.kind = n->kind;
        out.cval = n->cval;
        out.coord = n->coord;
        out.expo = n->expo;
        out.kids.reserve(n->kids.size());
        for (const auto& k : n->kids) out.kids.push_back(subst_node(k, repl));
        return make_node(std::move(out));
    }
    }
}

} // namespace

ScalarExpr ScalarExpr::substitute(const std::vector<ScalarExpr>& repl,
                                  CoordsPtr target) const {
    if (static_cast<int>(repl.size()) != coords_->dim())
        throw DomainError("substitute: one replacement per coordinate required");
    for (const auto& r : repl)
        if (!same_coords(r.coords(), target))
            throw DomainError("substitute: replacement over wrong chart");
    return ScalarExpr(subst_node(node_, repl), std::move(target));
}

// ---------------------------------------------------------------------------
// numeric evaluation
// ---------------------------------------------------------------------------

namespace {

using C = std::complex<double>;

C eval_node(const NodePtr& n, const std::vector<double>& pt) {
    switch (n->kind) {
    case Kind::Const:
        return n->cval.to_complex();
    case Kind::Pi:
        return C(M_PI, 0.0);
    case Kind::Coord:
        return C(pt.at(n->coord), 0.0);
    case Kind::Add: {
        C s = 0;
        for (const auto& k : n->kids) s += eval_node(k, pt);
        return s;
    }
    case Kind::Mul: {
        C p = 1;
        for (const auto& k : n->kids) p *= eval_node(k, pt);
        return p;
    }
    case Kind::Pow: {
        C b = eval_node(n->kids[0], pt);
        int k = n->expo;
        if (k < 0) {
            if (std::abs(b) < 1e-300) throw EvalError("division by zero in power");
            b = 1.0 / b;
            k = -k;
        }
        C r = 1;
        while (k) {
            if (k & 1) r *= b;
            b *= b;
            k >>= 1;
        }
        return r;
    }
    case Kind::Div: {
        C den = eval_node(n->kids[1], pt);
        if (std::abs(den) < 1e-300) throw EvalError("division by zero");
        return eval_node(n->kids[0], pt) / den;
    }
    case Kind::Exp:
        return std::exp(eval_node(n->kids[0], pt));
    case Kind::Sin:
        return std::sin(eval_node(n->kids[0], pt));
    case Kind::Cos:
        return std::cos(eval_node(n->kids[0], pt));
    case Kind::Conj:
        return std::conj(eval_node(n->kids[0], pt));
    }
    throw EvalError("unreachable expression kind");
}

} // namespace

std::complex<double> ScalarExpr::evaluate(const std::vector<double>& point) const {
    if (static_cast<int>(point.size()) != coords_->dim())
        throw DomainError("evaluate: point dimension mismatch");
    C v = eval_node(node_, point);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw EvalError("non-finite value in evaluation");
    return v;
}

// ---------------------------------------------------------------------------
// printing
// ---------------------------------------------------------------------------

namespace {

int precedence(Kind k) {
    switch (k) {
    case Kind::Add: return 1;
    case Kind::Mul:
    case Kind::Div: return 2;
    case Kind::Pow: return 3;
    default: return 4;
    }
}

void print_node(std::ostream& os, const NodePtr& n, const Coordinates& coords,
                int parent_prec) {
    int prec = precedence(n->kind);
    bool parens = prec < parent_prec;
    switch (n->kind) {
    case Kind::Const: {
        std::string s = to_string(n->cval);
        bool atomic = s.find_first_of("+-*/") == std::string::npos ||
                      (s[0] == '-' && s.find_first_of("+-*/", 1) == std::string::npos &&
                       parent_prec <= 1);
        if (!atomic) os << "(" << s << ")";
        else os << s;
        return;
    }
    case Kind::Coord:
        os << coords.name(n->coord);
        return;
    case Kind::Pi:
        os << "pi";
        return;
    case Kind::Add: {
        if (parens) os << "(";
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
            if (i) os << " + ";
            print_node(os, n->kids[i], coords, prec);
        }
        if (parens) os << ")";
        return;
    }
    case Kind::Mul: {
        if (parens) os << "(";
        for (std::size_t i = 0; i < n->kids.size(); ++i) {
            if (i) os << "*";
            print_node(os, n->kids[i], coords, prec + 1);
        }
        if (parens) os << ")";
        return;
    }
    case Kind::Div: {
        if (parens) os << "(";
        print_node(os, n->kids[0], coords, prec + 1);
        os << "/";
        print_node(os, n->kids[1], coords, prec + 1);
        if (parens) os << ")";
        return;
    }
    case Kind::Pow: {
        if (parens) os << "(";
        print_node(os, n->kids[0], coords, prec + 1);
        os << "^";
        if (n->expo < 0) os << "(" << n->expo << ")";
        else os << n->expo;
        if (parens) os << ")";
        return;
    }
    case Kind::Exp:
    case Kind::Sin:
    case Kind::Cos:
    case Kind::Conj: {
        os << (n->kind == Kind::Exp   ? "exp"
               : n->kind == Kind::Sin ? "sin"
               : n->kind == Kind::Cos ? "cos"
                                      : "conj")
           << "(";
        print_node(os, n->kids[0], coords, 0);
        os << ")";
        return;
    }
    }
}

} // namespace

std::string ScalarExpr::to_string() const {
    if (!node_) return "<empty>";
    std::ostringstream os;
    print_node(os, node_, *coords_, 0);
    return os.str();
}

// ---------------------------------------------------------------------------
// parser
// ---------------------------------------------------------------------------

namespace {

struct Lexer {
    const std::string& s;
    std::size_t p = 0;

    void skip() {
        while (p < s.size() && std::isspace(static_cast<unsigned char>(s[p]))) ++p;
    }
    bool eof() {
        skip();
        return p >= s.size();
    }
    char peek() {
        skip();
        return p < s.size() ? s[p] : '\0';
    }
    bool accept(char c) {
        skip();
        if (p < s.size() && s[p] == c) {
            ++p;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c))
            throw ParseError(std::string("expected '") + c + "'", static_cast<int>(p));
    }
};

struct ExprParser {
    Lexer lx;
    CoordsPtr coords;

    explicit ExprParser(const std::string& text, CoordsPtr c)
        : lx{text}, coords(std::move(c)) {}

    ScalarExpr parse() {
        ScalarExpr e = sum();
        if (!lx.eof())
            throw ParseError("trailing input", static_cast<int>(lx.p));
        return e;
    }

    ScalarExpr sum() {
        ScalarExpr e = term();
        while (true) {
            if (lx.accept('+')) e = e + term();
            else if (lx.accept('-')) e = e - term();
            else return e;
        }
    }

    ScalarExpr term() {
        ScalarExpr e = unary();
        while (true) {
            if (lx.accept('*')) e = e * unary();
            else if (lx.accept('/')) e = e / unary();
            else return e;
        }
    }

    ScalarExpr unary() {
        if (lx.accept('-')) return -unary();
        if (lx.accept('+')) return unary();
        return power();
    }

    ScalarExpr power() {
        ScalarExpr base = primary();
        if (lx.accept('^')) {
            bool neg = lx.accept('-');
            int k = integer();
            return base.pow(neg ? -k : k);
        }
        return base;
    }

    int integer() {
        lx.skip();
        std::size_t start = lx.p;
        bool paren = lx.accept('(');
        bool neg = paren && lx.accept('-');
        lx.skip();
        std::string digits;
        while (lx.p < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.p])))
            digits += lx.s[lx.p++];
        if (digits.empty())
            throw ParseError("expected integer exponent", static_cast<int>(start));
        if (paren) lx.expect(')');
        long v = std::stol(digits);
        return static_cast<int>(neg ? -v : v);
    }

    ScalarExpr number() {
        lx.skip();
        std::string digits, frac;
        while (lx.p < lx.s.size() && std::isdigit(static_cast<unsigned char>(lx.s[lx.p])))
            digits += lx.s[lx.p++];
        if (lx.p < lx.s.size() && lx.s[lx.p] == '.') {
            ++lx.p;
            while (lx.p < lx.s.size() &&
                   std::isdigit(static_cast<unsigned char>(lx.s[lx.p])))
                frac += lx.s[lx.p++];
        }
        Rat v(digits.empty() ? "0" : digits);
        if (!frac.empty()) {
            Rat scale = 1;
            for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
            v += Rat(frac) / scale;
        }
        return ScalarExpr::constant(CRat(v), coords);
    }

    std::string identifier() {
        lx.skip();
        std::string id;
        while (lx.p < lx.s.size() &&
               (std::isalnum(static_cast<unsigned char>(lx.s[lx.p])) || lx.s[lx.p] == '_'))
            id += lx.s[lx.p++];
        return id;
    }

    ScalarExpr primary() {
        char c = lx.peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (lx.accept('(')) {
            ScalarExpr e = sum();
            lx.expect(')');
            return e;
        }
        std::size_t at = lx.p;
        std::string id = identifier();
        if (id.empty())
            throw ParseError("expected expression", static_cast<int>(at));
        if (id == "i") return ScalarExpr::iunit(coords);
        if (id == "pi") return ScalarExpr::pi(coords);
        if (id == "exp" || id == "sin" || id == "cos" || id == "conj") {
            lx.expect('(');
            ScalarExpr arg = sum();
            lx.expect(')');
            if (id == "exp") return ScalarExpr::exp(arg);
            if (id == "sin") return ScalarExpr::sin(arg);
            if (id == "cos") return ScalarExpr::cos(arg);
            return arg.conj();
        }
        if (id == "wp_trunc") {
            lx.expect('(');
            std::string alias = identifier();
            lx.expect(',');
            lx.skip();
            std::string num;
            while (lx.p < lx.s.size() &&
                   (std::isdigit(static_cast<unsigned char>(lx.s[lx.p])) ||
                    lx.s[lx.p] == '.'))
                num += lx.s[lx.p++];
            lx.expect(')');
            if (num.empty())
                throw ParseError("wp_trunc: expected radius", static_cast<int>(lx.p));
            return weierstrass_p_trunc(alias, std::stod(num), coords);
        }
        int idx = coords->index_of(id);
        if (idx >= 0) return ScalarExpr::coordinate(idx, coords);
        if (coords->complex_alias(id)) return ScalarExpr::complex_alias(id, coords);
        throw ParseError("unknown symbol '" + id + "'", static_cast<int>(at));
    }
};

} // namespace

ScalarExpr parse_expr(const std::string& text, const CoordsPtr& coords) {
    return ExprParser(text, coords).parse();
}

ScalarExpr weierstrass_p_trunc(const std::string& alias, double radius,
                               const CoordsPtr& coords) {
    const ComplexAlias* a = coords->complex_alias(alias);
    if (!a) throw DomainError("wp_trunc: unknown complex alias " + alias);
    double p1 = coords->period(a->re).value_or(1.0);
    double p2 = coords->period(a->im).value_or(1.0);
    // periods are expected to be integers for the exact lattice sum
    long ip1 = std::lround(p1), ip2 = std::lround(p2);
    if (std::abs(p1 - ip1) > 1e-12 || std::abs(p2 - ip2) > 1e-12 || ip1 <= 0 || ip2 <= 0)
        throw DomainError("wp_trunc requires positive integer periods");
    ScalarExpr z = ScalarExpr::complex_alias(alias, coords);
    ScalarExpr acc = (z * z).pow(-1) * ScalarExpr::integer(1, coords);
    acc = z.pow(-2);
    long mr = static_cast<long>(std::floor(radius / p1));
    long nr = static_cast<long>(std::floor(radius / p2));
    for (long m = -mr; m <= mr; ++m) {
        for (long n = -nr; n <= nr; ++n) {
            if (m == 0 && n == 0) continue;
            double wx = static_cast<double>(m * ip1);
            double wy = static_cast<double>(n * ip2);
            if (wx * wx + wy * wy > radius * radius + 1e-9) continue;
            CRat w(Rat(m * ip1), Rat(n * ip2));
            ScalarExpr wc = ScalarExpr::constant(w, coords);
            ScalarExpr w2 = ScalarExpr::constant(w * w, coords);
            acc = acc + ((z - wc).pow(-2) - ScalarExpr::integer(1, coords) / w2);
        }
    }
    return acc;
}

} // namespace crres
