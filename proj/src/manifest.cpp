#include "crres/manifest.hpp"

#include <fstream>
#include <functional>
#include <future>
#include <nlohmann/json.hpp>
#include <sstream>
#include <variant>

namespace crres {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// manifest scanner
// ---------------------------------------------------------------------------

struct Scanner {
    std::string text;
    std::size_t pos = 0;

    std::pair<int, int> line_col(std::size_t at) const {
        int line = 1, col = 1;
        for (std::size_t i = 0; i < at && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        return {line, col};
    }

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        auto [l, c] = line_col(at);
        throw ManifestError(msg, l, c);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos); }

    void skip() {
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos;
            } else {
                break;
            }
        }
    }

    bool eof() {
        skip();
        return pos >= text.size();
    }

    char peek() {
        skip();
        return pos < text.size() ? text[pos] : '\0';
    }

    bool accept(char c) {
        skip();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    bool accept_word(const std::string& w) {
        skip();
        std::size_t save = pos;
        std::string id = ident_raw();
        if (id == w) return true;
        pos = save;
        return false;
    }

    std::string ident_raw() {
        std::string id;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '_'))
            id += text[pos++];
        return id;
    }

    std::string ident() {
        skip();
        std::size_t at = pos;
        std::string id = ident_raw();
        if (id.empty()) fail("expected identifier", at);
        return id;
    }

    double number() {
        skip();
        std::size_t at = pos;
        std::string num;
        if (pos < text.size() && (text[pos] == '-' || text[pos] == '+'))
            num += text[pos++];
        bool any = false;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '.' || text[pos] == 'e' || text[pos] == 'E' ||
                ((text[pos] == '-' || text[pos] == '+') && !num.empty() &&
                 (num.back() == 'e' || num.back() == 'E')))) {
            num += text[pos++];
            any = true;
        }
        if (!any) fail("expected number", at);
        // p/q rationals in option positions
        if (pos < text.size() && text[pos] == '/') {
            ++pos;
            std::string den;
            while (pos < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[pos])))
                den += text[pos++];
            if (den.empty()) fail("expected denominator", pos);
            return std::stod(num) / std::stod(den);
        }
        return std::stod(num);
    }

    long integer() {
        skip();
        std::size_t at = pos;
        std::string num;
        if (pos < text.size() && text[pos] == '-') num += text[pos++];
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])))
            num += text[pos++];
        if (num.empty() || num == "-") fail("expected integer", at);
        return std::stol(num);
    }

    /// Raw text until an unnested occurrence of one of the delimiters.
    std::string until(const std::string& delims) {
        skip();
        std::size_t at = pos;
        int depth = 0;
        std::string out;
        while (pos < text.size()) {
            char c = text[pos];
            if (c == '(') ++depth;
            if (c == ')') --depth;
            if (depth == 0 && delims.find(c) != std::string::npos) break;
            if (c == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
                continue;
            }
            out += c;
            ++pos;
        }
        if (pos >= text.size()) fail("unterminated clause", at);
        return out;
    }
};

// ---------------------------------------------------------------------------
// form / vector field expression parser
// ---------------------------------------------------------------------------

using Value = std::variant<ScalarExpr, DifferentialForm, VectorField>;

struct ValueParser {
    std::string text;
    std::size_t pos = 0;
    CoordsPtr coords;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg + " in '" + text + "'", static_cast<int>(pos));
    }

    void skip() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos])))
            ++pos;
    }
    char peek() {
        skip();
        return pos < text.size() ? text[pos] : '\0';
    }
    bool accept(char c) {
        skip();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    static bool is_scalar(const Value& v) { return std::holds_alternative<ScalarExpr>(v); }
    static bool is_form(const Value& v) {
        return std::holds_alternative<DifferentialForm>(v);
    }
    static bool is_field(const Value& v) { return std::holds_alternative<VectorField>(v); }

    Value parse() {
        Value v = sum();
        skip();
        if (pos < text.size()) fail("trailing input");
        return v;
    }

    Value sum() {
        Value v = wedge_level();
        while (true) {
            if (accept('+')) v = add(v, wedge_level(), false);
            else if (accept('-')) v = add(v, wedge_level(), true);
            else return v;
        }
    }

    Value add(const Value& a, const Value& b, bool negate) {
        if (is_scalar(a) && is_scalar(b)) {
            auto x = std::get<ScalarExpr>(a);
            auto y = std::get<ScalarExpr>(b);
            return negate ? x - y : x + y;
        }
        Value bb = b;
        if (is_scalar(a) && is_form(b))
            return add(DifferentialForm::from_scalar(std::get<ScalarExpr>(a)), b,
                       negate);
        if (is_form(a) && is_scalar(b))
            return add(a, DifferentialForm::from_scalar(std::get<ScalarExpr>(b)),
                       negate);
        if (is_form(a) && is_form(b)) {
            auto x = std::get<DifferentialForm>(a);
            auto y = std::get<DifferentialForm>(b);
            return negate ? x - y : x + y;
        }
        if (is_field(a) && is_field(b)) {
            auto x = std::get<VectorField>(a);
            auto y = std::get<VectorField>(b);
            return negate ? x + y * ScalarExpr::integer(-1, coords) : x + y;
        }
        fail("cannot add values of different kinds");
    }

    Value wedge_level() {
        Value v = term();
        while (accept('^')) {
            // integer literal exponent on a scalar base is a power
            skip();
            std::size_t save = pos;
            if (is_scalar(v) &&
                (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '(')) {
                bool paren = accept('(');
                bool neg = paren && accept('-');
                std::string digits;
                skip();
                while (pos < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[pos])))
                    digits += text[pos++];
                bool closed = !paren || accept(')');
                if (!digits.empty() && closed) {
                    int k = std::stoi(digits);
                    v = std::get<ScalarExpr>(v).pow(neg ? -k : k);
                    continue;
                }
                pos = save;
            }
            Value rhs = term();
            DifferentialForm a = is_form(v)
                                     ? std::get<DifferentialForm>(v)
                                     : DifferentialForm::from_scalar(
                                           std::get<ScalarExpr>(v));
            DifferentialForm b = is_form(rhs)
                                     ? std::get<DifferentialForm>(rhs)
                                     : DifferentialForm::from_scalar(
                                           std::get<ScalarExpr>(rhs));
            v = wedge(a, b);
        }
        return v;
    }

    Value term() {
        Value v = unary();
        while (true) {
            if (accept('*')) v = mul(v, unary());
            else if (accept('/')) {
                Value rhs = unary();
                if (!is_scalar(rhs)) fail("divisor must be scalar");
                v = divide(v, std::get<ScalarExpr>(rhs));
            } else {
                return v;
            }
        }
    }

    Value mul(const Value& a, const Value& b) {
        if (is_scalar(a) && is_scalar(b))
            return std::get<ScalarExpr>(a) * std::get<ScalarExpr>(b);
        if (is_scalar(a) && is_form(b))
            return std::get<DifferentialForm>(b) * std::get<ScalarExpr>(a);
        if (is_form(a) && is_scalar(b))
            return std::get<DifferentialForm>(a) * std::get<ScalarExpr>(b);
        if (is_scalar(a) && is_field(b))
            return std::get<VectorField>(b) * std::get<ScalarExpr>(a);
        if (is_field(a) && is_scalar(b))
            return std::get<VectorField>(a) * std::get<ScalarExpr>(b);
        fail("unsupported product; use ^ for wedge");
    }

    Value divide(const Value& a, const ScalarExpr& s) {
        if (is_scalar(a)) return std::get<ScalarExpr>(a) / s;
        if (is_form(a))
            return std::get<DifferentialForm>(a) * (ScalarExpr::integer(1, coords) / s);
        return std::get<VectorField>(a) * (ScalarExpr::integer(1, coords) / s);
    }

    Value unary() {
        if (accept('-')) {
            Value v = unary();
            if (is_scalar(v)) return -std::get<ScalarExpr>(v);
            if (is_form(v)) return -std::get<DifferentialForm>(v);
            return std::get<VectorField>(v) * ScalarExpr::integer(-1, coords);
        }
        if (accept('+')) return unary();
        return primary();
    }

    ScalarExpr scalar_arg() {
        expect('(');
        Value v = sum();
        expect(')');
        if (!is_scalar(v)) fail("expected a scalar argument");
        return std::get<ScalarExpr>(v);
    }

    Value primary() {
        char c = peek();
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::string digits, frac;
            while (pos < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[pos])))
                digits += text[pos++];
            if (pos < text.size() && text[pos] == '.') {
                ++pos;
                while (pos < text.size() &&
                       std::isdigit(static_cast<unsigned char>(text[pos])))
                    frac += text[pos++];
            }
            Rat v(digits.empty() ? "0" : digits);
            if (!frac.empty()) {
                Rat scale = 1;
                for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
                v += Rat(frac) / scale;
            }
            return ScalarExpr::constant(CRat(v), coords);
        }
        if (accept('(')) {
            Value v = sum();
            expect(')');
            return v;
        }
        std::size_t at = pos;
        std::string id;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                text[pos] == '_'))
            id += text[pos++];
        if (id.empty()) fail("expected expression");
        if (id == "i") return ScalarExpr::iunit(coords);
        if (id == "pi") return ScalarExpr::pi(coords);
        if (id == "exp") return ScalarExpr::exp(scalar_arg());
        if (id == "sin") return ScalarExpr::sin(scalar_arg());
        if (id == "cos") return ScalarExpr::cos(scalar_arg());
        if (id == "conj") return scalar_arg().conj();
        if (id == "wp_trunc") {
            expect('(');
            skip();
            std::string alias;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '_'))
                alias += text[pos++];
            expect(',');
            skip();
            std::string num;
            while (pos < text.size() &&
                   (std::isdigit(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '.'))
                num += text[pos++];
            expect(')');
            return weierstrass_p_trunc(alias, std::stod(num), coords);
        }
        if (id == "d") {
            ScalarExpr f = scalar_arg();
            return exterior_derivative(DifferentialForm::from_scalar(f));
        }
        if (id == "dd" || id == "dd_bar") {
            expect('(');
            skip();
            std::string name;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                    text[pos] == '_'))
                name += text[pos++];
            expect(')');
            int idx = coords->index_of(name);
            if (idx >= 0) return VectorField::coordinate(idx, coords);
            if (coords->complex_alias(name))
                return VectorField::wirtinger(name, coords, id == "dd_bar");
            fail("unknown coordinate in " + id + "(" + name + ")");
        }
        // d<name> differential sugar
        if (id.size() > 1 && id[0] == 'd') {
            std::string rest = id.substr(1);
            int idx = coords->index_of(rest);
            if (idx >= 0) return DifferentialForm::d_coord(idx, coords);
            if (coords->complex_alias(rest))
                return exterior_derivative(DifferentialForm::from_scalar(
                    ScalarExpr::complex_alias(rest, coords)));
        }
        int idx = coords->index_of(id);
        if (idx >= 0) return ScalarExpr::coordinate(idx, coords);
        if (coords->complex_alias(id)) return ScalarExpr::complex_alias(id, coords);
        throw ParseError("unknown symbol '" + id + "'", static_cast<int>(at));
    }
};

Value parse_value(const std::string& text, const CoordsPtr& coords) {
    ValueParser p;
    p.text = text;
    p.coords = coords;
    return p.parse();
}

ScalarExpr parse_scalar(const std::string& text, const CoordsPtr& coords) {
    Value v = parse_value(text, coords);
    if (!std::holds_alternative<ScalarExpr>(v))
        throw ParseError("expected a scalar expression", 0);
    return std::get<ScalarExpr>(v);
}

DifferentialForm parse_form(const std::string& text, const CoordsPtr& coords) {
    Value v = parse_value(text, coords);
    if (std::holds_alternative<ScalarExpr>(v))
        return DifferentialForm::from_scalar(std::get<ScalarExpr>(v));
    if (!std::holds_alternative<DifferentialForm>(v))
        throw ParseError("expected a form expression", 0);
    return std::get<DifferentialForm>(v);
}

VectorField parse_field(const std::string& text, const CoordsPtr& coords) {
    Value v = parse_value(text, coords);
    if (!std::holds_alternative<VectorField>(v))
        throw ParseError("expected a vector field expression", 0);
    return std::get<VectorField>(v);
}

// ---------------------------------------------------------------------------
// declarations
// ---------------------------------------------------------------------------

struct SurfaceDecl {
    PolarSubmanifold sub;
    AdaptedFrame frame;
};

struct CycleDecl {
    Chain chain;
    std::string target; ///< chart or surface name
    bool ambient = false;
};

struct Env {
    std::map<std::string, CRChartPtr> charts;
    std::map<std::string, bool> compact_certified;
    std::map<std::string, SurfaceDecl> surfaces;
    std::map<std::string, SmoothMap> loci; ///< named parametrized subsets
    std::map<std::string, CoordsPtr> locus_params;
    std::map<std::string, std::pair<std::string, DifferentialForm>> forms;
    std::map<std::string, std::pair<std::string, SemiMeromorphicForm>> meroforms;
    std::map<std::string, CycleDecl> cycles;
    double tolerance = 1e-9;
    int order = 32;
    double tube_radius = 0.5;
};

struct Task {
    std::string kind;
    std::vector<std::string> args;
    std::map<std::string, std::string> kv;
    int index = 0;
};

std::string fmt_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(15);
    os << z.real() << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return os.str();
}

json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::ExactZero: return "exact-zero";
    case Verdict::ExactNonzero: return "exact-nonzero";
    case Verdict::ProbablyZero: return "probably-zero";
    case Verdict::ProbablyNonzero: return "probably-nonzero";
    default: return "undecidable";
    }
}

std::string form_string(const DifferentialForm& w) {
    if (w.components().empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [idx, c] : w.components()) {
        if (!first) os << " + ";
        first = false;
        os << "(" << simplify(c).to_string() << ")";
        for (int i : idx) os << " d" << w.coords()->name(i);
    }
    return os.str();
}

json report_json(const CheckReport& rep) {
    json items = json::array();
    for (const auto& it : rep.items) {
        json j{{"name", it.name}, {"pass", it.pass}, {"exact", it.exact}};
        if (!it.detail.empty()) j["detail"] = it.detail;
        items.push_back(j);
    }
    return items;
}

// ---------------------------------------------------------------------------
// the parser + runner
// ---------------------------------------------------------------------------

struct ManifestDoc {
    Env env;
    std::vector<Task> tasks;
};

class Parser {
public:
    explicit Parser(std::string text) { sc.text = std::move(text); }

    ManifestDoc parse() {
        while (!sc.eof()) {
            std::string word = sc.ident();
            if (word == "option") parse_option();
            else if (word == "chart") parse_chart();
            else if (word == "surface") parse_surface();
            else if (word == "locus") parse_locus();
            else if (word == "form") parse_form_decl();
            else if (word == "meroform") parse_meroform();
            else if (word == "cycle") parse_cycle();
            else if (word == "task") parse_task();
            else sc.fail("unknown declaration '" + word + "'");
        }
        return std::move(doc);
    }

private:
    Scanner sc;
    ManifestDoc doc;

    CoordsPtr chart_coords(const std::string& name) {
        auto it = doc.env.charts.find(name);
        if (it != doc.env.charts.end()) return it->second->coords;
        sc.fail("unknown chart '" + name + "'");
    }

    void parse_option() {
        std::string key = sc.ident();
        double v = sc.number();
        sc.expect(';');
        if (key == "tolerance") doc.env.tolerance = v;
        else if (key == "order") doc.env.order = static_cast<int>(v);
        else if (key == "tube_radius") doc.env.tube_radius = v;
        else sc.fail("unknown option '" + key + "'");
    }

    /// Shared by charts and parameter blocks: coords/period/complex lines.
    struct CoordBlock {
        std::vector<std::string> names;
        std::vector<std::pair<std::string, double>> periods;
        std::vector<std::tuple<std::string, std::string, std::string>> aliases;
    };

    CoordsPtr build_coords(const CoordBlock& cb) {
        auto coords = std::make_shared<Coordinates>(cb.names);
        for (const auto& [name, p] : cb.periods)
            coords->set_period(coords->require(name), p);
        for (const auto& [alias, re, im] : cb.aliases)
            coords->add_complex_alias(alias, coords->require(re),
                                      coords->require(im));
        return coords;
    }

    void parse_coord_line(CoordBlock& cb, const std::string& word) {
        if (word == "coords" || word == "params") {
            if (sc.peek() != ';') {
                cb.names.push_back(sc.ident());
                while (sc.accept(',')) cb.names.push_back(sc.ident());
            }
            sc.expect(';');
        } else if (word == "period") {
            std::string name = sc.ident();
            double p = sc.number();
            sc.expect(';');
            cb.periods.emplace_back(name, p);
        } else if (word == "complex") {
            std::string alias = sc.ident();
            sc.expect('=');
            std::string re = sc.ident();
            sc.expect(',');
            std::string im = sc.ident();
            sc.expect(';');
            cb.aliases.emplace_back(alias, re, im);
        } else {
            sc.fail("unexpected '" + word + "' in coordinate block");
        }
    }

    void parse_chart() {
        std::string name = sc.ident();
        sc.expect('{');
        CoordBlock cb;
        std::vector<std::string> frame_exprs;
        bool have_frame = false, certified = false;
        while (!sc.accept('}')) {
            std::string word = sc.ident();
            if (word == "frame") {
                have_frame = true;
                if (sc.peek() != ';') {
                    frame_exprs.push_back(sc.until(",;"));
                    while (sc.accept(',')) frame_exprs.push_back(sc.until(",;"));
                }
                sc.expect(';');
            } else if (word == "compact") {
                std::string w = sc.ident();
                if (w != "certified") sc.fail("expected 'certified'");
                sc.expect(';');
                certified = true;
            } else {
                parse_coord_line(cb, word);
            }
        }
        CoordsPtr coords = build_coords(cb);
        std::vector<VectorField> frame;
        for (const auto& fe : frame_exprs) frame.push_back(parse_field(fe, coords));
        if (!have_frame && coords->dim() % 2 == 0)
            sc.fail("chart '" + name + "' needs a frame declaration (use 'frame;' "
                    "for n = 0)");
        int n = static_cast<int>(frame.size());
        int k = coords->dim() - 2 * n;
        if (k < 0) sc.fail("frame too large for chart dimension");
        doc.env.charts[name] =
            std::make_shared<CRChart>(coords, n, k, std::move(frame));
        doc.env.compact_certified[name] = certified || coords->all_periodic();
    }

    /// params/map shared by surfaces, loci and cycles.
    std::pair<CoordsPtr, std::vector<std::string>>
    parse_param_map_block(std::vector<std::string>& map_exprs, CoordBlock& cb,
                          std::vector<std::string>& frame_exprs, bool& have_frame,
                          std::string& defining, std::string& adapted_u,
                          std::string& adapted_v, int& mult,
                          std::vector<std::string>& periodic_axes) {
        while (!sc.accept('}')) {
            std::string word = sc.ident();
            if (word == "map") {
                if (sc.peek() != ';') {
                    map_exprs.push_back(sc.until(",;"));
                    while (sc.accept(',')) map_exprs.push_back(sc.until(",;"));
                }
                sc.expect(';');
            } else if (word == "defining") {
                defining = sc.until(";");
                sc.expect(';');
            } else if (word == "adapted") {
                adapted_u = sc.ident();
                sc.expect(',');
                adapted_v = sc.ident();
                sc.expect(';');
            } else if (word == "frame") {
                have_frame = true;
                if (sc.peek() != ';') {
                    frame_exprs.push_back(sc.until(",;"));
                    while (sc.accept(',')) frame_exprs.push_back(sc.until(",;"));
                }
                sc.expect(';');
            } else if (word == "mult") {
                mult = static_cast<int>(sc.integer());
                sc.expect(';');
            } else if (word == "periodic") {
                periodic_axes.push_back(sc.ident());
                while (sc.accept(',')) periodic_axes.push_back(sc.ident());
                sc.expect(';');
            } else {
                parse_coord_line(cb, word);
            }
        }
        return {};
    }

    void parse_surface() {
        std::string name = sc.ident();
        if (!sc.accept_word("on")) sc.fail("expected 'on CHART'");
        std::string chart_name = sc.ident();
        auto chart_it = doc.env.charts.find(chart_name);
        if (chart_it == doc.env.charts.end())
            sc.fail("unknown chart '" + chart_name + "'");
        CRChartPtr chart = chart_it->second;
        sc.expect('{');
        CoordBlock cb;
        std::vector<std::string> map_exprs, frame_exprs, periodic_axes;
        std::string defining, au, av;
        bool have_frame = false;
        int mult = 1;
        parse_param_map_block(map_exprs, cb, frame_exprs, have_frame, defining, au,
                              av, mult, periodic_axes);
        CoordsPtr params = build_coords(cb);
        if (defining.empty()) sc.fail("surface needs a defining clause");
        if (au.empty()) sc.fail("surface needs an adapted pair");
        std::vector<ScalarExpr> comps;
        for (const auto& me : map_exprs) comps.push_back(parse_scalar(me, params));
        SmoothMap param(params, chart->coords, std::move(comps));
        ScalarExpr s = parse_scalar(defining, chart->coords);
        std::optional<CRChart> sub_chart;
        if (have_frame) {
            std::vector<VectorField> fr;
            for (const auto& fe : frame_exprs) fr.push_back(parse_field(fe, params));
            int n = static_cast<int>(fr.size());
            sub_chart = CRChart(params, n, params->dim() - 2 * n, std::move(fr));
        }
        SurfaceDecl decl{PolarSubmanifold(chart, param, s, std::move(sub_chart)),
                         AdaptedFrame::derive(chart->coords, s, au, av)};
        doc.env.surfaces.emplace(name, std::move(decl));
        doc.env.loci.emplace(name, param);
        doc.env.locus_params.emplace(name, params);
    }

    void parse_locus() {
        std::string name = sc.ident();
        if (!sc.accept_word("on")) sc.fail("expected 'on CHART'");
        std::string chart_name = sc.ident();
        CoordsPtr ambient = chart_coords(chart_name);
        sc.expect('{');
        CoordBlock cb;
        std::vector<std::string> map_exprs, frame_exprs, periodic_axes;
        std::string defining, au, av;
        bool have_frame = false;
        int mult = 1;
        parse_param_map_block(map_exprs, cb, frame_exprs, have_frame, defining, au,
                              av, mult, periodic_axes);
        CoordsPtr params = build_coords(cb);
        std::vector<ScalarExpr> comps;
        for (const auto& me : map_exprs) comps.push_back(parse_scalar(me, params));
        doc.env.loci.emplace(name, SmoothMap(params, ambient, std::move(comps)));
        doc.env.locus_params.emplace(name, params);
    }

    void parse_form_decl() {
        std::string name = sc.ident();
        if (!sc.accept_word("on")) sc.fail("expected 'on CHART'");
        std::string chart_name = sc.ident();
        CoordsPtr coords = chart_coords(chart_name);
        sc.expect('=');
        std::string body = sc.until(";");
        sc.expect(';');
        doc.env.forms.emplace(name,
                              std::make_pair(chart_name, parse_form(body, coords)));
    }

    void parse_meroform() {
        std::string name = sc.ident();
        if (!sc.accept_word("on")) sc.fail("expected 'on CHART'");
        std::string chart_name = sc.ident();
        CoordsPtr coords = chart_coords(chart_name);
        sc.expect('{');
        DifferentialForm numerator;
        bool have_num = false;
        std::vector<PoleEntry> divisor;
        while (!sc.accept('}')) {
            std::string word = sc.ident();
            if (word == "numerator") {
                std::string body = sc.until(";");
                sc.expect(';');
                auto fit = doc.env.forms.find(body);
                if (fit != doc.env.forms.end() && fit->second.first == chart_name)
                    numerator = fit->second.second;
                else numerator = parse_form(body, coords);
                have_num = true;
            } else if (word == "pole") {
                std::string sname = sc.ident();
                int order = 1;
                if (sc.accept_word("order")) order = static_cast<int>(sc.integer());
                sc.expect(';');
                auto sit = doc.env.surfaces.find(sname);
                if (sit == doc.env.surfaces.end())
                    sc.fail("unknown surface '" + sname + "'");
                divisor.push_back(
                    PoleEntry{sit->second.sub, sit->second.frame, order});
            } else {
                sc.fail("unexpected '" + word + "' in meroform");
            }
        }
        if (!have_num) sc.fail("meroform needs a numerator");
        doc.env.meroforms.emplace(
            name, std::make_pair(chart_name, SemiMeromorphicForm(
                                                 numerator, std::move(divisor))));
    }

    void parse_cycle() {
        std::string name = sc.ident();
        if (!sc.accept_word("on")) sc.fail("expected 'on TARGET'");
        std::string target = sc.ident();
        CoordsPtr tgt;
        bool ambient = false;
        if (auto it = doc.env.locus_params.find(target);
            it != doc.env.locus_params.end()) {
            tgt = it->second;
        } else if (doc.env.charts.count(target)) {
            tgt = doc.env.charts[target]->coords;
            ambient = true;
        } else {
            sc.fail("unknown cycle target '" + target + "'");
        }
        sc.expect('{');
        CoordBlock cb;
        std::vector<std::string> map_exprs, frame_exprs, periodic_axes;
        std::string defining, au, av;
        bool have_frame = false;
        int mult = 1;
        parse_param_map_block(map_exprs, cb, frame_exprs, have_frame, defining, au,
                              av, mult, periodic_axes);
        CoordsPtr params = build_coords(cb);
        std::vector<bool> periodic(params->dim(), false);
        for (const auto& ax : periodic_axes)
            periodic[params->require(ax)] = true;
        std::vector<ScalarExpr> comps;
        for (const auto& me : map_exprs) comps.push_back(parse_scalar(me, params));
        Cell cell(SmoothMap(params, tgt, std::move(comps)), periodic, mult);
        doc.env.cycles.emplace(name, CycleDecl{Chain({cell}), target, ambient});
    }

    void parse_task() {
        Task t;
        t.kind = sc.ident();
        t.index = static_cast<int>(doc.tasks.size());
        while (sc.peek() != ';') {
            std::string word = sc.ident();
            if (word == "order" || word == "tolerance" || word == "t" ||
                word == "at" || word == "cycle" || word == "components" ||
                word == "over" || word == "expr" || word == "form") {
                if (word == "components") {
                    std::string v = sc.ident();
                    t.kv[word] = v;
                    while (sc.accept(',')) t.kv[word] += "," + sc.ident();
                } else if (word == "expr") {
                    t.kv[word] = sc.until(";");
                } else {
                    skip_to_value(t, word);
                }
            } else {
                t.args.push_back(word);
            }
        }
        sc.expect(';');
        doc.tasks.push_back(std::move(t));
    }

    void skip_to_value(Task& t, const std::string& key) {
        sc.skip();
        std::size_t at = sc.pos;
        std::string tok;
        while (sc.pos < sc.text.size() &&
               (std::isalnum(static_cast<unsigned char>(sc.text[sc.pos])) ||
                sc.text[sc.pos] == '_' || sc.text[sc.pos] == '.' ||
                sc.text[sc.pos] == '-' || sc.text[sc.pos] == '/' ||
                sc.text[sc.pos] == '+')) {
            tok += sc.text[sc.pos++];
        }
        if (tok.empty()) sc.fail("expected value for '" + key + "'", at);
        t.kv[key] = tok;
    }
};

// ---------------------------------------------------------------------------
// task execution
// ---------------------------------------------------------------------------

double parse_double(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos)
        return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    return std::stod(s);
}

struct TaskRunner {
    const Env& env;
    RunOptions opts;

    double tolerance(const Task& t, double fallback) const {
        if (auto it = t.kv.find("tolerance"); it != t.kv.end())
            return parse_double(it->second);
        if (opts.tolerance) return *opts.tolerance;
        return fallback;
    }
    int order(const Task& t) const {
        if (opts.order) return *opts.order;
        if (auto it = t.kv.find("order"); it != t.kv.end())
            return static_cast<int>(parse_double(it->second));
        return env.order;
    }

    const CRChartPtr& chart_arg(const Task& t, std::size_t i = 0) const {
        if (t.args.size() <= i) throw DomainError("task needs a chart argument");
        auto it = env.charts.find(t.args[i]);
        if (it == env.charts.end())
            throw DomainError("unresolved chart '" + t.args[i] + "'");
        return it->second;
    }

    const SemiMeromorphicForm& meroform_arg(const Task& t, std::size_t i = 0) const {
        if (t.args.size() <= i)
            throw DomainError("task needs a meromorphic form argument");
        auto it = env.meroforms.find(t.args[i]);
        if (it == env.meroforms.end())
            throw DomainError("unresolved meroform '" + t.args[i] + "'");
        return it->second.second;
    }

    TaskResult run(const Task& t) const {
        TaskResult res;
        res.kind = t.kind;
        res.label = t.kind;
        for (const auto& a : t.args) res.label += " " + a;
        json detail;
        try {
            if (t.kind == "check_integrability") {
                CheckReport rep = check_integrability(*chart_arg(t));
                res.pass = rep.pass();
                detail["items"] = report_json(rep);
            } else if (t.kind == "check_cr_function") {
                const CRChartPtr& chart = chart_arg(t);
                auto it = t.kv.find("expr");
                if (it == t.kv.end()) throw DomainError("needs expr <expression>");
                ScalarExpr f = parse_scalar(it->second, chart->coords);
                CheckReport rep = check_cr_function(*chart, f);
                res.pass = rep.pass();
                detail["items"] = report_json(rep);
            } else if (t.kind == "check_cr_form") {
                const CRChartPtr& chart = chart_arg(t);
                auto fit = t.kv.find("form");
                if (fit == t.kv.end()) throw DomainError("needs form NAME");
                auto it = env.forms.find(fit->second);
                if (it == env.forms.end())
                    throw DomainError("unresolved form '" + fit->second + "'");
                CheckReport rep = check_cr_form(*chart, it->second.second);
                res.pass = rep.pass();
                detail["items"] = report_json(rep);
            } else if (t.kind == "check_polar") {
                if (t.args.empty()) throw DomainError("needs a surface argument");
                auto it = env.surfaces.find(t.args[0]);
                if (it == env.surfaces.end())
                    throw DomainError("unresolved surface '" + t.args[0] + "'");
                CheckReport rep = check_polar(it->second.sub);
                res.pass = rep.pass();
                detail["items"] = report_json(rep);
            } else if (t.kind == "residue") {
                const SemiMeromorphicForm& phi = meroform_arg(t);
                ResidueResult rr = phi.divisor.size() == 1 && phi.divisor[0].order == 1
                                       ? residue_simple(phi)
                                       : residue_class(phi);
                res.pass = true;
                detail["residue"] = form_string(rr.residue);
                detail["input_closed"] = verdict_name(rr.input_closed);
                detail["residue_closed"] = verdict_name(rr.residue_closed);
                if (rr.residue_cr)
                    detail["residue_cr"] = *rr.residue_cr;
                detail["sign_convention"] = rr.sign_convention;
            } else if (t.kind == "reduce") {
                auto [hat, rho] = reduce_pole(meroform_arg(t));
                res.pass = true;
                detail["reduced_numerator"] = form_string(hat.numerator);
                detail["reduced_order"] = hat.divisor[0].order;
                detail["rho_numerator"] = form_string(rho.numerator);
            } else if (t.kind == "laurent") {
                LaurentExpansion lau = laurent_expand(meroform_arg(t));
                res.pass = true;
                json etas = json::array();
                for (const auto& e : lau.eta) etas.push_back(form_string(e));
                detail["eta_numerators"] = etas;
                detail["simple_numerator"] = form_string(lau.simple.numerator);
                detail["residue"] = form_string(lau.residue.residue);
            } else if (t.kind == "residue_multi") {
                const SemiMeromorphicForm& phi = meroform_arg(t);
                auto at = t.kv.find("at");
                if (at == t.kv.end()) throw DomainError("needs at LOCUS");
                auto lit = env.loci.find(at->second);
                if (lit == env.loci.end())
                    throw DomainError("unresolved locus '" + at->second + "'");
                ResidueResult rr = residue_multi(phi, lit->second);
                res.pass = true;
                detail["residue"] = form_string(rr.residue);
                detail["input_closed"] = verdict_name(rr.input_closed);
                detail["sign_convention"] = rr.sign_convention;
            } else if (t.kind == "integrate") {
                auto fit = t.kv.find("form");
                auto cit = t.kv.find("over");
                if (fit == t.kv.end() || cit == t.kv.end())
                    throw DomainError("needs form NAME over CYCLE");
                DifferentialForm w;
                if (auto it = env.forms.find(fit->second); it != env.forms.end())
                    w = it->second.second;
                else if (auto mit = env.meroforms.find(fit->second);
                         mit != env.meroforms.end())
                    w = mit->second.second.as_form();
                else throw DomainError("unresolved form '" + fit->second + "'");
                auto cyc = env.cycles.find(cit->second);
                if (cyc == env.cycles.end())
                    throw DomainError("unresolved cycle '" + cit->second + "'");
                auto v = integrate(cyc->second.chain, w, {order(t)});
                detail["value"] = complex_json(v);
                detail["value_str"] = fmt_complex(v);
                res.pass = true;
                if (auto eit = t.kv.find("expect_re"); eit != t.kv.end()) {
                    double er = parse_double(eit->second);
                    double ei = t.kv.count("expect_im")
                                    ? parse_double(t.kv.at("expect_im"))
                                    : 0.0;
                    double tol = tolerance(t, env.tolerance);
                    res.pass = std::abs(v - std::complex<double>(er, ei)) <= tol;
                    detail["expected"] = complex_json({er, ei});
                }
            } else if (t.kind == "verify_residue_formula") {
                const SemiMeromorphicForm& phi = meroform_arg(t);
                auto cit = t.kv.find("cycle");
                if (cit == t.kv.end()) throw DomainError("needs cycle NAME");
                auto cyc = env.cycles.find(cit->second);
                if (cyc == env.cycles.end())
                    throw DomainError("unresolved cycle '" + cit->second + "'");
                double tr = env.tube_radius;
                if (auto it = t.kv.find("t"); it != t.kv.end())
                    tr = parse_double(it->second);
                double tol = tolerance(t, 1e-6);
                FormulaReport rep = verify_residue_formula(phi, cyc->second.chain,
                                                           tr, {order(t)}, tol);
                res.pass = rep.pass;
                detail["lhs"] = complex_json(rep.lhs);
                detail["rhs"] = complex_json(rep.rhs);
                detail["lhs_str"] = fmt_complex(rep.lhs);
                detail["rhs_str"] = fmt_complex(rep.rhs);
                detail["abs_error"] = rep.abs_error;
                detail["tolerance"] = rep.tolerance;
                detail["residue"] = form_string(rep.residue.residue);
                if (rep.residue.residue_cr)
                    detail["residue_cr"] = *rep.residue.residue_cr;
            } else if (t.kind == "abel") {
                const SemiMeromorphicForm& phi = meroform_arg(t);
                auto cit = t.kv.find("components");
                if (cit == t.kv.end()) throw DomainError("needs components LIST");
                std::vector<Chain> comps;
                std::stringstream ss(cit->second);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    auto cyc = env.cycles.find(item);
                    if (cyc == env.cycles.end())
                        throw DomainError("unresolved cycle '" + item + "'");
                    if (!cyc->second.ambient)
                        throw DomainError("abel components must be ambient cycles");
                    comps.push_back(cyc->second.chain);
                }
                std::string chart_name = env.meroforms.at(t.args[0]).first;
                bool certified = env.compact_certified.at(chart_name);
                double tol = tolerance(t, 1e-6);
                AbelReport rep = abel_sum(phi, comps, {order(t)}, tol, certified);
                res.pass = rep.pass;
                json per = json::array();
                for (auto v : rep.component_integrals) per.push_back(complex_json(v));
                detail["component_integrals"] = per;
                detail["total"] = complex_json(rep.total);
                detail["total_abs"] = std::abs(rep.total);
                detail["tolerance"] = rep.tolerance;
            } else {
                throw DomainError("unknown task kind '" + t.kind + "'");
            }
        } catch (const std::exception& ex) {
            res.pass = false;
            detail["error"] = ex.what();
        }
        res.detail_json = detail.dump();
        return res;
    }
};

} // namespace

bool RunResult::all_pass() const {
    for (const auto& t : tasks)
        if (!t.pass) return false;
    return true;
}

std::string RunResult::to_json(bool with_timestamp) const {
    json out;
    out["schema"] = "1";
    if (with_timestamp) out["timestamp"] = static_cast<long>(::time(nullptr));
    out["pass"] = all_pass();
    json jt = json::array();
    for (const auto& t : tasks) {
        json one;
        one["label"] = t.label;
        one["kind"] = t.kind;
        one["pass"] = t.pass;
        one["detail"] = json::parse(t.detail_json);
        jt.push_back(one);
    }
    out["tasks"] = jt;
    return out.dump(2);
}

std::string RunResult::text_report() const {
    std::ostringstream os;
    for (const auto& t : tasks) {
        os << (t.pass ? "[PASS] " : "[FAIL] ") << t.label << "\n";
        json d = json::parse(t.detail_json);
        if (d.contains("error")) os << "       error: " << d["error"].get<std::string>() << "\n";
        if (d.contains("residue"))
            os << "       residue: " << d["residue"].get<std::string>() << "\n";
        if (d.contains("lhs_str"))
            os << "       lhs = " << d["lhs_str"].get<std::string>()
               << ", rhs = " << d["rhs_str"].get<std::string>()
               << ", |lhs-rhs| = " << d["abs_error"].get<double>() << "\n";
        if (d.contains("value_str"))
            os << "       value = " << d["value_str"].get<std::string>() << "\n";
        if (d.contains("total_abs"))
            os << "       |sum| = " << d["total_abs"].get<double>() << "\n";
        if (d.contains("items")) {
            for (const auto& it : d["items"]) {
                os << "       " << (it["pass"].get<bool>() ? "ok  " : "FAIL")
                   << " " << it["name"].get<std::string>();
                if (it.contains("detail") && !it["detail"].get<std::string>().empty())
                    os << "  [" << it["detail"].get<std::string>() << "]";
                os << "\n";
            }
        }
    }
    return os.str();
}

RunResult run_manifest_text(const std::string& text, const RunOptions& opt) {
    Parser parser(text);
    ManifestDoc doc = parser.parse();
    TaskRunner runner{doc.env, opt};
    RunResult out;
    if (opt.parallel) {
        std::vector<std::future<TaskResult>> futures;
        futures.reserve(doc.tasks.size());
        for (const auto& t : doc.tasks)
            futures.push_back(std::async(std::launch::async,
                                         [&runner, &t] { return runner.run(t); }));
        for (auto& f : futures) out.tasks.push_back(f.get());
    } else {
        for (const auto& t : doc.tasks) out.tasks.push_back(runner.run(t));
    }
    return out;
}

RunResult run_manifest_file(const std::string& path, const RunOptions& opt) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest '" + path + "'", 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return run_manifest_text(ss.str(), opt);
}

} // namespace crres
