#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "crres/coords.hpp"
#include "crres/rational.hpp"

namespace crres {

struct ParseError : std::runtime_error {
    int pos;
    ParseError(const std::string& msg, int position)
        : std::runtime_error(msg + " (at offset " + std::to_string(position) + ")"),
          pos(position) {}
};

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Kind : std::uint8_t {
    Const, ///< complex rational constant
    Coord, ///< real coordinate symbol
    Pi,    ///< the circle constant, kept symbolic
    Add,   ///< n-ary sum
    Mul,   ///< n-ary product
    Pow,   ///< integer power
    Div,   ///< quotient
    Exp,
    Sin,
    Cos,
    Conj
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    Kind kind;
    CRat cval;      // Const
    int coord = -1; // Coord
    int expo = 0;   // Pow
    std::vector<NodePtr> kids;
    mutable std::size_t hash_cache = 0;

    std::size_t hash() const;
};

int compare(const NodePtr& a, const NodePtr& b); ///< total structural order
bool equal_nodes(const NodePtr& a, const NodePtr& b);

/// Immutable symbolic complex-valued function of the real chart coordinates.
class ScalarExpr {
public:
    ScalarExpr() = default;
    ScalarExpr(NodePtr n, CoordsPtr c) : node_(std::move(n)), coords_(std::move(c)) {}

    static ScalarExpr constant(CRat v, CoordsPtr c);
    static ScalarExpr integer(long n, CoordsPtr c) { return constant(CRat(n), c); }
    static ScalarExpr iunit(CoordsPtr c) { return constant(CRat::iunit(), c); }
    static ScalarExpr pi(CoordsPtr c);
    static ScalarExpr coordinate(int idx, CoordsPtr c);
    static ScalarExpr coordinate(const std::string& name, const CoordsPtr& c);
    /// The complex alias expression re + i*im for a declared pair.
    static ScalarExpr complex_alias(const std::string& name, const CoordsPtr& c);

    bool empty() const { return !node_; }
    const NodePtr& node() const { return node_; }
    const CoordsPtr& coords() const { return coords_; }

    bool is_literal_zero() const;
    bool is_literal_one() const;
    /// Constant value if the node is a Const leaf.
    const CRat* as_const() const;

    ScalarExpr operator+(const ScalarExpr& o) const;
    ScalarExpr operator-(const ScalarExpr& o) const;
    ScalarExpr operator*(const ScalarExpr& o) const;
    ScalarExpr operator/(const ScalarExpr& o) const;
    ScalarExpr operator-() const;
    ScalarExpr pow(int k) const;
    ScalarExpr conj() const;

    static ScalarExpr exp(const ScalarExpr& e);
    static ScalarExpr sin(const ScalarExpr& e);
    static ScalarExpr cos(const ScalarExpr& e);

    /// Exact symbolic partial derivative with respect to a declared coordinate.
    ScalarExpr partial(int coord) const;
    ScalarExpr partial(const std::string& name) const;

    /// Replace each coordinate by the given expression over the target chart.
    ScalarExpr substitute(const std::vector<ScalarExpr>& repl, CoordsPtr target) const;

    std::complex<double> evaluate(const std::vector<double>& point) const;

    std::string to_string() const;

private:
    NodePtr node_;
    CoordsPtr coords_;
    void check_same(const ScalarExpr& o) const;
};

/// Parses the documented expression grammar over the given coordinates.
/// Known names: coordinates, complex aliases, `i`, `pi`, exp/sin/cos/conj,
/// and `wp_trunc(z, R)` (truncated Weierstrass lattice sum).
ScalarExpr parse_expr(const std::string& text, const CoordsPtr& coords);

/// Truncated lattice sum 1/z^2 + sum_{0<|w|<=R} [1/(z-w)^2 - 1/w^2] with
/// w = m p1 + i n p2 ranging over the coordinate periods (default 1).
ScalarExpr weierstrass_p_trunc(const std::string& alias, double radius,
                               const CoordsPtr& coords);

} // namespace crres
