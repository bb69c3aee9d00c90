#include "crres/integrate.hpp"

#include <cmath>

namespace crres {

namespace {

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev initial guess, on [-1, 1]
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = 0.5 * (1.0 + t);
        w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
}

std::complex<double> integrate_cell(const Cell& cell, const DifferentialForm& a,
                                    int order) {
    int p = cell.dim();
    DifferentialForm pulled = pullback(cell.param, a);
    if (p == 0) {
        ScalarExpr f = pulled.coefficient({});
        return static_cast<double>(cell.multiplicity) * f.evaluate({});
    }
    MultiIndex full(p);
    for (int i = 0; i < p; ++i) full[i] = i;
    ScalarExpr integrand = pulled.coefficient(full);
    if (integrand.is_literal_zero()) return 0.0;

    std::vector<std::vector<double>> nodes(p), weights(p);
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    for (int axis = 0; axis < p; ++axis) {
        if (cell.periodic[axis]) {
            nodes[axis].resize(order);
            weights[axis].assign(order, 1.0 / order);
            for (int i = 0; i < order; ++i)
                nodes[axis][i] = static_cast<double>(i) / order;
        } else {
            nodes[axis] = gx;
            weights[axis] = gw;
        }
    }

    std::complex<double> acc = 0.0;
    std::vector<int> idx(p, 0);
    std::vector<double> pt(p);
    while (true) {
        double wgt = 1.0;
        for (int axis = 0; axis < p; ++axis) {
            pt[axis] = nodes[axis][idx[axis]];
            wgt *= weights[axis][idx[axis]];
        }
        std::complex<double> v;
        try {
            v = integrand.evaluate(pt);
        } catch (const EvalError&) {
            throw EvalError("form is singular on the cell image");
        }
        acc += wgt * v;
        int axis = p - 1;
        while (axis >= 0 && ++idx[axis] == order) idx[axis--] = 0;
        if (axis < 0) break;
    }
    return static_cast<double>(cell.multiplicity) * acc;
}

} // namespace

std::complex<double> integrate(const Chain& c, const DifferentialForm& a,
                               const QuadratureOptions& opt) {
    if (c.cells.empty()) return 0.0;
    if (a.degree() != c.dim())
        throw DomainError("integrate: form degree must match chain dimension");
    if (!same_coords(a.coords(), c.target()))
        throw DomainError("integrate: form and chain live on different charts");
    std::complex<double> acc = 0.0;
    for (const auto& cell : c.cells) acc += integrate_cell(cell, a, opt.order);
    return acc;
}

FormulaReport verify_residue_formula(const SemiMeromorphicForm& phi,
                                     const Chain& gamma, double t,
                                     const QuadratureOptions& opt,
                                     double tolerance) {
    if (phi.divisor.size() != 1)
        throw DomainError("verify_residue_formula expects a single divisor");
    FormulaReport rep;
    rep.tolerance = tolerance;

    SemiMeromorphicForm simple = phi;
    if (phi.divisor[0].order > 1) {
        LaurentExpansion lau = laurent_expand(phi);
        simple = lau.simple;
        rep.residue = lau.residue;
    } else {
        rep.residue = residue_simple(phi);
    }

    TubeSpec spec(t, {phi.divisor[0].frame});
    Chain tub = tube(gamma, phi.divisor[0].sub.param, spec);
    rep.lhs = integrate(tub, phi.as_form(), opt);
    std::complex<double> pairing = integrate(gamma, rep.residue.residue, opt);
    rep.rhs = std::complex<double>(0.0, 2.0 * M_PI) * pairing;
    rep.abs_error = std::abs(rep.lhs - rep.rhs);
    rep.pass = rep.abs_error <= tolerance;
    return rep;
}

AbelReport abel_sum(const SemiMeromorphicForm& phi,
                    const std::vector<Chain>& components,
                    const QuadratureOptions& opt, double tolerance,
                    bool compactness_certified) {
    const CoordsPtr& C = phi.coords();
    if (!C->all_periodic() && !compactness_certified)
        throw DomainError("abel_sum requires a compact chart: all coordinates "
                          "periodic or compactness certified");
    int m = static_cast<int>(phi.divisor.size());
    int expected = C->dim() - m;
    if (phi.degree() != expected)
        throw DomainError("abel_sum: form degree must be dim - m = " +
                          std::to_string(expected));
    ZeroCheck closed = phi.closedness();
    if (!closed.zero())
        throw DomainError("abel_sum of a non-closed form");

    DifferentialForm rep_form = multi_residue_representative(phi);
    AbelReport rep;
    rep.tolerance = tolerance;
    rep.total = 0.0;
    for (const auto& Z : components) {
        if (Z.dim() != C->dim() - 2 * m)
            throw DomainError("abel component dimension must be dim - 2m");
        std::complex<double> v = integrate(Z, rep_form, opt);
        rep.component_integrals.push_back(v);
        rep.total += v;
    }
    rep.pass = std::abs(rep.total) <= tolerance;
    return rep;
}

} // namespace crres
