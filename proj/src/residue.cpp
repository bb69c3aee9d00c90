#include "crres/residue.hpp"

#include <Eigen/Dense>
#include <random>

namespace crres {

namespace {

Rat factorial(int n) {
    Rat f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

DifferentialForm ds_form(const AdaptedFrame& fr) {
    return exterior_derivative(DifferentialForm::from_scalar(fr.s));
}

ZeroCheck check_in_phi(const DifferentialForm& lambda, const AdaptedFrame& fr,
                       const ZeroTestOptions& opt) {
    return contract(fr.dual, lambda).is_zero(opt);
}

} // namespace

AdaptedFrame AdaptedFrame::derive(const CoordsPtr& coords, const ScalarExpr& s,
                                  const std::string& u_name,
                                  const std::string& v_name) {
    AdaptedFrame fr;
    fr.coords = coords;
    fr.s = s;
    fr.u = coords->require(u_name);
    fr.v = coords->require(v_name);
    if (fr.u == fr.v) throw DomainError("adapted pair must be distinct coordinates");
    // s must depend only on the adapted pair so that the leaf-transverse
    // differentials close up with ds, conj(ds) into a coframe
    for (int i = 0; i < coords->dim(); ++i) {
        if (i == fr.u || i == fr.v) continue;
        ZeroCheck z = is_zero(s.partial(i));
        if (!z.zero())
            throw DomainError(
                "defining function must depend only on its adapted pair (found "
                "dependence on " +
                coords->name(i) + ")");
    }
    ScalarExpr su = simplify(s.partial(fr.u));
    ScalarExpr sv = simplify(s.partial(fr.v));
    ScalarExpr sbu = simplify(su.conj());
    ScalarExpr sbv = simplify(sv.conj());
    ScalarExpr det = simplify(su * sbv - sv * sbu);
    ZeroCheck z = is_zero(det);
    if (z.zero())
        throw DomainError("ds and conj(ds) are dependent: the adapted pair does "
                          "not realize a complex normal direction");
    VectorField X = VectorField::zero(coords);
    X.coeffs[fr.u] = simplify(sbv / det);
    X.coeffs[fr.v] = simplify(-(sbu / det));
    fr.dual = std::move(X);
    return fr;
}

bool AdaptedFrame::affine() const {
    for (int i : {u, v}) {
        ScalarExpr d = s.partial(i);
        for (int j : {u, v})
            if (!is_zero(d.partial(j)).zero()) return false;
    }
    return true;
}

std::pair<CRat, CRat> AdaptedFrame::linear_part() const {
    ScalarExpr su = simplify(s.partial(u));
    ScalarExpr sv = simplify(s.partial(v));
    const CRat* a = su.as_const();
    const CRat* b = sv.as_const();
    if (!a || !b)
        throw DomainError("defining function is not affine in the adapted pair");
    return {*a, *b};
}

SemiMeromorphicForm::SemiMeromorphicForm(DifferentialForm num,
                                         std::vector<PoleEntry> div)
    : numerator(std::move(num)), divisor(std::move(div)) {
    for (const auto& e : divisor) {
        if (e.order < 1) throw DomainError("pole order must be at least 1");
        if (!same_coords(e.frame.coords, numerator.coords()))
            throw DomainError("divisor lives on a different chart");
    }
}

DifferentialForm SemiMeromorphicForm::as_form() const {
    ScalarExpr den = ScalarExpr::integer(1, coords());
    for (const auto& e : divisor) den = den * e.frame.s.pow(e.order);
    DifferentialForm out(numerator.degree(), coords());
    for (const auto& [idx, c] : numerator.components())
        out.set_coefficient(idx, c / den);
    return out;
}

ZeroCheck SemiMeromorphicForm::closedness(const ZeroTestOptions& opt) const {
    // d(omega / prod s^q) = 0 iff
    // prod(s_j) d(omega) - sum_j q_j (prod_{l != j} s_l) ds_j /\ omega = 0.
    const CoordsPtr& C = coords();
    DifferentialForm total = exterior_derivative(numerator);
    ScalarExpr prod_all = ScalarExpr::integer(1, C);
    for (const auto& e : divisor) prod_all = prod_all * e.frame.s;
    total = total * prod_all;
    for (std::size_t j = 0; j < divisor.size(); ++j) {
        ScalarExpr rest = ScalarExpr::integer(divisor[j].order, C);
        for (std::size_t l = 0; l < divisor.size(); ++l)
            if (l != j) rest = rest * divisor[l].frame.s;
        DifferentialForm term = wedge(ds_form(divisor[j].frame), numerator) * rest;
        total = total - term;
    }
    return total.simplified().is_zero(opt);
}

SemiMeromorphicForm SemiMeromorphicForm::cancel_pole_factors() const {
    SemiMeromorphicForm out = *this;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& e : out.divisor) {
            if (e.order < 2) continue;
            DifferentialForm divided(out.numerator.degree(), coords());
            bool ok = !out.numerator.components().empty();
            for (const auto& [idx, c] : out.numerator.components()) {
                auto q = divide_exact(c, e.frame.s);
                if (!q) {
                    ok = false;
                    break;
                }
                divided.set_coefficient(idx, *q);
            }
            if (ok) {
                out.numerator = divided;
                e.order -= 1;
                changed = true;
            }
        }
    }
    // numerator identically zero: all poles are spurious
    if (out.numerator.simplified().components().empty()) {
        for (auto& e : out.divisor) e.order = 1;
    }
    return out;
}

std::pair<DifferentialForm, DifferentialForm> decompose(const DifferentialForm& w,
                                                        const AdaptedFrame& fr) {
    DifferentialForm beta = contract(fr.dual, w);
    DifferentialForm alpha = (w - wedge(ds_form(fr), beta)).simplified();
    return {alpha, beta};
}

DifferentialForm d_ds(const DifferentialForm& lambda, const AdaptedFrame& fr) {
    ZeroCheck z = check_in_phi(lambda, fr, {});
    if (!z.zero())
        throw DomainError("d/ds requires an argument without ds component");
    return contract(fr.dual, exterior_derivative(lambda));
}

DifferentialForm iterate_ds(const DifferentialForm& w, const AdaptedFrame& fr,
                            int r) {
    if (r < 0) throw DomainError("iterate_ds: negative iteration count");
    DifferentialForm cur = contract(fr.dual, w);
    for (int j = 0; j < r; ++j)
        cur = contract(fr.dual, exterior_derivative(cur)).simplified();
    return cur.simplified();
}

namespace {

ResidueResult finish_residue(const DifferentialForm& ambient,
                             const PolarSubmanifold& sub, Verdict input_closed,
                             const ZeroTestOptions& opt) {
    ResidueResult out;
    out.ambient_rep = ambient.simplified();
    out.residue = pullback(sub.param, out.ambient_rep).simplified();
    out.input_closed = input_closed;
    out.residue_closed = exterior_derivative(out.residue).is_zero(opt).verdict;
    if (sub.sub_chart) {
        CheckReport cr = check_cr_form(*sub.sub_chart, out.residue);
        out.residue_cr = cr.pass();
        out.residue_cr_exact = cr.exact();
    }
    return out;
}

} // namespace

ResidueResult residue_simple(const SemiMeromorphicForm& phi,
                             const ZeroTestOptions& opt) {
    if (phi.divisor.size() != 1)
        throw DomainError("residue_simple expects a single divisor");
    if (phi.divisor[0].order != 1)
        throw DomainError("residue_simple expects a first-order pole");
    ZeroCheck closed = phi.closedness(opt);
    if (!closed.zero())
        throw DomainError("residue of a non-closed form");
    DifferentialForm beta = contract(phi.divisor[0].frame.dual, phi.numerator);
    return finish_residue(beta, phi.divisor[0].sub, closed.verdict, opt);
}

ResidueResult residue_class(const SemiMeromorphicForm& phi,
                            const ZeroTestOptions& opt) {
    if (phi.divisor.size() != 1)
        throw DomainError("residue_class expects a single divisor");
    int q = phi.divisor[0].order;
    ZeroCheck closed = phi.closedness(opt);
    if (!closed.zero())
        throw DomainError("residue of a non-closed form");
    DifferentialForm rep = iterate_ds(phi.numerator, phi.divisor[0].frame, q - 1);
    rep = rep * ScalarExpr::constant(CRat(Rat(1) / factorial(q - 1)),
                                     phi.coords());
    return finish_residue(rep, phi.divisor[0].sub, closed.verdict, opt);
}

std::pair<SemiMeromorphicForm, SemiMeromorphicForm>
reduce_pole(const SemiMeromorphicForm& phi, const ZeroTestOptions& opt) {
    if (phi.divisor.size() != 1)
        throw DomainError("reduce_pole expects a single divisor");
    int q = phi.divisor[0].order;
    if (q < 2) throw DomainError("reduce_pole expects order at least 2");
    ZeroCheck closed = phi.closedness(opt);
    if (!closed.zero())
        throw DomainError("reduce_pole of a non-closed form");

    const AdaptedFrame& fr = phi.divisor[0].frame;
    const CoordsPtr& C = phi.coords();
    auto [alpha, beta] = decompose(phi.numerator, fr);

    // closedness forces alpha = (s/q) (d alpha/ds - (d beta)|_Phi), so
    //   phi + 1/(q-1) d(beta/s^{q-1})
    //     = [ dalpha/ds / q + (dbeta)|_Phi 1/(q(q-1)) + ds/\(dbeta/ds)/(q-1) ]
    //       / s^{q-1}.
    DifferentialForm dbeta = exterior_derivative(beta);
    DifferentialForm dbeta_ds = contract(fr.dual, dbeta);
    DifferentialForm dbeta_phi = (dbeta - wedge(ds_form(fr), dbeta_ds)).simplified();
    DifferentialForm dalpha_ds = contract(fr.dual, exterior_derivative(alpha));

    auto frac = [&](long num, long den) {
        return ScalarExpr::constant(CRat(Rat(num, den)), C);
    };
    DifferentialForm new_num =
        dalpha_ds * frac(1, q) + dbeta_phi * frac(1, static_cast<long>(q) * (q - 1)) +
        wedge(ds_form(fr), dbeta_ds) * frac(1, q - 1);
    new_num = new_num.simplified();

    PoleEntry reduced = phi.divisor[0];
    reduced.order = q - 1;
    SemiMeromorphicForm phi_hat(new_num, {reduced});

    DifferentialForm rho_num = (beta * frac(-1, q - 1)).simplified();
    SemiMeromorphicForm rho(rho_num, {reduced});
    return {phi_hat, rho};
}

LaurentExpansion laurent_expand(const SemiMeromorphicForm& phi,
                                const ZeroTestOptions& opt) {
    if (phi.divisor.size() != 1)
        throw DomainError("laurent_expand expects a single divisor");
    LaurentExpansion out;
    int q = phi.divisor[0].order;
    out.eta.assign(std::max(q - 1, 0), DifferentialForm());
    SemiMeromorphicForm cur = phi;
    while (cur.divisor[0].order > 1) {
        auto [next, rho] = reduce_pole(cur, opt);
        out.eta[cur.divisor[0].order - 2] = rho.numerator;
        cur = std::move(next);
    }
    out.simple = cur;
    out.residue = residue_simple(cur, opt);
    return out;
}

DifferentialForm multi_residue_representative(const SemiMeromorphicForm& phi) {
    DifferentialForm cur = phi.numerator;
    Rat scale = 1;
    for (auto it = phi.divisor.rbegin(); it != phi.divisor.rend(); ++it) {
        cur = iterate_ds(cur, it->frame, it->order - 1);
        scale *= factorial(it->order - 1);
    }
    return (cur * ScalarExpr::constant(CRat(Rat(1) / scale), phi.coords()))
        .simplified();
}

ResidueResult residue_multi(const SemiMeromorphicForm& phi,
                            const SmoothMap& intersection,
                            const ZeroTestOptions& opt) {
    if (phi.divisor.empty())
        throw DomainError("residue_multi expects at least one divisor");
    if (!same_coords(intersection.target, phi.coords()))
        throw DomainError("intersection parametrization must land in the chart");
    ZeroCheck closed = phi.closedness(opt);
    if (!closed.zero())
        throw DomainError("residue of a non-closed form");

    // normal crossings: real and imaginary parts of all ds_j independent
    // along the intersection (sampled)
    {
        const CoordsPtr& P = intersection.source;
        int m = static_cast<int>(phi.divisor.size());
        int dim = phi.coords()->dim();
        std::vector<std::vector<ScalarExpr>> grads;
        for (const auto& e : phi.divisor) {
            std::vector<ScalarExpr> g;
            for (int i = 0; i < dim; ++i) g.push_back(e.frame.s.partial(i));
            grads.push_back(std::move(g));
        }
        std::mt19937 rng(0xABCDu);
        std::uniform_real_distribution<double> uni(0.1, 0.9);
        int checked = 0;
        for (int t = 0; t < 32 && checked < 8; ++t) {
            std::vector<double> y(P->dim());
            for (int i = 0; i < P->dim(); ++i) y[i] = uni(rng);
            try {
                std::vector<double> x = intersection.apply(y);
                // covectors ds_j, conj(ds_j) as real 2m x 2dim rows
                Eigen::MatrixXd A(2 * m, 2 * dim);
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < dim; ++i) {
                        auto g = grads[j][i].evaluate(x);
                        A(2 * j, i) = g.real();
                        A(2 * j, dim + i) = -g.imag();
                        A(2 * j + 1, i) = g.imag();
                        A(2 * j + 1, dim + i) = g.real();
                    }
                Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
                const auto& sv = svd.singularValues();
                double top = sv.size() ? sv(0) : 0.0;
                int rank = 0;
                for (int i = 0; i < sv.size(); ++i)
                    if (sv(i) > 1e-10 * std::max(1.0, top)) ++rank;
                if (rank < 2 * m)
                    throw DomainError(
                        "divisors are not in general position (normal crossing "
                        "fails at a sample point)");
                ++checked;
            } catch (const EvalError&) {
                continue;
            }
        }
    }

    DifferentialForm rep = multi_residue_representative(phi);
    ResidueResult out;
    out.ambient_rep = rep;
    out.residue = pullback(intersection, rep).simplified();
    out.input_closed = closed.verdict;
    out.residue_closed = exterior_derivative(out.residue).is_zero(opt).verdict;
    return out;
}

} // namespace crres
