#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace crres;
using namespace crres::testing;

namespace {

/// Constant value of a 0-form residue on a point.
ScalarExpr const_residue(const ResidueResult& r) {
    return r.residue.coefficient({});
}

/// numerator helper: dz ^ dx3 on the T3 chart (so that phi = (dz/z) ^ dx3)
DifferentialForm P_numerator(const Torus3& T) { return wedge(T.dz, T.dx3); }

} // namespace

TEST_CASE("decomposition against the defining function") {
    Plane P;
    SUBCASE("pure ds component") {
        DifferentialForm w = P.dz * ScalarExpr::exp(P.z);
        auto [alpha, beta] = decompose(w, P.frame);
        CHECK(exact_zero(alpha));
        CHECK(exact_zero(beta - DifferentialForm::from_scalar(ScalarExpr::exp(P.z))));
    }
    SUBCASE("pure Phi component") {
        DifferentialForm w =
            exterior_derivative(DifferentialForm::from_scalar(P.z.conj()));
        auto [alpha, beta] = decompose(w, P.frame);
        CHECK(exact_zero(alpha - w));
        CHECK(exact_zero(beta));
    }
    SUBCASE("transverse factor passes through") {
        Torus3 T;
        DifferentialForm w = wedge(T.dz, T.dx3) * ScalarExpr::coordinate(2, T.C);
        auto [alpha, beta] = decompose(w, T.frame);
        CHECK(exact_zero(alpha));
        CHECK(exact_zero(beta - T.dx3 * ScalarExpr::coordinate(2, T.C)));
    }
    SUBCASE("reconstruction and projection invariants, randomized") {
        Torus3 T;
        std::mt19937 rng(11);
        DifferentialForm ds = T.dz;
        for (int t = 0; t < 15; ++t) {
            DifferentialForm w =
                wedge(T.dz, T.dx3) * random_z_poly(T.z, 2, rng) +
                wedge(exterior_derivative(
                          DifferentialForm::from_scalar(T.z.conj())),
                      T.dx3) *
                    random_z_poly(T.z, 2, rng);
            auto [alpha, beta] = decompose(w, T.frame);
            CHECK(exact_zero(w - alpha - wedge(ds, beta)));
            CHECK(exact_zero(contract(T.frame.dual, alpha)));
        }
    }
}

TEST_CASE("the d/ds operator") {
    Plane P;
    SUBCASE("holomorphic derivative") {
        DifferentialForm lam = DifferentialForm::from_scalar(ScalarExpr::exp(P.z));
        CHECK(exact_zero(d_ds(lam, P.frame) -
                         DifferentialForm::from_scalar(ScalarExpr::exp(P.z))));
    }
    SUBCASE("antiholomorphic functions are annihilated") {
        DifferentialForm lam = DifferentialForm::from_scalar(P.z.conj());
        CHECK(exact_zero(d_ds(lam, P.frame)));
    }
    SUBCASE("acts as (d/dRe - i d/dIm)/2 on coefficients") {
        ScalarExpr re_s = ScalarExpr::coordinate(0, P.C);
        DifferentialForm lam = DifferentialForm::from_scalar(re_s * re_s);
        CHECK(exact_zero(d_ds(lam, P.frame) - DifferentialForm::from_scalar(re_s)));
    }
    SUBCASE("rejects arguments with a ds component") {
        CHECK_THROWS_AS(d_ds(P.dz, P.frame), DomainError);
    }
}

TEST_CASE("iterated d/ds") {
    Plane P;
    SUBCASE("r = 0 reduces to the decomposition") {
        DifferentialForm w = P.dz * P.z;
        auto [alpha, beta] = decompose(w, P.frame);
        CHECK(exact_zero(iterate_ds(w, P.frame, 0) - beta));
    }
    SUBCASE("z^3 dz twice differentiated") {
        DifferentialForm w = P.dz * P.z.pow(3);
        DifferentialForm expect =
            DifferentialForm::from_scalar(ScalarExpr::integer(6, P.C) * P.z);
        CHECK(exact_zero(iterate_ds(w, P.frame, 2) - expect));
    }
    SUBCASE("antiholomorphic input dies") {
        DifferentialForm w =
            exterior_derivative(DifferentialForm::from_scalar(P.z.conj()));
        CHECK(exact_zero(iterate_ds(w, P.frame, 0)));
        CHECK(exact_zero(iterate_ds(w, P.frame, 3)));
    }
}

TEST_CASE("simple-pole residues") {
    Plane P;
    SUBCASE("the classical residue") {
        auto rr = residue_simple(P.mero(P.dz, 1));
        CHECK(exact_zero(const_residue(rr) - ScalarExpr::integer(1, P.origin.param.source)));
        CHECK(rr.input_closed == Verdict::ExactZero);
        CHECK(rr.residue_closed == Verdict::ExactZero);
    }
    SUBCASE("T3 residue is dx3 restricted to the circle") {
        Torus3 T;
        auto rr = residue_simple(T.mero(wedge(T.dz, T.dx3), 1));
        CoordsPtr Pm = T.circle.param.source;
        DifferentialForm expect = DifferentialForm::d_coord(0, Pm);
        CHECK(exact_zero(rr.residue - expect));
        REQUIRE(rr.residue_cr.has_value());
        CHECK(*rr.residue_cr);
    }
    SUBCASE("divisor order gate") {
        CHECK_THROWS_AS(residue_simple(P.mero(P.dz, 2)), DomainError);
    }
    SUBCASE("non-closed inputs are rejected") {
        DifferentialForm w = P.dz * P.z.conj(); // conj z dz / z is not closed
        CHECK_THROWS_AS(residue_simple(P.mero(w, 1)), DomainError);
    }
}

TEST_CASE("residue uniqueness and invariance (Theorem 4.1 shape)") {
    Torus3 T;
    std::mt19937 rng(23);
    SUBCASE("ds/s ^ psi + theta recovers psi on S, randomized") {
        for (int t = 0; t < 15; ++t) {
            // closed psi: constant multiples of dx3 plus an exact piece
            DifferentialForm psi =
                T.dx3 * ScalarExpr::constant(CRat(Rat(3), Rat(-2)), T.C) +
                exterior_derivative(
                    DifferentialForm::from_scalar(random_z_poly(T.z, 3, rng)));
            DifferentialForm theta =
                wedge(T.dz, T.dx3) * ScalarExpr::constant(CRat(Rat(5)), T.C);
            // phi = (ds/s) ^ psi + theta, as numerator ds ^ psi + s theta
            DifferentialForm num = wedge(T.dz, psi) + theta * T.z;
            auto rr = residue_simple(T.mero(num, 1));
            DifferentialForm expect = pullback(T.circle.param, psi);
            CHECK(exact_zero(rr.residue - expect));
        }
    }
    SUBCASE("replacing s by h s does not move the residue") {
        for (int t = 0; t < 8; ++t) {
            ScalarExpr h = ScalarExpr::integer(2, T.C) + T.z * T.z *
                           ScalarExpr::constant(CRat(Rat(1, 4)), T.C);
            ScalarExpr s2 = simplify(h * T.z);
            AdaptedFrame fr2 = AdaptedFrame::derive(T.C, s2, "x1", "x2");
            PolarSubmanifold sub2(T.chart, T.circle.param, s2, T.circle.sub_chart);
            DifferentialForm psi = T.dx3 * ScalarExpr::constant(
                                               CRat(Rat(t + 1), Rat(2)), T.C);
            DifferentialForm num1 = wedge(T.dz, psi);
            // same form written against the scaled defining function:
            // phi = dz ^ psi / z = (h dz ^ psi) / (h z)
            DifferentialForm num2 = wedge(T.dz, psi) * h;
            auto r1 = residue_simple(
                SemiMeromorphicForm(num1, {PoleEntry{T.circle, T.frame, 1}}));
            auto r2 = residue_simple(
                SemiMeromorphicForm(num2, {PoleEntry{sub2, fr2, 1}}));
            CHECK(exact_zero(r1.residue - r2.residue));
        }
    }
}

TEST_CASE("residue form properties") {
    Torus3 T;
    std::mt19937 rng(29);
    SUBCASE("product with a closed smooth form (res[phi ^ chi] = res[phi] ^ chi|S)") {
        for (int t = 0; t < 15; ++t) {
            // phi = dz/z: numerator dz; chi = closed 1-form
            DifferentialForm chi =
                T.dx3 * ScalarExpr::constant(CRat(Rat(rng() % 7), Rat(1)), T.C) +
                exterior_derivative(
                    DifferentialForm::from_scalar(random_z_poly(T.z, 2, rng)));
            SemiMeromorphicForm phi = T.mero(P_numerator(T), 1);
            SemiMeromorphicForm phichi = T.mero(wedge(P_numerator(T), chi), 1);
            auto r1 = residue_simple(phi);
            auto r2 = residue_simple(phichi);
            DifferentialForm expect =
                wedge(r1.residue, pullback(T.circle.param, chi));
            CHECK(exact_zero(r2.residue - expect));
        }
    }
    SUBCASE("restriction to a transversal slice (vanishing pullback descends)") {
        // phi = (dz/z) ^ dx3 vanishes on Sigma1 = {x3 = 0}; its residue dx3
        // vanishes on Sigma1 cap S = {point}
        auto rr = residue_simple(T.mero(wedge(T.dz, T.dx3), 1));
        auto p0 = std::make_shared<Coordinates>(std::vector<std::string>{});
        CoordsPtr P0 = p0;
        SmoothMap point(P0, T.circle.param.source, {ScalarExpr::integer(0, P0)});
        CHECK(pullback(point, rr.residue).components().empty());
    }
    SUBCASE("pointwise estimate |res| <= |s phi| / |ds| at samples") {
        std::mt19937 rng2(31);
        std::uniform_real_distribution<double> uni(0.05, 0.95);
        for (int t = 0; t < 10; ++t) {
            DifferentialForm num =
                wedge(T.dz, T.dx3) * random_z_poly(T.z, 2, rng2);
            auto rr = residue_simple(T.mero(num, 1));
            for (int smp = 0; smp < 32; ++smp) {
                double u = uni(rng2);
                std::vector<double> x{0.0, 0.0, u}; // on S
                // |s phi| = euclidean norm of the numerator coefficients
                double num_norm = 0.0, res_norm = 0.0;
                for (const auto& [idx, c] : num.components())
                    num_norm += std::norm(c.evaluate(x));
                for (const auto& [idx, c] : rr.residue.components())
                    res_norm += std::norm(c.evaluate({u}));
                double ds_norm = 0.0;
                for (int i = 0; i < T.C->dim(); ++i)
                    ds_norm += std::norm(T.z.partial(i).evaluate(x));
                CHECK(std::sqrt(res_norm) <=
                      std::sqrt(num_norm) / std::sqrt(ds_norm) + 1e-12);
            }
        }
    }
    SUBCASE("naturality under a CR-transversal map") {
        // F : C^2_w -> C^2_z, (w1, w2) -> (w1, w2 + w1^2); S = {z1 = 0}
        C2 M;
        C2 W;
        ScalarExpr w1sq_re = ScalarExpr::coordinate(0, W.C).pow(2) -
                             ScalarExpr::coordinate(1, W.C).pow(2);
        ScalarExpr w1sq_im = ScalarExpr::integer(2, W.C) *
                             ScalarExpr::coordinate(0, W.C) *
                             ScalarExpr::coordinate(1, W.C);
        SmoothMap F(W.C, M.C,
                    {ScalarExpr::coordinate(0, W.C), ScalarExpr::coordinate(1, W.C),
                     ScalarExpr::coordinate(2, W.C) + w1sq_re,
                     ScalarExpr::coordinate(3, W.C) + w1sq_im});
        // phi = (dz1/z1) ^ z2 dz2
        DifferentialForm num = wedge(M.dz1, M.dz2 * M.z2);
        SemiMeromorphicForm phi(num, {PoleEntry{M.S1, M.f1, 1}});
        auto res_M = residue_simple(phi);
        // F^* phi has defining function w1 = z1 o F and numerator F^* num
        SemiMeromorphicForm pulled(pullback(F, num), {PoleEntry{W.S1, W.f1, 1}});
        auto res_W = residue_simple(pulled);
        // the restricted map S^* -> S is the identity in parameters here
        CoordsPtr Q = M.S1.param.source;
        SmoothMap identity(Q, Q,
                           {ScalarExpr::coordinate(0, Q), ScalarExpr::coordinate(1, Q)});
        DifferentialForm expect = pullback(identity, res_M.residue);
        CHECK(exact_zero(res_W.residue - expect));
    }
}

TEST_CASE("higher-order poles") {
    Plane P;
    SUBCASE("residue class examples") {
        auto r1 = residue_class(P.mero(P.dz * ScalarExpr::exp(P.z), 2));
        CHECK(exact_zero(const_residue(r1) -
                         ScalarExpr::integer(1, P.origin.param.source)));
        auto r2 = residue_class(P.mero(P.dz * P.z, 2));
        CHECK(exact_zero(const_residue(r2) -
                         ScalarExpr::integer(1, P.origin.param.source)));
        auto r3 = residue_class(P.mero(P.dz, 2));
        CHECK(exact_zero(const_residue(r3)));
    }
    SUBCASE("reduce_pole drops the order and tracks exactness") {
        SemiMeromorphicForm phi = P.mero(P.dz * ScalarExpr::exp(P.z), 2);
        auto [hat, rho] = reduce_pole(phi);
        CHECK(hat.divisor[0].order == 1);
        DifferentialForm diff = hat.as_form() - phi.as_form() +
                                exterior_derivative(rho.as_form());
        CHECK(exact_zero(diff));
        auto rr = residue_simple(hat);
        CHECK(exact_zero(const_residue(rr) -
                         ScalarExpr::integer(1, P.origin.param.source)));
    }
    SUBCASE("exact forms reduce to zero") {
        auto [hat, rho] = reduce_pole(P.mero(P.dz, 2));
        CHECK(hat.numerator.simplified().components().empty());
    }
    SUBCASE("q < 2 is rejected") {
        CHECK_THROWS_AS(reduce_pole(P.mero(P.dz, 1)), DomainError);
    }
    SUBCASE("double reduction of z^2 dz / z^3") {
        SemiMeromorphicForm phi = P.mero(P.dz * P.z.pow(2), 3);
        LaurentExpansion lau = laurent_expand(phi);
        CHECK(exact_zero(const_residue(lau.residue) -
                         ScalarExpr::integer(1, P.origin.param.source)));
    }
}

TEST_CASE("Laurent expansion") {
    Plane P;
    SUBCASE("e^z dz / z^3 has residue 1/2") {
        LaurentExpansion lau = laurent_expand(P.mero(P.dz * ScalarExpr::exp(P.z), 3));
        CHECK(lau.eta.size() == 2);
        CHECK(exact_zero(const_residue(lau.residue) -
                         ScalarExpr::constant(CRat(Rat(1, 2)),
                                              P.origin.param.source)));
    }
    SUBCASE("already-simple poles expand trivially") {
        LaurentExpansion lau = laurent_expand(P.mero(P.dz, 1));
        CHECK(lau.eta.empty());
        CHECK(exact_zero(lau.simple.numerator - P.dz));
    }
    SUBCASE("(1 + 5z) dz / z^2 has residue 5") {
        DifferentialForm num =
            P.dz * (ScalarExpr::integer(1, P.C) +
                    ScalarExpr::integer(5, P.C) * P.z);
        LaurentExpansion lau = laurent_expand(P.mero(num, 2));
        CHECK(exact_zero(const_residue(lau.residue) -
                         ScalarExpr::integer(5, P.origin.param.source)));
    }
    SUBCASE("reconstruction identity") {
        std::mt19937 rng(37);
        for (int t = 0; t < 10; ++t) {
            SemiMeromorphicForm phi = P.mero(P.dz * random_z_poly(P.z, 4, rng), 3);
            LaurentExpansion lau = laurent_expand(phi);
            // phi - simple/s - d(sum eta_j / s^j) == 0
            DifferentialForm recon = lau.simple.as_form();
            for (std::size_t j = 0; j < lau.eta.size(); ++j) {
                DifferentialForm piece(lau.eta[j].degree(), P.C);
                for (const auto& [idx, c] : lau.eta[j].components())
                    piece.set_coefficient(idx,
                                          c / P.z.pow(static_cast<int>(j) + 1));
                recon = recon + exterior_derivative(piece);
            }
            CHECK(exact_zero(phi.as_form() - recon));
        }
    }
}

TEST_CASE("iterated residues") {
    C2 M;
    CoordsPtr P0 = M.origin.source;
    SUBCASE("dz1 ^ dz2 / (z1 z2) gives -1 under the documented order") {
        auto rr = residue_multi(M.mero(wedge(M.dz1, M.dz2), 1, 1), M.origin);
        CHECK(exact_zero(rr.residue.coefficient({}) -
                         ScalarExpr::integer(-1, P0)));
    }
    SUBCASE("matches nested single residues in the declared order") {
        DifferentialForm num = wedge(M.dz1 * M.z1, M.dz2 * ScalarExpr::exp(M.z2));
        SemiMeromorphicForm phi = M.mero(num, 2, 2);
        auto rr = residue_multi(phi, M.origin);
        // nested: apply the z2 operator first, then z1, on the ambient level
        DifferentialForm step = iterate_ds(num, M.f2, 1);
        step = iterate_ds(step, M.f1, 1);
        DifferentialForm nested = pullback(M.origin, step);
        CHECK(exact_zero(rr.residue - nested));
    }
    SUBCASE("adjacent swap negates the representative") {
        DifferentialForm num = wedge(M.dz1 * M.z1.pow(2), M.dz2);
        SemiMeromorphicForm fwd = M.mero(num, 3, 1);
        SemiMeromorphicForm rev(num, {PoleEntry{M.S2, M.f2, 1},
                                      PoleEntry{M.S1, M.f1, 3}});
        auto a = residue_multi(fwd, M.origin);
        auto b = residue_multi(rev, M.origin);
        CHECK(exact_zero(a.residue + b.residue));
    }
    SUBCASE("missing ds component kills the residue") {
        DifferentialForm num =
            wedge(exterior_derivative(
                      DifferentialForm::from_scalar(M.z1.conj())),
                  M.dz2);
        // dzbar1 ^ dz2 / (z1 z2) is not closed, so go through the operator only
        DifferentialForm rep = multi_residue_representative(M.mero(num, 1, 1));
        CHECK(pullback(M.origin, rep).components().empty());
    }
    SUBCASE("non-transversal divisors are rejected") {
        SemiMeromorphicForm bad(wedge(M.dz1, M.dz2),
                                {PoleEntry{M.S1, M.f1, 1}, PoleEntry{M.S1, M.f1, 1}});
        CHECK_THROWS(residue_multi(bad, M.origin));
    }
}

TEST_CASE("two-sided product formula for a shared defining function") {
    // dim-5 chart (x1..x5), s = z = x1 + i x2, w = x3 + i x4 transverse
    auto c = std::make_shared<Coordinates>(
        std::vector<std::string>{"x1", "x2", "x3", "x4", "x5"});
    c->add_complex_alias("z", 0, 1);
    c->add_complex_alias("w", 2, 3);
    CoordsPtr C = c;
    auto chart = std::make_shared<CRChart>(
        C, 2, 1,
        std::vector<VectorField>{VectorField::wirtinger("z", C, true),
                                 VectorField::wirtinger("w", C, true)});
    ScalarExpr z = ScalarExpr::complex_alias("z", C);
    ScalarExpr w = ScalarExpr::complex_alias("w", C);
    AdaptedFrame fr = AdaptedFrame::derive(C, z, "x1", "x2");
    auto p = std::make_shared<Coordinates>(std::vector<std::string>{"y1", "y2", "y3"});
    CoordsPtr P = p;
    SmoothMap param(P, C,
                    {ScalarExpr::integer(0, P), ScalarExpr::integer(0, P),
                     ScalarExpr::coordinate(0, P), ScalarExpr::coordinate(1, P),
                     ScalarExpr::coordinate(2, P)});
    PolarSubmanifold S(chart, param, z);

    DifferentialForm dz = exterior_derivative(DifferentialForm::from_scalar(z));
    DifferentialForm dw = exterior_derivative(DifferentialForm::from_scalar(w));
    DifferentialForm dwbar =
        exterior_derivative(DifferentialForm::from_scalar(w.conj()));

    std::mt19937 rng(53);
    std::uniform_int_distribution<int> coeff(-3, 3);
    for (int t = 0; t < 10; ++t) {
        // phi1 = (dz/z) ^ psi1 + theta1, degree 2, all pieces closed
        DifferentialForm psi1 =
            dw * (ScalarExpr::integer(coeff(rng), C) +
                  w * w * ScalarExpr::integer(coeff(rng), C));
        DifferentialForm theta1 = wedge(dw, dwbar) *
                                  ScalarExpr::constant(CRat(Rat(coeff(rng))), C);
        DifferentialForm num1 = wedge(dz, psi1) + theta1 * z;
        // phi2 = (dz/z) ^ psi2 + theta2, degree 1
        ScalarExpr psi2 = ScalarExpr::constant(CRat(Rat(coeff(rng)), Rat(2)), C);
        DifferentialForm theta2 = dw * ScalarExpr::integer(coeff(rng), C);
        DifferentialForm num2 = dz * psi2 + theta2 * z;

        SemiMeromorphicForm phi1(num1, {PoleEntry{S, fr, 1}});
        SemiMeromorphicForm phi2(num2, {PoleEntry{S, fr, 1}});

        // left side: phi1 ^ phi2 has numerator num1 ^ num2 over z^2 and a
        // first-order pole after cancellation
        SemiMeromorphicForm prod(wedge(num1, num2),
                                 {PoleEntry{S, fr, 2}});
        SemiMeromorphicForm prod1 = prod.cancel_pole_factors();
        REQUIRE(prod1.divisor[0].order == 1);
        DifferentialForm lhs = residue_simple(prod1).residue;

        // right side pieces
        SemiMeromorphicForm phi1_ds(wedge(num1, dz), {PoleEntry{S, fr, 2}});
        SemiMeromorphicForm ds_phi2(wedge(dz, num2), {PoleEntry{S, fr, 2}});
        DifferentialForm r_phi1 = residue_simple(phi1).residue;
        DifferentialForm r_phi2 = residue_simple(phi2).residue;
        DifferentialForm r_phi1_ds =
            residue_simple(phi1_ds.cancel_pole_factors()).residue;
        DifferentialForm r_ds_phi2 =
            residue_simple(ds_phi2.cancel_pole_factors()).residue;

        DifferentialForm rhs = wedge(r_phi1_ds, r_phi2) + wedge(r_phi1, r_ds_phi2);
        CHECK(exact_zero(lhs - rhs));
    }
}
