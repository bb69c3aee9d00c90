#pragma once

#include <complex>

#include "crres/chain.hpp"

namespace crres {

struct QuadratureOptions {
    int order = 32; ///< nodes per axis
};

/// Integrates a p-form over a p-chain: tensor Gauss-Legendre on plain axes,
/// the uniform rule on periodic axes. Throws on degree mismatch or a
/// singular evaluation on a cell image.
std::complex<double> integrate(const Chain& c, const DifferentialForm& a,
                               const QuadratureOptions& opt = {});

struct FormulaReport {
    std::complex<double> lhs; ///< tube integral of phi
    std::complex<double> rhs; ///< 2 pi i times the residue pairing
    double abs_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    ResidueResult residue;
};

/// Checks the residue formula: integral of phi over the radius-t tube of
/// gamma against 2 pi i times the integral of res[phi] over gamma.
/// Higher-order poles are first reduced.
FormulaReport verify_residue_formula(const SemiMeromorphicForm& phi,
                                     const Chain& gamma, double t,
                                     const QuadratureOptions& opt = {},
                                     double tolerance = 1e-6);

struct AbelReport {
    std::vector<std::complex<double>> component_integrals;
    std::complex<double> total;
    double tolerance = 0.0;
    bool pass = false;
};

/// Abel sum: the multivariable residue representative integrated over each
/// supplied component of the polar intersection must total zero on a
/// compact chart. Components are ambient-chart chains of dimension
/// dim - 2m; phi must have degree dim - m.
AbelReport abel_sum(const SemiMeromorphicForm& phi,
                    const std::vector<Chain>& components,
                    const QuadratureOptions& opt = {}, double tolerance = 1e-6,
                    bool compactness_certified = false);

} // namespace crres
