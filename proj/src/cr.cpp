#include "crres/cr.hpp"

#include <Eigen/Dense>
#include <random>
#include <sstream>

namespace crres {

namespace {

std::vector<double> sample_point(const Coordinates& coords, std::mt19937& rng) {
    std::uniform_real_distribution<double> uni(0.12, 0.88);
    std::vector<double> pt(coords.dim());
    for (int i = 0; i < coords.dim(); ++i) {
        double span = coords.period(i).value_or(1.0);
        pt[i] = uni(rng) * span;
    }
    return pt;
}

Eigen::MatrixXcd frame_matrix(const std::vector<VectorField>& frame,
                              const std::vector<double>& pt) {
    int dim = frame.empty() ? 0 : frame[0].coords->dim();
    Eigen::MatrixXcd A(dim, static_cast<int>(frame.size()));
    for (int j = 0; j < static_cast<int>(frame.size()); ++j)
        for (int i = 0; i < dim; ++i)
            A(i, j) = frame[j].coeffs[i].evaluate(pt);
    return A;
}

int numeric_rank(const Eigen::MatrixXcd& A, double tol) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A);
    const auto& sv = svd.singularValues();
    double top = sv.size() ? sv(0) : 0.0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > tol * std::max(1.0, top)) ++r;
    return r;
}

std::string point_string(const std::vector<double>& pt) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < pt.size(); ++i) {
        if (i) os << ", ";
        os << pt[i];
    }
    os << ")";
    return os.str();
}

bool all_rational(const std::vector<ScalarExpr>& exprs) {
    for (const auto& e : exprs)
        if (!is_rational_class(e)) return false;
    return true;
}

/// Exact solve of A c = b over the rational-function field, where columns of
/// A are the frame coefficient vectors. Returns whether the system is
/// consistent; inconsistency rows are detected with is_zero.
struct SymbolicSolve {
    bool decided = false;
    bool consistent = false;
    bool exact = true;
};

SymbolicSolve solve_membership_exact(const std::vector<VectorField>& frame,
                                     const VectorField& rhs,
                                     const ZeroTestOptions& zopt) {
    const CoordsPtr& C = rhs.coords;
    int rows = C->dim();
    int cols = static_cast<int>(frame.size());
    std::vector<std::vector<ScalarExpr>> A(rows,
                                           std::vector<ScalarExpr>(cols + 1));
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) A[i][j] = frame[j].coeffs[i];
        A[i][cols] = rhs.coeffs[i];
    }
    SymbolicSolve out;
    int row = 0;
    for (int col = 0; col < cols && row < rows; ++col) {
        int pivot = -1;
        for (int r = row; r < rows; ++r) {
            ZeroCheck z = is_zero(A[r][col], zopt);
            if (!z.exact()) out.exact = false;
            if (!z.zero()) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        std::swap(A[row], A[pivot]);
        for (int r = 0; r < rows; ++r) {
            if (r == row) continue;
            ScalarExpr factor = A[r][col] / A[row][col];
            for (int c2 = col; c2 <= cols; ++c2)
                A[r][c2] = simplify(A[r][c2] - factor * A[row][c2]);
            A[r][col] = ScalarExpr::integer(0, C);
        }
        ++row;
    }
    // consistency: any row with zero coefficients but nonzero rhs?
    out.decided = true;
    out.consistent = true;
    for (int r = 0; r < rows; ++r) {
        bool coeffs_zero = true;
        for (int c2 = 0; c2 < cols; ++c2) {
            ZeroCheck z = is_zero(A[r][c2], zopt);
            if (!z.exact()) out.exact = false;
            if (!z.zero()) {
                coeffs_zero = false;
                break;
            }
        }
        if (!coeffs_zero) continue;
        ZeroCheck z = is_zero(A[r][cols], zopt);
        if (!z.exact()) out.exact = false;
        if (!z.zero()) {
            out.consistent = false;
            return out;
        }
    }
    return out;
}

/// Sampled least-squares membership test.
bool solve_membership_numeric(const std::vector<VectorField>& frame,
                              const VectorField& rhs, const StructureOptions& opt,
                              std::vector<double>* witness) {
    const CoordsPtr& C = rhs.coords;
    std::mt19937 rng(opt.seed ^ 0x515ca1e);
    for (int trial = 0; trial < opt.samples; ++trial) {
        auto pt = sample_point(*C, rng);
        try {
            Eigen::MatrixXcd A = frame_matrix(frame, pt);
            Eigen::VectorXcd b(C->dim());
            for (int i = 0; i < C->dim(); ++i) b(i) = rhs.coeffs[i].evaluate(pt);
            Eigen::VectorXcd c = A.colPivHouseholderQr().solve(b);
            double resid = (A * c - b).norm();
            if (resid > opt.tol * std::max(1.0, b.norm())) {
                if (witness) *witness = pt;
                return false;
            }
        } catch (const EvalError&) {
            continue;
        }
    }
    return true;
}

} // namespace

CRChart::CRChart(CoordsPtr c, int n_, int k_, std::vector<VectorField> fr)
    : coords(std::move(c)), n(n_), k(k_), frame(std::move(fr)) {
    if (2 * n + k != coords->dim())
        throw DomainError("CR type (n,k) must satisfy 2n+k = dim");
    if (static_cast<int>(frame.size()) != n)
        throw DomainError("frame must contain exactly n vector fields");
    for (const auto& L : frame)
        if (!same_coords(L.coords, coords))
            throw DomainError("frame fields must live on the chart");
}

PolarSubmanifold::PolarSubmanifold(CRChartPtr h, SmoothMap p, ScalarExpr s_,
                                   std::optional<CRChart> sub)
    : host(std::move(h)), param(std::move(p)), s(std::move(s_)),
      sub_chart(std::move(sub)) {
    if (!same_coords(param.target, host->coords))
        throw DomainError("parametrization must land in the host chart");
    if (param.source->dim() != host->coords->dim() - 2)
        throw DomainError("polar submanifold parameters must have codimension two");
    if (!same_coords(s.coords(), host->coords))
        throw DomainError("defining function must live on the host chart");
}

CheckReport check_integrability(const CRChart& chart, const StructureOptions& opt) {
    CheckReport rep;
    const int n = chart.n;
    std::mt19937 rng(opt.seed);

    // frame rank and span/conj-span independence at sample points
    bool rank_ok = true, indep_ok = true;
    std::string rank_witness, indep_witness;
    for (int t = 0; t < opt.samples && n > 0; ++t) {
        auto pt = sample_point(*chart.coords, rng);
        try {
            Eigen::MatrixXcd A = frame_matrix(chart.frame, pt);
            if (numeric_rank(A, 1e-10) < n) {
                rank_ok = false;
                rank_witness = point_string(pt);
                break;
            }
            Eigen::MatrixXcd B(chart.coords->dim(), 2 * n);
            B.leftCols(n) = A;
            B.rightCols(n) = A.conjugate();
            if (numeric_rank(B, 1e-10) < 2 * n) {
                indep_ok = false;
                indep_witness = point_string(pt);
                break;
            }
        } catch (const EvalError&) {
            continue;
        }
    }
    rep.add("frame pointwise independent", rank_ok, false, rank_witness);
    rep.add("span and conjugate span intersect trivially", indep_ok, false,
            indep_witness);
    if (!rank_ok) return rep;

    // bracket membership for each pair
    std::vector<ScalarExpr> all_coeffs;
    for (const auto& L : chart.frame)
        for (const auto& c : L.coeffs) all_coeffs.push_back(c);
    bool rational = all_rational(all_coeffs);

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            VectorField B = chart.frame[i].bracket(chart.frame[j]);
            for (auto& c : B.coeffs) c = simplify(c);
            std::ostringstream label;
            label << "[L" << (i + 1) << ", L" << (j + 1) << "] in span(frame)";
            bool trivially_zero = true;
            for (const auto& c : B.coeffs)
                if (!c.is_literal_zero()) trivially_zero = false;
            if (trivially_zero) {
                rep.add(label.str(), true);
                continue;
            }
            if (rational && all_rational(B.coeffs)) {
                SymbolicSolve sol = solve_membership_exact(chart.frame, B, opt.zero);
                std::string detail;
                if (!sol.consistent) {
                    std::ostringstream d;
                    d << "witness bracket: (";
                    for (int c2 = 0; c2 < chart.coords->dim(); ++c2) {
                        if (c2) d << ", ";
                        d << B.coeffs[c2].to_string();
                    }
                    d << ")";
                    detail = d.str();
                }
                rep.add(label.str(), sol.consistent, sol.exact, detail);
            } else {
                std::vector<double> witness;
                bool ok = solve_membership_numeric(chart.frame, B, opt, &witness);
                rep.add(label.str(), ok, false,
                        ok ? "" : "witness point " + point_string(witness));
            }
        }
    }
    return rep;
}

CheckReport check_cr_function(const CRChart& chart, const ScalarExpr& f,
                              const StructureOptions& opt) {
    CheckReport rep;
    for (std::size_t j = 0; j < chart.frame.size(); ++j) {
        ScalarExpr Lf = chart.frame[j].apply(f);
        ZeroCheck z = is_zero(Lf, opt.zero);
        rep.add("L" + std::to_string(j + 1) + " f = 0", z.zero(), z.exact(),
                z.zero() ? "" : simplify(Lf).to_string());
    }
    if (chart.frame.empty())
        rep.add("no frame fields (n = 0): trivially CR", true);
    return rep;
}

CheckReport check_cr_form(const CRChart& chart, const DifferentialForm& a,
                          const StructureOptions& opt) {
    CheckReport rep;
    if (a.degree() == 0) {
        ScalarExpr f = a.coefficient({});
        return check_cr_function(chart, f, opt);
    }
    for (std::size_t j = 0; j < chart.frame.size(); ++j) {
        DifferentialForm c = contract(chart.frame[j], a);
        ZeroCheck z = c.is_zero(opt.zero);
        rep.add("contraction with L" + std::to_string(j + 1) + " vanishes",
                z.zero(), z.exact());
    }
    DifferentialForm da = exterior_derivative(a);
    if (da.degree() > chart.coords->dim() || chart.frame.empty()) {
        ZeroCheck z = da.is_zero(opt.zero);
        if (chart.frame.empty())
            rep.add("no frame fields (n = 0): trivially CR", true);
        else
            rep.add("d a lies in the next ideal power", true, z.exact());
        return rep;
    }
    for (std::size_t j = 0; j < chart.frame.size(); ++j) {
        DifferentialForm c = contract(chart.frame[j], da);
        ZeroCheck z = c.is_zero(opt.zero);
        rep.add("contraction of da with L" + std::to_string(j + 1) + " vanishes",
                z.zero(), z.exact());
    }
    return rep;
}

CheckReport check_polar(const PolarSubmanifold& sub, const StructureOptions& opt) {
    CheckReport rep;
    const CRChart& chart = *sub.host;
    const SmoothMap& phi = sub.param;
    const CoordsPtr& P = phi.source;

    // s vanishes on the image
    ScalarExpr s_on_S = sub.s.substitute(phi.components, P);
    ZeroCheck z0 = is_zero(s_on_S, opt.zero);
    rep.add("s vanishes on the parametrized image", z0.zero(), z0.exact());

    // (L_j s)|_S = 0
    for (std::size_t j = 0; j < chart.frame.size(); ++j) {
        ScalarExpr Ls = chart.frame[j].apply(sub.s).substitute(phi.components, P);
        ZeroCheck z = is_zero(Ls, opt.zero);
        rep.add("L" + std::to_string(j + 1) + " s vanishes on the image", z.zero(),
                z.exact());
    }

    // gradient checks at sample points
    std::mt19937 rng(opt.seed ^ 0x9051);
    int dim = chart.coords->dim();
    std::vector<ScalarExpr> grad;
    for (int i = 0; i < dim; ++i) grad.push_back(sub.s.partial(i));

    bool ds_ok = true, wirt_ok = true, trans_ok = true;
    std::string ds_w, wirt_w, trans_w;
    // Jacobian of the parametrization
    std::vector<std::vector<ScalarExpr>> jac(dim);
    for (int i = 0; i < dim; ++i)
        for (int r = 0; r < P->dim(); ++r)
            jac[i].push_back(phi.components[i].partial(r));

    int tested = 0;
    for (int t = 0; t < opt.samples * 2 && tested < opt.samples; ++t) {
        std::vector<double> y = sample_point(*P, rng);
        try {
            std::vector<double> x = phi.apply(y);
            ++tested;
            Eigen::VectorXcd g(dim);
            for (int i = 0; i < dim; ++i) g(i) = grad[i].evaluate(x);
            if (g.norm() < opt.tol) {
                ds_ok = false;
                ds_w = point_string(x);
                break;
            }
            // ds and conj(ds) independent: rank of [g, conj g]
            Eigen::MatrixXcd G(dim, 2);
            G.col(0) = g;
            G.col(1) = g.conjugate();
            if (numeric_rank(G, 1e-8) < 2) {
                wirt_ok = false;
                wirt_w = point_string(x);
                break;
            }
            // transversality: T S + HM = TM as a real span
            int n = chart.n;
            int cols = P->dim() + 2 * n;
            Eigen::MatrixXd T(dim, cols);
            for (int i = 0; i < dim; ++i)
                for (int r = 0; r < P->dim(); ++r) {
                    auto v = jac[i][r].evaluate(y);
                    T(i, r) = v.real();
                }
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < dim; ++i) {
                    auto v = chart.frame[j].coeffs[i].evaluate(x);
                    T(i, P->dim() + 2 * j) = v.real();
                    T(i, P->dim() + 2 * j + 1) = v.imag();
                }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
            int rank = 0;
            const auto& sv = svd.singularValues();
            double top = sv.size() ? sv(0) : 0.0;
            for (int i = 0; i < sv.size(); ++i)
                if (sv(i) > 1e-10 * std::max(1.0, top)) ++rank;
            if (rank < dim) {
                trans_ok = false;
                trans_w = point_string(x);
                break;
            }
        } catch (const EvalError&) {
            continue;
        }
    }
    rep.add("ds nonzero along the image", ds_ok, false, ds_w);
    rep.add("ds and conj(ds) independent along the image", wirt_ok, false, wirt_w);
    rep.add("T S + HM spans TM along the image", trans_ok, false, trans_w);
    return rep;
}

} // namespace crres
