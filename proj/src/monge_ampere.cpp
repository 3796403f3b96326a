#include "crprime/monge_ampere.hpp"

#include <cmath>
#include <stdexcept>

#include "crprime/jetmat.hpp"

namespace crprime::ma {

using jets::JetMat;
using jets::Symbol;

Jet jmap(const Jet& u, int n) {
    const int m = n + 1;
    if (u.vars().num_complex != m) throw std::invalid_argument("jmap: wrong variable count");
    // Hessian block H_{a bbar} = d_a d_bbar u and border vectors
    std::vector<Jet> du(m), dub(m);
    for (int a = 0; a < m; ++a) {
        du[a] = u.deriv_keep(Symbol::hol(a));
        dub[a] = u.deriv_keep(Symbol::anti(a));
    }
    JetMat H(m, m, u * cplx(0.0));
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) H.at(a, b) = du[a].deriv_keep(Symbol::anti(b));
    Jet detH = H.det();
    if (std::abs(detH.constant_term()) < 1e-12)
        throw std::domain_error("jmap: degenerate complex Hessian at base point");
    JetMat Hinv = H.inverse();
    // Schur complement u - u_a (H^{-1})^{a bbar} u_bbar  (pairing chosen so the
    // bordered determinant equals det(H) * schur)
    Jet schur = u * cplx(1.0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) schur -= du[a] * Hinv.at(b, a) * dub[b];
    Jet result = detH * schur;
    if ((n + 1) % 2) result = -result;
    return result;
}

namespace {

FeffermanSolution solve_core(const Jet& rho, int n, const SolveOptions& opt) {
    FeffermanSolution sol;
    sol.n = n;
    sol.rho = rho;
    const int D = rho.trunc();

    // zeroth normalization r0 = rho * J[rho]^{-1/(n+2)}
    Jet jr = jmap(rho, n);
    if (jr.constant_term().real() <= 0.0)
        throw std::domain_error("fefferman_solve: J[rho] not positive at anchor (Levi form?)");
    Jet mult = jr.power(-1.0 / double(n + 2));
    Jet r = rho * mult;

    // Iterate s = 1..n+1, killing the r^s coefficient of J[r]-1.  `valid`
    // tracks the jet degree through which r is exact; each step consumes one
    // degree (two derivative orders in J, regained all but one by the r^{s+1}
    // factor of the correction).
    int valid = D;
    for (int s = 1; s <= n + 1; ++s) {
        Jet defect = jmap(r, n).truncated(valid - 2);
        defect.raw()[0] -= 1.0;
        auto div = jets::divide_by_defining(defect, r.truncated(valid), s);
        sol.residuals.push_back(div.residual);
        double coef = 1.0 / (double(s + 1) * double(n + 2 - s));
        Jet rs1 = Jet::constant(r.vars(), r.trunc(), 1.0);
        for (int k = 0; k <= s; ++k) rs1 = rs1 * r;
        int cap = std::min(div.quotient.trunc() + s + 1, D);
        Jet corr = Jet::mul_capped(div.quotient.with_trunc(cap), rs1.truncated(cap), cap);
        r = (r.truncated(cap) - corr * cplx(coef)).with_trunc(D);
        valid = valid - 1;
    }

    // final obstruction and order check
    Jet defect = jmap(r, n).truncated(valid - 2);
    defect.raw()[0] -= 1.0;
    auto fin = jets::divide_by_defining(defect, r.truncated(valid), n + 2);
    sol.residuals.push_back(fin.residual);
    if (fin.residual > opt.div_tol)
        throw std::runtime_error("fefferman_solve: J[r]-1 not divisible by r^{n+2} (residual " +
                                 std::to_string(fin.residual) + ")");
    sol.achieved_order = n + 2;
    sol.obstruction = fin.quotient;
    sol.r = r;
    sol.multiplier = jets::divide_by_defining(r.truncated(valid), rho, 1).quotient;
    return sol;
}

}  // namespace

FeffermanSolution fefferman_solve_jet(const Jet& rho_chart, int n, const SolveOptions& opt) {
    return solve_core(rho_chart, n, opt);
}

FeffermanSolution fefferman_solve(const DomainSpec& spec, const std::vector<cplx>& p,
                                  const SolveOptions& opt) {
    std::string err = spec.check_anchor(p);
    if (!err.empty()) throw std::runtime_error("fefferman_solve: " + err);
    int D = opt.trunc > 0 ? opt.trunc : 2 * (spec.n + 2) + 4;
    auto chart = domain::make_anchor_chart(spec, p);
    Jet rho = spec.chart_jet(p, chart.U, D, opt.t_max);
    auto sol = solve_core(rho, spec.n, opt);
    sol.chart = chart;
    return sol;
}

double obstruction_at(const DomainSpec& spec, const std::vector<cplx>& p,
                      const SolveOptions& opt) {
    auto sol = fefferman_solve(spec, p, opt);
    return sol.obstruction.constant_term().real();
}

}  // namespace crprime::ma
