#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crprime/jets.hpp"

// Domains in C^{n+1} given by real polynomial defining functions rho > 0,
// optionally carrying deformation terms in a nilpotent parameter t.

namespace crprime::domain {

using jets::cplx;
using jets::Jet;
using jets::VariableSet;

struct Monomial {
    std::vector<int> zpow, zbarpow;  // length n+1
    int tpow = 0;
    cplx coeff;
};

struct DomainSpec {
    int n = 1;                      // CR dimension; ambient complex dimension n+1
    std::vector<Monomial> rho;      // defining polynomial, rho > 0 inside
    std::vector<std::vector<cplx>> anchor_points;
    std::vector<cplx> star_center;  // radial parametrization center, default 0

    int dim() const { return n + 1; }
    bool has_t() const;
    bool is_reinhardt() const;  // every monomial has zpow == zbarpow

    // rho and holomorphic gradient at a point, at deformation value t
    double value(const std::vector<cplx>& z, double t = 0.0) const;
    std::vector<cplx> grad(const std::vector<cplx>& z, double t = 0.0) const;

    // jet of rho in chart coordinates z = p + U*zeta, with t adjoined when
    // t_max > 0
    Jet chart_jet(const std::vector<cplx>& p, const std::vector<cplx>& U,
                  int trunc, int t_max) const;

    // reality check: every monomial's conjugate partner present
    double reality_error() const;

    // validate invariants at a boundary point (rho ~ 0, d rho != 0, Levi > 0);
    // returns an error message or empty string
    std::string check_anchor(const std::vector<cplx>& p) const;

    // radial boundary point R*omega + center along direction omega (|omega|=1)
    // by 1-D Newton; throws if no crossing found
    double radial_solve(const std::vector<cplx>& omega, double t = 0.0) const;
};

// Unitary anchor chart: z = p + U zeta where U maps e_1 to the complex
// normal direction, so rho's linear part is |d rho| (zeta_1 + conj(zeta_1)).
struct AnchorChart {
    std::vector<cplx> p;
    std::vector<cplx> U;  // row-major (n+1)x(n+1), z = p + U zeta

    std::vector<cplx> to_chart_vector(const std::vector<cplx>& v) const;   // v = U w
    std::vector<cplx> from_chart_vector(const std::vector<cplx>& w) const;
};

AnchorChart make_anchor_chart(const DomainSpec& spec, const std::vector<cplx>& p);

// JSON ingestion (schema 1); throws std::runtime_error with a diagnostic on
// malformed input.
DomainSpec parse_domain_json(const std::string& text);
std::string domain_to_json(const DomainSpec& spec);

}  // namespace crprime::domain
