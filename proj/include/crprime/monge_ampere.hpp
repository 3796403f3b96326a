#pragma once

#include "crprime/domain.hpp"
#include "crprime/jets.hpp"

// The complex Monge-Ampere operator J[u] = (-1)^{n+1} det of the bordered
// complex Hessian, Fefferman's approximate solution r with J[r] = 1 + O r^{n+2},
// and extraction of the obstruction function O.

namespace crprime::ma {

using domain::AnchorChart;
using domain::DomainSpec;
using jets::cplx;
using jets::Jet;

// Bordered-Hessian determinant with sign (-1)^{n+1}; u is a jet in n+1
// complex variables (t allowed).  Evaluated by a Schur complement against the
// complex Hessian block, which must have invertible constant term.
Jet jmap(const Jet& u, int n);

struct SolveOptions {
    int trunc = 0;           // 0 = default 2(n+2)+4
    double div_tol = 1e-9;   // relative ideal-membership tolerance
    int t_max = 0;           // carry deformation parameter to this degree
};

struct FeffermanSolution {
    int n = 0;
    AnchorChart chart;        // local coordinates z = p + U zeta
    Jet rho;                  // input defining function in chart coordinates
    Jet r;                    // Fefferman defining function, chart jet
    Jet multiplier;           // m = r / rho
    Jet obstruction;          // O = (J[r] - 1) / r^{n+2}
    int achieved_order = 0;   // n+2 on success
    std::vector<double> residuals;  // per-iteration division residuals
};

// Solve at a boundary anchor point of the domain.
FeffermanSolution fefferman_solve(const DomainSpec& spec, const std::vector<cplx>& p,
                                  const SolveOptions& opt = {});

// Same, but starting from an arbitrary defining-function jet in adapted
// coordinates (used for seed-independence tests).
FeffermanSolution fefferman_solve_jet(const Jet& rho_chart, int n, const SolveOptions& opt = {});

// Obstruction value at the anchor (real part; the imaginary part is a
// numerical diagnostic).
double obstruction_at(const DomainSpec& spec, const std::vector<cplx>& p,
                      const SolveOptions& opt = {});

}  // namespace crprime::ma
