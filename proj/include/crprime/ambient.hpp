#pragma once

#include <optional>

#include "crprime/jetmat.hpp"
#include "crprime/jets.hpp"

// The ambient Lorentz-Kahler metric on C* x C^{n+1} with potential
// rr = |z0|^2 r(z), computed on the slice z0 = 1 as jets in the n+2 complex
// variables (w, zeta_1..zeta_{n+1}) with w = z0 - 1.  Densities of weight k
// are identified with slice jets carrying binomial z0-power factors.

namespace crprime::ambient {

using jets::cplx;
using jets::Jet;
using jets::JetMat;
using jets::Symbol;
using jets::VariableSet;

struct DensityJet {
    Jet jet;
    int weight = 0;

    DensityJet() = default;
    DensityJet(Jet j, int w) : jet(std::move(j)), weight(w) {}
};

DensityJet operator+(const DensityJet& a, const DensityJet& b);
DensityJet operator-(const DensityJet& a, const DensityJet& b);
DensityJet operator*(const DensityJet& a, const DensityJet& b);

// Promote a boundary-chart jet (n+1 complex vars) to an ambient slice jet
// (n+2 vars), index 0 being the fiber deviation w.
Jet embed_boundary(const Jet& f, int D_ambient);
// Restrict an ambient slice jet to z0 = 1 (drop the w variables).
Jet restrict_to_boundary_vars(const Jet& F);
// (1+w)^k (1+wb)^k as a jet (binomial series for negative k).
Jet z0_power(const VariableSet& vs, int D, int k);

struct AmbientState {
    int n = 0;
    int D = 0;  // truncation of the potential jet
    VariableSet vs;
    Jet rr;            // ambient potential |z0|^2 r
    JetMat g;          // g.at(A,B) = g_{A Bbar}, truncation D-2
    JetMat ginv;       // ginv.at(A,B) = g^{A Bbar}
    std::vector<JetMat> gamma;      // gamma[C].at(A,B) = Gamma^C_{AB}
    Jet detpos;        // (-1)^{n+1} det g = |z0|^{2(n+1)} J[r]
    std::optional<Jet> obstruction;  // ambient lift of O, weight -n-2

    int dim() const { return n + 2; }
    // weight-k homogeneous extension of a boundary-chart jet
    DensityJet lift(const Jet& f_boundary, int k) const;
    DensityJet lift_ambient(Jet F_ambient, int k) const { return {std::move(F_ambient), k}; }
};

// Build from a boundary-chart Fefferman jet (or any defining jet).  When an
// obstruction jet is supplied it is lifted to its ambient weight.
AmbientState build_ambient(const Jet& r_boundary, int n, int D_ambient,
                           const Jet* obstruction_boundary = nullptr);

// Kahler Laplacian g^{A Bbar} d_A d_Bbar; weight drops by one.
DensityJet laplacian(const AmbientState& st, const DensityJet& F);
// Holomorphic covariant Hessian nabla_A nabla_B F (symmetric).
JetMat cov_hessian_hol(const AmbientState& st, const Jet& F);
// Antiholomorphic covariant Hessian nabla_Abar nabla_Bbar F.
JetMat cov_hessian_anti(const AmbientState& st, const Jet& F);
// Ricci tensor Ric_{A Bbar} = -d_A d_Bbar log((-1)^{n+1} det g).
JetMat ricci(const AmbientState& st);

// raised gradient F^A = g^{A Bbar} d_Bbar F
std::vector<Jet> gradient_raised(const AmbientState& st, const Jet& F);
// pairing F_A G^A
Jet pair_grad(const AmbientState& st, const Jet& F, const Jet& G);
// Euler vector field components (z0, 0, ..., 0)
std::vector<Jet> euler_field(const AmbientState& st);

struct GjmsResult {
    double via_power = 0.0;   // Delta^{n+2k+1} of an arbitrary extension, at anchor
    double via_psi = 0.0;     // c_{n,k} * psi with Delta F = psi r^{n+2k}
    Jet psi;                  // the density psi (ambient jet)
    double divisibility_residual = 0.0;
};

// Extension F of f with Delta F in (r^order); order <= n+2k (log obstruction).
DensityJet harmonic_extend(const AmbientState& st, const Jet& f_boundary, int k, int order);
// The GJMS operator on a weight-k boundary density, both routes cross-checked.
GjmsResult gjms(const AmbientState& st, const Jet& f_boundary, int k);

struct Pn3Result {
    Jet value_jet;        // Re Delta^{n+1} nabla^{AB}{}_{AB} F as ambient jet
    double value = 0.0;   // restriction at the anchor
    double decomposition_residual = 0.0;  // Lemma A.2 identity defect at anchor
};

// P_{n+3} on a weight-1 density given by an ambient extension Fdot.
// `check_decomposition` also evaluates the Delta^{n+3} route and the
// obstruction terms (requires st.obstruction).
Pn3Result p_n3(const AmbientState& st, const Jet& Fdot_ambient, bool check_decomposition = false);

// 2 nabla_{albar btbar} F restricted to frame vectors (boundary components of
// antiholomorphic frame fields, length n per vector).
std::vector<std::vector<cplx>> p_alphabeta_ambient(const AmbientState& st, const Jet& F_ambient,
                                                   const std::vector<std::vector<cplx>>& Zbar);

// Extension with nabla_AB F in (r^m) for f in ker P_{alpha beta}.
struct BggResult {
    Jet F;
    double hessian_residual = 0.0;  // max |coeff| of nabla_AB F after division by r^m
};
BggResult extend_bgg(const AmbientState& st, const Jet& F0_ambient, int m_target);

// Pointwise Q-prime in the flat trivialization, optionally rescaled by a
// holomorphic polynomial G (log h -> log h + G + Gbar).
double qprime_pointwise(const AmbientState& st, const Jet* G_boundary_hol = nullptr);

struct StrictNormalizeResult {
    Jet r_hat;                  // corrected boundary defining jet
    double delta_obstruction_const = 0.0;  // Delta O^ at the anchor, after
    double boundary_shift = 0.0;           // |O^ - O| at the anchor
};
StrictNormalizeResult strict_normalize(const AmbientState& st, const Jet& r_boundary, int n);

}  // namespace crprime::ambient
