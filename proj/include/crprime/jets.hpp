#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Truncated multivariate power series ("jets") with complex coefficients.
//
// A jet lives over a VariableSet: m complex variables, each contributing a
// holomorphic symbol z_i and an antiholomorphic symbol zb_i, plus optionally
// a real nilpotent deformation parameter t with its own degree cap.  The
// z/zb symbols share a single total-degree truncation D; t-degree is counted
// separately.  Coefficients are stored densely in a nested triangular layout
// so that multiplication reduces to contiguous truncated convolutions.

namespace crprime::jets {

using cplx = std::complex<double>;

struct VariableSet {
    int num_complex = 1;
    int t_max = 0;  // 0 = no deformation parameter

    bool operator==(const VariableSet&) const = default;
    int symbols() const { return 2 * num_complex; }
};

struct Symbol {
    enum Kind { Hol, Anti, T };
    Kind kind = Hol;
    int index = 0;

    static Symbol hol(int i) { return {Hol, i}; }
    static Symbol anti(int i) { return {Anti, i}; }
    static Symbol t() { return {T, 0}; }
};

// Binomial C(n,k) as int64; n stays small (symbols + degree <= ~40).
std::int64_t binom(int n, int k);

// Number of monomials of total degree <= D in s variables.
inline std::int64_t tri_size(int s, int D) { return binom(s + D, s); }

// Cached per-(s,D) tables: exponent decode, conjugation permutation,
// degree-graded index lists.
struct LayoutTables {
    int s = 0, D = 0;
    std::vector<std::uint8_t> expo;           // size N*s, exponents per index
    std::vector<std::int32_t> conj_perm;      // hol/anti swap permutation
    std::vector<std::vector<std::int32_t>> by_degree;
    static const LayoutTables& get(int s, int D);
};

class Jet {
  public:
    Jet() = default;
    Jet(const VariableSet& vs, int trunc)
        : vars_(vs), trunc_(trunc),
          coef_((vs.t_max + 1) * tri_size(vs.symbols(), trunc)) {
        if (trunc < 0) throw std::invalid_argument("jet truncation < 0");
    }

    static Jet constant(const VariableSet& vs, int trunc, cplx value);
    static Jet variable(const VariableSet& vs, int trunc, Symbol sym);

    const VariableSet& vars() const { return vars_; }
    int trunc() const { return trunc_; }
    std::int64_t block_size() const { return tri_size(vars_.symbols(), trunc_); }
    const std::vector<cplx>& raw() const { return coef_; }
    std::vector<cplx>& raw() { return coef_; }

    // coefficient access by exponents; ze/zbe sized num_complex
    cplx coeff(const std::vector<int>& ze, const std::vector<int>& zbe, int te = 0) const;
    void set_coeff(const std::vector<int>& ze, const std::vector<int>& zbe, int te, cplx v);

    cplx constant_term() const { return coef_.empty() ? cplx(0) : coef_[0]; }
    double max_abs() const;
    bool is_zero(double tol) const { return max_abs() <= tol; }

    // Truncated-ring arithmetic.  Binary ops require equal VariableSets and
    // truncate the result to the smaller of the two truncation orders.
    Jet operator+(const Jet& o) const;
    Jet operator-(const Jet& o) const;
    Jet operator*(const Jet& o) const;
    Jet operator-() const;
    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet operator*(cplx s) const;
    friend Jet operator*(cplx s, const Jet& a) { return a * s; }

    // Product computed through degree `cap` (caller asserts validity; the
    // stored coefficients above each factor's truncation are taken as zero).
    static Jet mul_capped(const Jet& a, const Jet& b, int cap);

    Jet truncated(int newD) const;      // drop degrees above newD
    Jet with_trunc(int newD) const;     // resize, zero-extending if larger

    // Formal partial derivative; result truncation is trunc()-1.
    Jet differentiate(Symbol sym) const;
    // Same, but keeping the storage truncation (top degree left as garbage
    // zeros); used inside fixed-truncation pipelines.
    Jet deriv_keep(Symbol sym) const;

    Jet conjugate() const;
    bool hermitian_error(double* maxdev = nullptr) const;  // |a - conj-sym(a)|

    // Multiplicative inverse; requires nonzero constant term.
    Jet invert() const;
    // Principal-branch power; requires real positive constant term.
    Jet power(double expnt) const;
    Jet log() const;   // requires real positive constant term
    Jet exp() const;

    // Homogeneous part of z/zb-degree d (t-structure preserved).
    Jet hom_part(int d) const;
    // Lowest z/zb degree with a coefficient above tol (t-block 0..t_max all
    // considered); returns trunc()+1 if zero.
    int lowest_degree(double tol = 0.0) const;

    // Composition with a complex-affine substitution z_i -> sum_j B_ij w_j + b_i
    // (antiholomorphic symbols transform by the conjugate map).  B is
    // row-major num_complex x num_complex.
    Jet compose_affine(const std::vector<cplx>& B, const std::vector<cplx>& shift) const;

    // Evaluate at a point (z, conj(z), t).
    cplx evaluate(const std::vector<cplx>& z, double t = 0.0) const;

    // Coefficient of t^k as a jet without the t variable (t_max = 0).
    Jet t_coefficient(int k) const;
    // Promote a t-free jet into a variable set with t.
    Jet with_t(int t_max) const;

  private:
    VariableSet vars_;
    int trunc_ = 0;
    std::vector<cplx> coef_;

    void check_compat(const Jet& o) const;
};

struct DivisionResult {
    Jet quotient;
    double residual = 0.0;  // max |coeff| left on the zero set, scaled
};

// Quotient f / rho^s in the truncated ring, where rho is a real defining
// function with nonvanishing gradient at the base point (constant term of
// rho must vanish).  Computed order by order after a unitary change of
// variables aligning d(rho) with the first complex coordinate; `residual`
// measures the failure of f to lie in the ideal (rho^s).
DivisionResult divide_by_defining(const Jet& f, const Jet& rho, int s);

// Unitary adaptation: returns a num_complex x num_complex unitary B (row
// major) such that rho(B w) has holomorphic gradient proportional to e_1.
// `grad` is the holomorphic gradient of rho at the base point.
std::vector<cplx> gradient_aligning_unitary(const std::vector<cplx>& grad);

// True if rho's linear part is c*(z_1 + zb_1), c real nonzero (the adapted
// normal form used by the fast division path).
bool is_normal_adapted(const Jet& rho, double tol);

}  // namespace crprime::jets
