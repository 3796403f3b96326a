#include "crprime/jets.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <unordered_map>

namespace crprime::jets {

namespace {

constexpr int kMaxNK = 64;

struct BinomTable {
    std::int64_t c[kMaxNK][kMaxNK];
    BinomTable() {
        for (int n = 0; n < kMaxNK; ++n) {
            c[n][0] = 1;
            for (int k = 1; k <= n; ++k)
                c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
            for (int k = n + 1; k < kMaxNK; ++k) c[n][k] = 0;
        }
    }
};
const BinomTable g_binom;

// Offset of the x_{s-1}^k block inside a (s, D) triangular block.
inline std::int64_t block_off(int s, int D, int k) {
    return g_binom.c[s + D][s] - g_binom.c[s + D - k][s];
}

// res += a * b truncated to total degree Dr, over s variables.
void mul_rec(const cplx* a, int Da, const cplx* b, int Db, cplx* r, int Dr, int s) {
    if (s == 1) {
        const int ka_max = std::min(Da, Dr);
        for (int ka = 0; ka <= ka_max; ++ka) {
            const cplx av = a[ka];
            if (av.real() == 0.0 && av.imag() == 0.0) continue;
            const int kb_max = std::min(Db, Dr - ka);
            cplx* rr = r + ka;
            for (int kb = 0; kb <= kb_max; ++kb) rr[kb] += av * b[kb];
        }
        return;
    }
    const int ka_max = std::min(Da, Dr);
    for (int ka = 0; ka <= ka_max; ++ka) {
        const cplx* ab = a + block_off(s, Da, ka);
        const int kb_max = std::min(Db, Dr - ka);
        for (int kb = 0; kb <= kb_max; ++kb) {
            mul_rec(ab, Da - ka, b + block_off(s, Db, kb),
                    Db - kb, r + block_off(s, Dr, ka + kb), Dr - ka - kb, s - 1);
        }
    }
}

// scaled triangular copy between blocks of possibly different caps
void scaled_copy(const cplx* src, int Ds, cplx* dst, int Dd, int sv, double scale) {
    if (sv == 0) { dst[0] = scale * src[0]; return; }
    if (sv == 1) {
        int mm = std::min(Ds, Dd);
        for (int i = 0; i <= mm; ++i) dst[i] = scale * src[i];
        return;
    }
    int mm = std::min(Ds, Dd);
    for (int kk = 0; kk <= mm; ++kk)
        scaled_copy(src + block_off(sv, Ds, kk), Ds - kk,
                    dst + block_off(sv, Dd, kk), Dd - kk, sv - 1, scale);
}

// derivative w.r.t. variable index p (0-based among s vars), written into out
// (out must be zero-initialized).
void deriv_rec(const cplx* in, int Din, cplx* out, int Dout, int s, int p) {
    if (Dout < 0) return;
    if (s == 1) {
        for (int k = 0; k <= Dout && k + 1 <= Din; ++k)
            out[k] = double(k + 1) * in[k + 1];
        return;
    }
    if (p == s - 1) {
        for (int k = 0; k <= Dout && k + 1 <= Din; ++k)
            scaled_copy(in + block_off(s, Din, k + 1), Din - k - 1,
                        out + block_off(s, Dout, k), Dout - k, s - 1, double(k + 1));
        return;
    }
    for (int k = 0; k <= std::min(Din, Dout); ++k)
        deriv_rec(in + block_off(s, Din, k), Din - k,
                  out + block_off(s, Dout, k), Dout - k, s - 1, p);
}

void enumerate_rec(int s, int D, std::vector<std::uint8_t>& cur,
                   std::vector<std::uint8_t>& out) {
    if (s == 0) {
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (int k = 0; k <= D; ++k) {
        cur[s - 1] = std::uint8_t(k);
        enumerate_rec(s - 1, D - k, cur, out);
    }
    cur[s - 1] = 0;
}

std::int64_t index_of(int s, int D, const std::uint8_t* e) {
    std::int64_t idx = 0;
    int cap = D;
    for (int j = s - 1; j >= 1; --j) {
        idx += block_off(j + 1, cap, e[j]);
        cap -= e[j];
    }
    return idx;
}

std::mutex g_layout_mutex;
std::map<std::pair<int, int>, LayoutTables> g_layouts;

}  // namespace

std::int64_t binom(int n, int k) {
    if (n < 0 || k < 0 || k > n || n >= kMaxNK) throw std::out_of_range("binom");
    return g_binom.c[n][k];
}

const LayoutTables& LayoutTables::get(int s, int D) {
    std::lock_guard<std::mutex> lk(g_layout_mutex);
    auto key = std::make_pair(s, D);
    auto it = g_layouts.find(key);
    if (it != g_layouts.end()) return it->second;
    LayoutTables t;
    t.s = s;
    t.D = D;
    std::vector<std::uint8_t> cur(s, 0);
    enumerate_rec(s, D, cur, t.expo);
    const std::int64_t N = tri_size(s, D);
    t.conj_perm.resize(N);
    t.by_degree.assign(D + 1, {});
    std::vector<std::uint8_t> sw(s);
    const int m = s / 2;
    for (std::int64_t i = 0; i < N; ++i) {
        const std::uint8_t* e = &t.expo[i * s];
        int deg = 0;
        for (int j = 0; j < s; ++j) deg += e[j];
        t.by_degree[deg].push_back(std::int32_t(i));
        for (int j = 0; j < m; ++j) { sw[j] = e[m + j]; sw[m + j] = e[j]; }
        t.conj_perm[i] = std::int32_t(index_of(s, D, sw.data()));
    }
    return g_layouts.emplace(key, std::move(t)).first->second;
}

Jet Jet::constant(const VariableSet& vs, int trunc, cplx value) {
    Jet j(vs, trunc);
    j.coef_[0] = value;
    return j;
}

Jet Jet::variable(const VariableSet& vs, int trunc, Symbol sym) {
    Jet j(vs, trunc);
    const int s = vs.symbols();
    if (sym.kind == Symbol::T) {
        if (vs.t_max < 1) throw std::invalid_argument("jet has no t variable");
        j.coef_[tri_size(s, trunc)] = 1.0;
        return j;
    }
    if (trunc < 1) throw std::invalid_argument("truncation too small for variable");
    std::vector<std::uint8_t> e(s, 0);
    int pos = (sym.kind == Symbol::Hol) ? sym.index : vs.num_complex + sym.index;
    if (sym.index < 0 || sym.index >= vs.num_complex)
        throw std::invalid_argument("variable index out of range");
    e[pos] = 1;
    j.coef_[index_of(s, trunc, e.data())] = 1.0;
    return j;
}

void Jet::check_compat(const Jet& o) const {
    if (!(vars_ == o.vars_)) throw std::invalid_argument("jet variable sets differ");
}

cplx Jet::coeff(const std::vector<int>& ze, const std::vector<int>& zbe, int te) const {
    const int s = vars_.symbols();
    std::vector<std::uint8_t> e(s, 0);
    int deg = 0;
    for (int i = 0; i < vars_.num_complex; ++i) {
        e[i] = std::uint8_t(ze[i]);
        e[vars_.num_complex + i] = std::uint8_t(zbe[i]);
        deg += ze[i] + zbe[i];
    }
    if (deg > trunc_ || te > vars_.t_max) return 0.0;
    return coef_[te * block_size() + index_of(s, trunc_, e.data())];
}

void Jet::set_coeff(const std::vector<int>& ze, const std::vector<int>& zbe, int te, cplx v) {
    const int s = vars_.symbols();
    std::vector<std::uint8_t> e(s, 0);
    int deg = 0;
    for (int i = 0; i < vars_.num_complex; ++i) {
        e[i] = std::uint8_t(ze[i]);
        e[vars_.num_complex + i] = std::uint8_t(zbe[i]);
        deg += ze[i] + zbe[i];
    }
    if (deg > trunc_) throw std::out_of_range("monomial above truncation");
    if (te > vars_.t_max) throw std::out_of_range("t-degree above cap");
    coef_[te * block_size() + index_of(s, trunc_, e.data())] = v;
}

double Jet::max_abs() const {
    double m = 0.0;
    for (const auto& c : coef_) m = std::max(m, std::abs(c));
    return m;
}

Jet Jet::truncated(int newD) const {
    if (newD >= trunc_) return *this;
    Jet out(vars_, newD);
    const int s = vars_.symbols();
    const auto& src = LayoutTables::get(s, trunc_);
    for (int tb = 0; tb <= vars_.t_max; ++tb) {
        const cplx* in = coef_.data() + tb * block_size();
        cplx* op = out.coef_.data() + tb * out.block_size();
        for (int d = 0; d <= newD; ++d)
            for (auto i : src.by_degree[d]) {
                const std::uint8_t* e = &src.expo[std::size_t(i) * s];
                op[index_of(s, newD, e)] = in[i];
            }
    }
    return out;
}

Jet Jet::with_trunc(int newD) const {
    if (newD == trunc_) return *this;
    if (newD < trunc_) return truncated(newD);
    Jet out(vars_, newD);
    const int s = vars_.symbols();
    const auto& src = LayoutTables::get(s, trunc_);
    const std::int64_t N = block_size();
    for (int tb = 0; tb <= vars_.t_max; ++tb) {
        const cplx* in = coef_.data() + tb * N;
        cplx* op = out.coef_.data() + tb * out.block_size();
        for (std::int64_t i = 0; i < N; ++i) {
            if (in[i] == cplx(0)) continue;
            op[index_of(s, newD, &src.expo[std::size_t(i) * s])] = in[i];
        }
    }
    return out;
}

Jet Jet::operator+(const Jet& o) const {
    check_compat(o);
    if (trunc_ == o.trunc_) {
        Jet r = *this;
        for (std::size_t i = 0; i < coef_.size(); ++i) r.coef_[i] += o.coef_[i];
        return r;
    }
    int D = std::min(trunc_, o.trunc_);
    Jet a = truncated(D), b = o.truncated(D);
    for (std::size_t i = 0; i < a.coef_.size(); ++i) a.coef_[i] += b.coef_[i];
    return a;
}

Jet Jet::operator-(const Jet& o) const { return *this + (o * cplx(-1.0)); }

Jet& Jet::operator+=(const Jet& o) { *this = *this + o; return *this; }
Jet& Jet::operator-=(const Jet& o) { *this = *this - o; return *this; }

Jet Jet::operator-() const { return *this * cplx(-1.0); }

Jet Jet::operator*(cplx sc) const {
    Jet r = *this;
    for (auto& c : r.coef_) c *= sc;
    return r;
}

Jet Jet::mul_capped(const Jet& a, const Jet& b, int cap) {
    a.check_compat(b);
    const auto& vs = a.vars_;
    Jet r(vs, cap);
    const int s = vs.symbols();
    const std::int64_t Na = a.block_size(), Nb = b.block_size(), Nr = r.block_size();
    for (int ta = 0; ta <= vs.t_max; ++ta)
        for (int tb = 0; tb + ta <= vs.t_max; ++tb)
            mul_rec(a.coef_.data() + ta * Na, a.trunc_,
                    b.coef_.data() + tb * Nb, b.trunc_,
                    r.coef_.data() + (ta + tb) * Nr, cap, s);
    return r;
}

Jet Jet::operator*(const Jet& o) const {
    return mul_capped(*this, o, std::min(trunc_, o.trunc_));
}

Jet Jet::differentiate(Symbol sym) const {
    Jet keep = deriv_keep(sym);
    if (sym.kind == Symbol::T) return keep;
    return keep.truncated(std::max(0, trunc_ - 1));
}

Jet Jet::deriv_keep(Symbol sym) const {
    const int s = vars_.symbols();
    Jet out(vars_, trunc_);
    if (sym.kind == Symbol::T) {
        if (vars_.t_max < 1) return out;
        const std::int64_t N = block_size();
        for (int tb = 1; tb <= vars_.t_max; ++tb) {
            const cplx* in = coef_.data() + tb * N;
            cplx* op = out.coef_.data() + (tb - 1) * N;
            for (std::int64_t i = 0; i < N; ++i) op[i] = double(tb) * in[i];
        }
        return out;
    }
    if (sym.index < 0 || sym.index >= vars_.num_complex)
        throw std::invalid_argument("unknown variable");
    const int p = (sym.kind == Symbol::Hol) ? sym.index : vars_.num_complex + sym.index;
    const std::int64_t N = block_size();
    for (int tb = 0; tb <= vars_.t_max; ++tb) {
        // write derivative with storage truncation trunc_ (top degree zero)
        deriv_rec(coef_.data() + tb * N, trunc_, out.coef_.data() + tb * N, trunc_, s, p);
        // deriv_rec with Dout == Din leaves the top-degree slots untouched
        // only when k+1 <= Din fails; they were zero-initialized.
    }
    return out;
}

Jet Jet::conjugate() const {
    const int s = vars_.symbols();
    const auto& lt = LayoutTables::get(s, trunc_);
    Jet out(vars_, trunc_);
    const std::int64_t N = block_size();
    for (int tb = 0; tb <= vars_.t_max; ++tb) {
        const cplx* in = coef_.data() + tb * N;
        cplx* op = out.coef_.data() + tb * N;
        for (std::int64_t i = 0; i < N; ++i) op[lt.conj_perm[i]] = std::conj(in[i]);
    }
    return out;
}

bool Jet::hermitian_error(double* maxdev) const {
    Jet c = conjugate();
    double dev = 0.0;
    for (std::size_t i = 0; i < coef_.size(); ++i)
        dev = std::max(dev, std::abs(coef_[i] - c.coef_[i]));
    if (maxdev) *maxdev = dev;
    return dev <= 1e-12 * std::max(1.0, max_abs());
}

Jet Jet::invert() const {
    cplx a0 = constant_term();
    if (std::abs(a0) == 0.0) throw std::domain_error("invert: zero constant term");
    const int nil = trunc_ + vars_.t_max;
    Jet x = Jet::constant(vars_, trunc_, 1.0 / a0);
    int valid = 0;
    while (valid < nil) {
        valid = std::min(2 * valid + 1, nil);
        int cap = std::min(valid, trunc_);
        Jet ax = mul_capped(*this, x, cap);
        Jet two = Jet::constant(vars_, cap, 2.0);
        x = mul_capped(x, two - ax, cap).with_trunc(trunc_);
    }
    return x;
}

namespace {
// Horner evaluation sum_k c_k y^k where y has zero constant term.
Jet horner_series(const Jet& y, const std::vector<cplx>& c) {
    Jet acc = Jet::constant(y.vars(), y.trunc(), c.back());
    for (int k = int(c.size()) - 2; k >= 0; --k) {
        acc = acc * y;
        acc.raw()[0] += c[k];
    }
    return acc;
}
}  // namespace

Jet Jet::power(double expnt) const {
    cplx a0 = constant_term();
    if (std::abs(a0.imag()) > 1e-14 * std::abs(a0) || a0.real() <= 0.0)
        throw std::domain_error("power: constant term must be real positive");
    const double r0 = a0.real();
    const int nil = trunc_ + vars_.t_max;
    Jet y = (*this) * cplx(1.0 / r0);
    y.raw()[0] -= 1.0;
    std::vector<cplx> c(nil + 1);
    c[0] = 1.0;
    for (int k = 1; k <= nil; ++k) c[k] = c[k - 1] * cplx((expnt - (k - 1)) / k);
    return horner_series(y, c) * cplx(std::pow(r0, expnt));
}

Jet Jet::log() const {
    cplx a0 = constant_term();
    if (std::abs(a0.imag()) > 1e-14 * std::abs(a0) || a0.real() <= 0.0)
        throw std::domain_error("log: constant term must be real positive");
    const double r0 = a0.real();
    const int nil = trunc_ + vars_.t_max;
    Jet y = (*this) * cplx(1.0 / r0);
    y.raw()[0] -= 1.0;
    std::vector<cplx> c(nil + 1);
    c[0] = std::log(r0);
    for (int k = 1; k <= nil; ++k) c[k] = cplx(((k % 2) ? 1.0 : -1.0) / k);
    return horner_series(y, c);
}

Jet Jet::exp() const {
    cplx a0 = constant_term();
    const int nil = trunc_ + vars_.t_max;
    Jet y = *this;
    y.raw()[0] = 0.0;
    std::vector<cplx> c(nil + 1);
    c[0] = 1.0;
    for (int k = 1; k <= nil; ++k) c[k] = c[k - 1] / double(k);
    return horner_series(y, c) * std::exp(a0);
}

Jet Jet::hom_part(int d) const {
    Jet out(vars_, trunc_);
    if (d > trunc_) return out;
    const int s = vars_.symbols();
    const auto& lt = LayoutTables::get(s, trunc_);
    const std::int64_t N = block_size();
    for (int tb = 0; tb <= vars_.t_max; ++tb)
        for (auto i : lt.by_degree[d])
            out.coef_[tb * N + i] = coef_[tb * N + i];
    return out;
}

int Jet::lowest_degree(double tol) const {
    const int s = vars_.symbols();
    const auto& lt = LayoutTables::get(s, trunc_);
    const std::int64_t N = block_size();
    for (int d = 0; d <= trunc_; ++d)
        for (int tb = 0; tb <= vars_.t_max; ++tb)
            for (auto i : lt.by_degree[d])
                if (std::abs(coef_[tb * N + i]) > tol) return d;
    return trunc_ + 1;
}

namespace {

// Extract sum over monomials with e_pos == k, with that exponent zeroed.
Jet mask_extract(const Jet& f, int pos, int k) {
    const int s = f.vars().symbols();
    const auto& lt = LayoutTables::get(s, f.trunc());
    Jet out(f.vars(), f.trunc());
    const std::int64_t N = f.block_size();
    std::vector<std::uint8_t> e(s);
    for (int tb = 0; tb <= f.vars().t_max; ++tb) {
        const cplx* in = f.raw().data() + tb * N;
        cplx* op = out.raw().data() + tb * N;
        for (std::int64_t i = 0; i < N; ++i) {
            if (in[i] == cplx(0)) continue;
            const std::uint8_t* ee = &lt.expo[std::size_t(i) * s];
            if (ee[pos] != k) continue;
            std::copy(ee, ee + s, e.begin());
            e[pos] = 0;
            op[index_of(s, f.trunc(), e.data())] = in[i];
        }
    }
    return out;
}

// Substitute variable `pos` by the jet S (Horner); S must not involve x_pos
// in a way that conflicts semantically (elementary maps only).
Jet subst_one(const Jet& f, int pos, const Jet& S) {
    int top = f.trunc();
    Jet acc = mask_extract(f, pos, top);
    for (int k = top - 1; k >= 0; --k)
        acc = acc * S + mask_extract(f, pos, k);
    return acc;
}

}  // namespace

Jet Jet::compose_affine(const std::vector<cplx>& B, const std::vector<cplx>& shift) const {
    const int m = vars_.num_complex;
    if (int(B.size()) != m * m) throw std::invalid_argument("affine matrix size");
    if (!shift.empty() && int(shift.size()) != m) throw std::invalid_argument("shift size");

    // LU factorization with partial pivoting: P A = L U, so A = P^T L U and
    // f(A w + b) is composed as shift, then P^T, then L, then U steps acting
    // by elementary substitutions.
    std::vector<cplx> lu(B);
    std::vector<int> piv(m);
    for (int i = 0; i < m; ++i) piv[i] = i;
    for (int c = 0; c < m; ++c) {
        int p = c;
        for (int rr = c + 1; rr < m; ++rr)
            if (std::abs(lu[rr * m + c]) > std::abs(lu[p * m + c])) p = rr;
        if (std::abs(lu[p * m + c]) < 1e-300) throw std::domain_error("singular affine map");
        if (p != c) {
            for (int j = 0; j < m; ++j) std::swap(lu[p * m + j], lu[c * m + j]);
            std::swap(piv[p], piv[c]);
        }
        for (int rr = c + 1; rr < m; ++rr) {
            lu[rr * m + c] /= lu[c * m + c];
            for (int j = c + 1; j < m; ++j) lu[rr * m + j] -= lu[rr * m + c] * lu[c * m + j];
        }
    }

    // f(z), z = A w + b.  Work right-to-left: first substitute z_i -> z_i + b_i,
    // then z -> P^T L U w via elementary factors applied in sequence.
    Jet g = *this;
    const VariableSet vs = vars_;
    const int D = trunc_;
    auto hol = [&](int i) { return i; };
    auto anti = [&](int i) { return m + i; };

    if (!shift.empty()) {
        for (int i = 0; i < m; ++i) {
            if (shift[i] == cplx(0)) continue;
            Jet S = Jet::variable(vs, D, Symbol::hol(i));
            S.raw()[0] += shift[i];
            g = subst_one(g, hol(i), S);
            Jet Sc = Jet::variable(vs, D, Symbol::anti(i));
            Sc.raw()[0] += std::conj(shift[i]);
            g = subst_one(g, anti(i), Sc);
        }
    }

    // z = P^T y  (y = L U w): z_{piv[i]} corresponds to y_i; relabel variables
    // by permutation: exponent shuffle.
    {
        const int s = vs.symbols();
        const auto& lt = LayoutTables::get(s, D);
        Jet out(vs, D);
        const std::int64_t N = g.block_size();
        std::vector<std::uint8_t> e(s);
        for (int tb = 0; tb <= vs.t_max; ++tb) {
            const cplx* in = g.raw().data() + tb * N;
            cplx* op = out.raw().data() + tb * N;
            for (std::int64_t i = 0; i < N; ++i) {
                if (in[i] == cplx(0)) continue;
                const std::uint8_t* ee = &lt.expo[std::size_t(i) * s];
                for (int j = 0; j < m; ++j) { e[j] = ee[piv[j]]; e[m + j] = ee[m + piv[j]]; }
                op[index_of(s, D, e.data())] = in[i];
            }
        }
        g = std::move(out);
    }

    // y = L u: y_i = u_i + sum_{j<i} L_ij u_j.  Substituting i = 1..m-1 in
    // ascending order composes the elementary factors so the net map is L.
    for (int i = 1; i <= m - 1; ++i) {
        Jet S = Jet::variable(vs, D, Symbol::hol(i));
        Jet Sc = Jet::variable(vs, D, Symbol::anti(i));
        bool any = false;
        for (int j = 0; j < i; ++j) {
            if (lu[i * m + j] == cplx(0)) continue;
            any = true;
            S += Jet::variable(vs, D, Symbol::hol(j)) * lu[i * m + j];
            Sc += Jet::variable(vs, D, Symbol::anti(j)) * std::conj(lu[i * m + j]);
        }
        if (!any) continue;
        g = subst_one(g, hol(i), S);
        g = subst_one(g, anti(i), Sc);
    }

    // u = U w: u_i = U_ii w_i + sum_{j>i} U_ij w_j, substituted in descending
    // order so the net map is U.
    for (int i = m - 1; i >= 0; --i) {
        Jet S = Jet::variable(vs, D, Symbol::hol(i)) * lu[i * m + i];
        Jet Sc = Jet::variable(vs, D, Symbol::anti(i)) * std::conj(lu[i * m + i]);
        for (int j = i + 1; j < m; ++j) {
            if (lu[i * m + j] == cplx(0)) continue;
            S += Jet::variable(vs, D, Symbol::hol(j)) * lu[i * m + j];
            Sc += Jet::variable(vs, D, Symbol::anti(j)) * std::conj(lu[i * m + j]);
        }
        g = subst_one(g, hol(i), S);
        g = subst_one(g, anti(i), Sc);
    }
    return g;
}

cplx Jet::evaluate(const std::vector<cplx>& z, double t) const {
    const int s = vars_.symbols();
    const int m = vars_.num_complex;
    const auto& lt = LayoutTables::get(s, trunc_);
    const std::int64_t N = block_size();
    // power tables
    std::vector<std::vector<cplx>> pw(s, std::vector<cplx>(trunc_ + 1, 1.0));
    for (int i = 0; i < m; ++i)
        for (int k = 1; k <= trunc_; ++k) {
            pw[i][k] = pw[i][k - 1] * z[i];
            pw[m + i][k] = pw[m + i][k - 1] * std::conj(z[i]);
        }
    cplx total = 0.0;
    double tp = 1.0;
    for (int tb = 0; tb <= vars_.t_max; ++tb) {
        const cplx* in = coef_.data() + tb * N;
        for (std::int64_t i = 0; i < N; ++i) {
            if (in[i] == cplx(0)) continue;
            const std::uint8_t* e = &lt.expo[std::size_t(i) * s];
            cplx term = in[i];
            for (int j = 0; j < s; ++j)
                if (e[j]) term *= pw[j][e[j]];
            total += term * tp;
        }
        tp *= t;
    }
    return total;
}

Jet Jet::t_coefficient(int k) const {
    if (k > vars_.t_max) throw std::out_of_range("t coefficient");
    VariableSet vs{vars_.num_complex, 0};
    Jet out(vs, trunc_);
    const std::int64_t N = block_size();
    std::copy(coef_.begin() + k * N, coef_.begin() + (k + 1) * N, out.coef_.begin());
    return out;
}

Jet Jet::with_t(int t_max) const {
    if (vars_.t_max != 0) throw std::invalid_argument("jet already has t");
    VariableSet vs{vars_.num_complex, t_max};
    Jet out(vs, trunc_);
    std::copy(coef_.begin(), coef_.end(), out.coef_.begin());
    return out;
}

std::vector<cplx> gradient_aligning_unitary(const std::vector<cplx>& grad) {
    const int m = int(grad.size());
    double ng = 0.0;
    for (auto& g : grad) ng += std::norm(g);
    ng = std::sqrt(ng);
    if (ng == 0.0) throw std::domain_error("zero gradient");
    // First column conj(grad)/|grad|; complete by Gram-Schmidt over the
    // standard basis.
    std::vector<std::vector<cplx>> cols;
    std::vector<cplx> c0(m);
    for (int i = 0; i < m; ++i) c0[i] = std::conj(grad[i]) / ng;
    cols.push_back(c0);
    for (int i = 0; i < m && int(cols.size()) < m; ++i) {
        std::vector<cplx> v(m, 0.0);
        v[i] = 1.0;
        for (const auto& c : cols) {
            cplx ip = 0.0;
            for (int j = 0; j < m; ++j) ip += std::conj(c[j]) * v[j];
            for (int j = 0; j < m; ++j) v[j] -= ip * c[j];
        }
        double nv = 0.0;
        for (auto& x : v) nv += std::norm(x);
        nv = std::sqrt(nv);
        if (nv < 1e-8) continue;
        for (auto& x : v) x /= nv;
        cols.push_back(v);
    }
    std::vector<cplx> B(m * m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) B[i * m + j] = cols[j][i];
    return B;
}

bool is_normal_adapted(const Jet& rho, double tol) {
    const int m = rho.vars().num_complex;
    std::vector<int> ze(m, 0), zbe(m, 0);
    double scale = std::max(rho.max_abs(), 1e-300);
    if (std::abs(rho.constant_term()) > tol * scale) return false;
    cplx c1 = 0, c1b = 0;
    for (int i = 0; i < m; ++i) {
        std::fill(ze.begin(), ze.end(), 0);
        std::fill(zbe.begin(), zbe.end(), 0);
        ze[i] = 1;
        cplx ci = rho.coeff(ze, zbe, 0);
        ze[i] = 0;
        zbe[i] = 1;
        cplx cbi = rho.coeff(ze, zbe, 0);
        if (i == 0) { c1 = ci; c1b = cbi; continue; }
        if (std::abs(ci) > tol * scale || std::abs(cbi) > tol * scale) return false;
    }
    if (std::abs(c1 - c1b) > tol * scale) return false;
    if (std::abs(c1.imag()) > tol * scale) return false;
    return std::abs(c1) > tol * scale;
}

DivisionResult divide_by_defining(const Jet& f, const Jet& rho, int s) {
    const auto& vs = f.vars();
    if (!(vs == rho.vars())) throw std::invalid_argument("variable sets differ");
    const int m = vs.num_complex;
    const double fscale = std::max(f.max_abs(), 1e-300);

    // gradient of rho at the base point
    std::vector<cplx> grad(m);
    {
        std::vector<int> ze(m, 0), zbe(m, 0);
        for (int i = 0; i < m; ++i) {
            ze[i] = 1;
            grad[i] = rho.coeff(ze, zbe, 0);
            ze[i] = 0;
        }
        double ng = 0.0;
        for (auto& g : grad) ng += std::norm(g);
        if (std::sqrt(ng) < 1e-12 * std::max(rho.max_abs(), 1e-300))
            throw std::domain_error("divide_by_defining: vanishing d(rho)");
    }

    bool adapted = is_normal_adapted(rho, 1e-12);
    std::vector<cplx> U, Uinv;
    Jet fa = f, ra = rho;
    if (!adapted) {
        U = gradient_aligning_unitary(grad);
        Uinv.resize(m * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) Uinv[i * m + j] = std::conj(U[j * m + i]);
        fa = f.compose_affine(U, {});
        ra = rho.compose_affine(U, {});
    }

    const int Df = fa.trunc(), Dr = ra.trunc();
    const int Dq = std::min(Df, Dr) - s;
    if (Dq < 0) throw std::invalid_argument("truncation too small for division");

    // linear coefficient c of (z1 + zb1)
    double c;
    {
        std::vector<int> ze(m, 0), zbe(m, 0);
        ze[0] = 1;
        c = ra.coeff(ze, zbe, 0).real();
    }
    const double cs = std::pow(c, s);

    Jet rs = Jet::constant(vs, Dr, 1.0);
    for (int k = 0; k < s; ++k) rs = rs * ra;

    const int sym = vs.symbols();

    Jet rem = fa;
    Jet q(vs, Dq);
    double residual = 0.0;

    std::vector<std::uint8_t> etmp(sym);
    for (int d = 0; d <= Dq; ++d) {
        // group the degree-(d+s) slice of rem by exponents away from (z1, zb1)
        const int dd = d + s;
        if (dd > rem.trunc()) break;
        const std::int64_t Nr = rem.block_size();
        const auto& ltr = LayoutTables::get(sym, rem.trunc());
        struct Group { std::vector<std::uint8_t> rep; int tb; std::vector<cplx> ph; };
        std::vector<Group> glist;
        {
            std::unordered_map<std::uint64_t, std::size_t> seen;
            for (int tb = 0; tb <= vs.t_max; ++tb) {
                const cplx* cc = rem.raw().data() + tb * Nr;
                for (auto i : ltr.by_degree[dd]) {
                    if (cc[i] == cplx(0)) continue;
                    const std::uint8_t* e = &ltr.expo[std::size_t(i) * sym];
                    std::uint64_t key = std::uint64_t(tb);
                    for (int j = 1; j < m; ++j) key = key * 64 + e[j];
                    for (int j = 1; j < m; ++j) key = key * 64 + e[m + j];
                    auto it = seen.find(key);
                    std::size_t gi;
                    if (it == seen.end()) {
                        gi = glist.size();
                        seen.emplace(key, gi);
                        Group g;
                        g.rep.assign(e, e + sym);
                        g.tb = tb;
                        int pairdeg = dd;
                        for (int j = 1; j < m; ++j) pairdeg -= e[j] + e[m + j];
                        g.ph.assign(pairdeg + 1, cplx(0));
                        glist.push_back(std::move(g));
                    } else {
                        gi = it->second;
                    }
                    glist[gi].ph[e[0]] += cc[i];
                }
            }
        }
        if (glist.empty()) continue;

        Jet qd(vs, Dq);
        const std::int64_t Nq = qd.block_size();
        for (auto& g : glist) {
            // divide phi(x) = sum ph_k x^k by (1+x)^s
            std::vector<cplx> phi = g.ph;
            int deg = int(phi.size()) - 1;
            for (int round = 0; round < s; ++round) {
                if (deg < 1) { residual = std::max(residual, std::abs(phi[0]) / fscale); phi = {cplx(0)}; deg = 0; continue; }
                std::vector<cplx> psi(deg);
                psi[deg - 1] = phi[deg];
                for (int k = deg - 1; k >= 1; --k) psi[k - 1] = phi[k] - psi[k];
                cplx R = phi[0] - psi[0];
                residual = std::max(residual, std::abs(R) / fscale);
                phi = std::move(psi);
                --deg;
            }
            // write quotient coefficients: exponents rep with (e0, em) replaced
            std::copy(g.rep.begin(), g.rep.end(), etmp.begin());
            for (int k = 0; k <= deg; ++k) {
                if (phi[k] == cplx(0)) continue;
                etmp[0] = std::uint8_t(k);
                etmp[m] = std::uint8_t(deg - k);
                qd.raw()[g.tb * Nq + index_of(sym, Dq, etmp.data())] += phi[k] / cs;
            }
        }
        q += qd;
        // rem -= qd * rho^s, computed through degree rem.trunc()
        rem -= Jet::mul_capped(qd, rs, rem.trunc());
    }

    if (!adapted) q = q.compose_affine(Uinv, {});
    return {std::move(q), residual};
}

}  // namespace crprime::jets
