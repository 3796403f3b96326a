#pragma once

#include <array>
#include <cassert>

#include "crprime/jets.hpp"

// Small dense matrices with Jet entries (sizes <= 4 in practice) and a tiny
// univariate truncated polynomial used for jets along curves.

namespace crprime::jets {

class JetMat {
  public:
    JetMat() = default;
    JetMat(int rows, int cols, const Jet& fill) : r_(rows), c_(cols), e_(rows * cols, fill) {}

    int rows() const { return r_; }
    int cols() const { return c_; }
    Jet& at(int i, int j) { return e_[i * c_ + j]; }
    const Jet& at(int i, int j) const { return e_[i * c_ + j]; }

    JetMat operator*(const JetMat& o) const {
        assert(c_ == o.r_);
        JetMat out(r_, o.c_, at(0, 0) * cplx(0.0));
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < o.c_; ++j) {
                Jet s = at(i, 0) * o.at(0, j);
                for (int k = 1; k < c_; ++k) s += at(i, k) * o.at(k, j);
                out.at(i, j) = std::move(s);
            }
        return out;
    }

    JetMat minor_drop(int di, int dj) const {
        JetMat out(r_ - 1, c_ - 1, e_[0] * cplx(0.0));
        for (int i = 0, ii = 0; i < r_; ++i) {
            if (i == di) continue;
            for (int j = 0, jj = 0; j < c_; ++j) {
                if (j == dj) continue;
                out.at(ii, jj) = at(i, j);
                ++jj;
            }
            ++ii;
        }
        return out;
    }

    Jet det() const {
        assert(r_ == c_);
        if (r_ == 1) return e_[0];
        if (r_ == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
        Jet s = at(0, 0) * minor_drop(0, 0).det();
        double sign = -1.0;
        for (int j = 1; j < c_; ++j) {
            s += at(0, j) * minor_drop(0, j).det() * cplx(sign);
            sign = -sign;
        }
        return s;
    }

    // adjugate-based inverse; requires det with nonzero constant term
    JetMat inverse() const {
        assert(r_ == c_);
        Jet d = det();
        Jet dinv = d.invert();
        JetMat out(r_, c_, e_[0] * cplx(0.0));
        if (r_ == 1) {
            out.at(0, 0) = dinv;
            return out;
        }
        for (int i = 0; i < r_; ++i)
            for (int j = 0; j < c_; ++j) {
                Jet cof = minor_drop(j, i).det();
                if ((i + j) % 2) cof = -cof;
                out.at(i, j) = cof * dinv;
            }
        return out;
    }

  private:
    int r_ = 0, c_ = 0;
    std::vector<Jet> e_;
};

// Univariate truncated polynomial in a real curve parameter.
struct TPoly {
    std::vector<cplx> c;  // c[k] = coefficient of tau^k

    explicit TPoly(int deg = 0) : c(deg + 1, cplx(0)) {}
    int deg() const { return int(c.size()) - 1; }

    static TPoly constant(int deg, cplx v) {
        TPoly p(deg);
        p.c[0] = v;
        return p;
    }

    TPoly operator+(const TPoly& o) const {
        TPoly r(std::max(deg(), o.deg()));
        for (int k = 0; k <= deg(); ++k) r.c[k] += c[k];
        for (int k = 0; k <= o.deg(); ++k) r.c[k] += o.c[k];
        return r;
    }
    TPoly operator-(const TPoly& o) const {
        TPoly r(std::max(deg(), o.deg()));
        for (int k = 0; k <= deg(); ++k) r.c[k] += c[k];
        for (int k = 0; k <= o.deg(); ++k) r.c[k] -= o.c[k];
        return r;
    }
    TPoly mul(const TPoly& o, int cap) const {
        TPoly r(cap);
        for (int i = 0; i <= deg() && i <= cap; ++i) {
            if (c[i] == cplx(0)) continue;
            for (int j = 0; j <= o.deg() && i + j <= cap; ++j) r.c[i + j] += c[i] * o.c[j];
        }
        return r;
    }
    TPoly operator*(const TPoly& o) const { return mul(o, std::max(deg(), o.deg())); }
    TPoly operator*(cplx s) const {
        TPoly r = *this;
        for (auto& x : r.c) x *= s;
        return r;
    }
    TPoly conjugate() const {
        TPoly r = *this;
        for (auto& x : r.c) x = std::conj(x);
        return r;
    }
    TPoly invert() const {  // nonzero constant term
        TPoly r(deg());
        r.c[0] = 1.0 / c[0];
        for (int k = 1; k <= deg(); ++k) {
            cplx s = 0.0;
            for (int j = 1; j <= k; ++j) s += c[j] * r.c[k - j];
            r.c[k] = -s / c[0];
        }
        return r;
    }
};

// Evaluate a jet along a curve z_i(tau) given as TPolys (the conjugate
// variables follow the conjugate curve); t = 0.  Result truncated to `cap`.
inline TPoly eval_along_curve(const Jet& f, const std::vector<TPoly>& z, int cap) {
    const auto& vs = f.vars();
    const int m = vs.num_complex;
    const int s = vs.symbols();
    const auto& lt = LayoutTables::get(s, f.trunc());
    // power tables
    std::vector<std::vector<TPoly>> pw(s);
    for (int i = 0; i < m; ++i) {
        pw[i].push_back(TPoly::constant(cap, 1.0));
        pw[m + i].push_back(TPoly::constant(cap, 1.0));
        TPoly zb = z[i].conjugate();
        for (int k = 1; k <= f.trunc(); ++k) {
            pw[i].push_back(pw[i][k - 1].mul(z[i], cap));
            pw[m + i].push_back(pw[m + i][k - 1].mul(zb, cap));
        }
    }
    TPoly total(cap);
    const auto& raw = f.raw();
    const std::int64_t N = f.block_size();
    for (std::int64_t idx = 0; idx < N; ++idx) {
        if (raw[idx] == cplx(0)) continue;
        const std::uint8_t* e = &lt.expo[std::size_t(idx) * s];
        TPoly term = TPoly::constant(cap, raw[idx]);
        for (int j = 0; j < s; ++j)
            if (e[j]) term = term.mul(pw[j][e[j]], cap);
        total = total + term;
    }
    return total;
}

}  // namespace crprime::jets
