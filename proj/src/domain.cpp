#include "crprime/domain.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

namespace crprime::domain {

using json = nlohmann::json;
using jets::Symbol;

bool DomainSpec::has_t() const {
    for (const auto& m : rho)
        if (m.tpow > 0) return true;
    return false;
}

bool DomainSpec::is_reinhardt() const {
    for (const auto& m : rho)
        if (m.zpow != m.zbarpow) return false;
    return true;
}

double DomainSpec::value(const std::vector<cplx>& z, double t) const {
    cplx s = 0.0;
    for (const auto& m : rho) {
        cplx term = m.coeff;
        for (int i = 0; i < dim(); ++i) {
            for (int k = 0; k < m.zpow[i]; ++k) term *= z[i];
            for (int k = 0; k < m.zbarpow[i]; ++k) term *= std::conj(z[i]);
        }
        for (int k = 0; k < m.tpow; ++k) term *= t;
        s += term;
    }
    return s.real();
}

std::vector<cplx> DomainSpec::grad(const std::vector<cplx>& z, double t) const {
    std::vector<cplx> g(dim(), 0.0);
    for (const auto& m : rho) {
        for (int i = 0; i < dim(); ++i) {
            if (m.zpow[i] == 0) continue;
            cplx term = m.coeff * double(m.zpow[i]);
            for (int j = 0; j < dim(); ++j) {
                int p = m.zpow[j] - (j == i ? 1 : 0);
                for (int k = 0; k < p; ++k) term *= z[j];
                for (int k = 0; k < m.zbarpow[j]; ++k) term *= std::conj(z[j]);
            }
            for (int k = 0; k < m.tpow; ++k) term *= t;
            g[i] += term;
        }
    }
    return g;
}

Jet DomainSpec::chart_jet(const std::vector<cplx>& p, const std::vector<cplx>& U,
                          int trunc, int t_max) const {
    const int m = dim();
    VariableSet vs{m, t_max};
    // linear jets for z_i = p_i + sum_j U_ij zeta_j
    std::vector<Jet> lin, linb;
    for (int i = 0; i < m; ++i) {
        Jet L = Jet::constant(vs, trunc, p[i]);
        for (int j = 0; j < m; ++j)
            if (U[i * m + j] != cplx(0)) L += Jet::variable(vs, trunc, Symbol::hol(j)) * U[i * m + j];
        linb.push_back(L.conjugate());
        lin.push_back(std::move(L));
    }
    Jet tj = (t_max > 0) ? Jet::variable(vs, trunc, Symbol::t()) : Jet(vs, trunc);
    Jet out(vs, trunc);
    for (const auto& mo : rho) {
        if (mo.tpow > t_max) continue;
        Jet term = Jet::constant(vs, trunc, mo.coeff);
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < mo.zpow[i]; ++k) term = term * lin[i];
            for (int k = 0; k < mo.zbarpow[i]; ++k) term = term * linb[i];
        }
        for (int k = 0; k < mo.tpow; ++k) term = term * tj;
        out += term;
    }
    return out;
}

double DomainSpec::reality_error() const {
    double worst = 0.0;
    for (const auto& m : rho) {
        cplx partner = 0.0;
        for (const auto& o : rho)
            if (o.zpow == m.zbarpow && o.zbarpow == m.zpow && o.tpow == m.tpow) partner += o.coeff;
        worst = std::max(worst, std::abs(partner - std::conj(m.coeff)));
    }
    return worst;
}

std::string DomainSpec::check_anchor(const std::vector<cplx>& p) const {
    std::ostringstream oss;
    double v = value(p);
    if (std::abs(v) > 1e-9) {
        oss << "rho(p) = " << v << " is not zero at anchor";
        return oss.str();
    }
    auto g = grad(p);
    double ng = 0.0;
    for (auto& c : g) ng += std::norm(c);
    ng = std::sqrt(ng);
    if (ng < 1e-9) {
        oss << "d rho vanishes at anchor";
        return oss.str();
    }
    // Levi form on ker(d rho): -rho_{a bbar} restricted
    const int m = dim();
    auto chart = make_anchor_chart(*this, p);
    Jet rj = chart_jet(p, chart.U, 2, 0);
    Eigen::MatrixXcd H(m, m);
    std::vector<int> ze(m, 0), zbe(m, 0);
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
            std::fill(ze.begin(), ze.end(), 0);
            std::fill(zbe.begin(), zbe.end(), 0);
            ze[a] += 1;
            zbe[b] += 1;
            cplx c = rj.coeff(ze, zbe, 0);
            if (a == b) c *= 1.0;  // coefficient of zeta_a zetabar_b is rho_{a bbar}
            H(a, b) = c;
        }
    // in chart coordinates ker d rho = span(e_2..e_m)
    Eigen::MatrixXcd L(m - 1, m - 1);
    for (int a = 1; a < m; ++a)
        for (int b = 1; b < m; ++b) L(a - 1, b - 1) = -H(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(L);
    if (es.eigenvalues().minCoeff() <= 1e-9) {
        oss << "Levi form not positive definite at anchor (min eigenvalue "
            << es.eigenvalues().minCoeff() << ")";
        return oss.str();
    }
    return {};
}

double DomainSpec::radial_solve(const std::vector<cplx>& omega, double t) const {
    const int m = dim();
    std::vector<cplx> c(star_center);
    if (c.empty()) c.assign(m, 0.0);
    auto val = [&](double R) {
        std::vector<cplx> z(m);
        for (int i = 0; i < m; ++i) z[i] = c[i] + R * omega[i];
        return value(z, t);
    };
    auto dval = [&](double R) {
        std::vector<cplx> z(m);
        for (int i = 0; i < m; ++i) z[i] = c[i] + R * omega[i];
        auto g = grad(z, t);
        cplx s = 0.0;
        for (int i = 0; i < m; ++i) s += g[i] * omega[i];
        return 2.0 * s.real();
    };
    double R = 1.0;
    // bracket outward if needed
    if (val(R) > 0.0) {
        while (val(R) > 0.0 && R < 64.0) R *= 1.5;
    } else {
        while (val(R) < 0.0 && R > 1e-6) R *= 0.75;
        R *= 1.5;
    }
    for (int it = 0; it < 100; ++it) {
        double f = val(R), df = dval(R);
        if (std::abs(df) < 1e-14) break;
        double step = f / df;
        R -= step;
        if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(R))) break;
    }
    if (std::abs(val(R)) > 1e-12)
        throw std::runtime_error("radial_solve: Newton failed (domain star-shaped about center?)");
    return R;
}

std::vector<cplx> AnchorChart::to_chart_vector(const std::vector<cplx>& v) const {
    const int m = int(p.size());
    std::vector<cplx> w(m, 0.0);
    // w = U^H v
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) w[i] += std::conj(U[j * m + i]) * v[j];
    return w;
}

std::vector<cplx> AnchorChart::from_chart_vector(const std::vector<cplx>& w) const {
    const int m = int(p.size());
    std::vector<cplx> v(m, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) v[i] += U[i * m + j] * w[j];
    return v;
}

AnchorChart make_anchor_chart(const DomainSpec& spec, const std::vector<cplx>& p) {
    auto g = spec.grad(p);
    AnchorChart ch;
    ch.p = p;
    ch.U = jets::gradient_aligning_unitary(g);
    return ch;
}

static std::vector<int> parse_pow(const json& j, int m, const char* name) {
    if (!j.is_array() || int(j.size()) != m)
        throw std::runtime_error(std::string("field '") + name + "' must be an array of length n+1");
    std::vector<int> out;
    for (const auto& e : j) {
        if (!e.is_number_integer() || e.get<int>() < 0)
            throw std::runtime_error(std::string("entries of '") + name + "' must be nonnegative integers");
        out.push_back(e.get<int>());
    }
    return out;
}

DomainSpec parse_domain_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("domain spec must be a JSON object");
    if (!j.contains("schema") || j["schema"].get<int>() != 1)
        throw std::runtime_error("missing or unsupported 'schema' (expected 1)");
    DomainSpec spec;
    if (!j.contains("n") || !j["n"].is_number_integer())
        throw std::runtime_error("missing integer field 'n'");
    spec.n = j["n"].get<int>();
    if (spec.n < 1 || spec.n > 2) throw std::runtime_error("unsupported n (must be 1 or 2)");
    if (!j.contains("rho") || !j["rho"].is_array() || j["rho"].empty())
        throw std::runtime_error("missing nonempty array field 'rho'");
    const int m = spec.dim();
    for (const auto& t : j["rho"]) {
        Monomial mo;
        mo.zpow = parse_pow(t.at("zpow"), m, "zpow");
        mo.zbarpow = parse_pow(t.at("zbarpow"), m, "zbarpow");
        mo.tpow = t.value("tpow", 0);
        if (mo.tpow < 0 || mo.tpow > 2) throw std::runtime_error("tpow must be 0, 1, or 2");
        mo.coeff = cplx(t.value("re", 0.0), t.value("im", 0.0));
        for (auto& [key, val] : t.items()) {
            (void)val;
            if (key != "zpow" && key != "zbarpow" && key != "tpow" && key != "re" && key != "im")
                throw std::runtime_error("unknown field '" + key + "' in rho monomial");
        }
        spec.rho.push_back(std::move(mo));
    }
    if (j.contains("star_center")) {
        for (const auto& e : j["star_center"]) spec.star_center.push_back(cplx(e.get<double>(), 0.0));
        if (int(spec.star_center.size()) != m) throw std::runtime_error("star_center must have n+1 entries");
    }
    if (j.contains("anchors")) {
        for (const auto& a : j["anchors"]) {
            std::vector<cplx> p;
            if (!a.is_array() || int(a.size()) != 2 * m)
                throw std::runtime_error("each anchor must be [re1,im1,...] with 2(n+1) entries");
            for (int i = 0; i < m; ++i) p.push_back(cplx(a[2 * i].get<double>(), a[2 * i + 1].get<double>()));
            spec.anchor_points.push_back(std::move(p));
        }
    }
    for (auto& [key, val] : j.items()) {
        (void)val;
        if (key != "schema" && key != "n" && key != "rho" && key != "star_center" && key != "anchors")
            throw std::runtime_error("unknown top-level field '" + key + "'");
    }
    double re = spec.reality_error();
    if (re > 1e-12)
        throw std::runtime_error("rho is not real-valued (conjugate-pair mismatch " + std::to_string(re) + ")");
    return spec;
}

std::string domain_to_json(const DomainSpec& spec) {
    json j;
    j["schema"] = 1;
    j["n"] = spec.n;
    j["rho"] = json::array();
    for (const auto& m : spec.rho) {
        json t;
        t["zpow"] = m.zpow;
        t["zbarpow"] = m.zbarpow;
        if (m.tpow) t["tpow"] = m.tpow;
        t["re"] = m.coeff.real();
        t["im"] = m.coeff.imag();
        j["rho"].push_back(t);
    }
    return j.dump(2);
}

}  // namespace crprime::domain
