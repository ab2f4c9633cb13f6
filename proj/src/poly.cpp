#include "triquad/poly.hpp"

#include <algorithm>
#include <sstream>

namespace triquad {

IntPoly IntPoly::constant(std::vector<std::string> vars, const mpz_class& c) {
    IntPoly P(std::move(vars));
    if (c != 0) P.terms_[std::vector<int>(P.vars_.size(), 0)] = c;
    return P;
}

IntPoly IntPoly::variable(std::vector<std::string> vars, const std::string& v) {
    IntPoly P(std::move(vars));
    std::vector<int> e(P.vars_.size(), 0);
    e[P.var_index(v)] = 1;
    P.terms_[e] = 1;
    return P;
}

int IntPoly::var_index(const std::string& v) const {
    for (size_t i = 0; i < vars_.size(); ++i)
        if (vars_[i] == v) return int(i);
    throw input_error("unknown variable " + v);
}

int IntPoly::degree() const {
    int d = -1;
    for (auto& [e, c] : terms_) {
        int t = 0;
        for (int x : e) t += x;
        d = std::max(d, t);
    }
    return d;
}

int IntPoly::degree_in(const std::string& var) const {
    int i = var_index(var), d = -1;
    for (auto& [e, c] : terms_) d = std::max(d, e[i]);
    return d;
}

int IntPoly::valuation_in(const std::string& var) const {
    int i = var_index(var), v = -1;
    for (auto& [e, c] : terms_) v = (v < 0) ? e[i] : std::min(v, e[i]);
    return v < 0 ? 0 : v;
}

bool IntPoly::homogeneous() const {
    int d = -1;
    for (auto& [e, c] : terms_) {
        int t = 0;
        for (int x : e) t += x;
        if (d < 0) d = t;
        else if (t != d) return false;
    }
    return true;
}

void IntPoly::add_term(const std::vector<int>& exp, const mpz_class& c) {
    if (exp.size() != vars_.size()) throw input_error("exponent arity mismatch");
    auto it = terms_.find(exp);
    if (it == terms_.end()) {
        if (c != 0) terms_.emplace(exp, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

IntPoly IntPoly::operator+(const IntPoly& o) const {
    if (vars_ != o.vars_) throw input_error("variable set mismatch");
    IntPoly R = *this;
    for (auto& [e, c] : o.terms_) R.add_term(e, c);
    return R;
}

IntPoly IntPoly::operator-(const IntPoly& o) const {
    if (vars_ != o.vars_) throw input_error("variable set mismatch");
    IntPoly R = *this;
    for (auto& [e, c] : o.terms_) R.add_term(e, -c);
    return R;
}

IntPoly IntPoly::operator-() const {
    IntPoly R(vars_);
    for (auto& [e, c] : terms_) R.terms_[e] = -c;
    return R;
}

IntPoly IntPoly::operator*(const IntPoly& o) const {
    if (vars_ != o.vars_) throw input_error("variable set mismatch");
    IntPoly R(vars_);
    std::vector<int> e(vars_.size());
    mpz_class prod;
    for (auto& [ea, ca] : terms_) {
        for (auto& [eb, cb] : o.terms_) {
            for (size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
            prod = ca * cb;
            R.add_term(e, prod);
        }
    }
    return R;
}

IntPoly IntPoly::divexact(const IntPoly& o) const {
    if (vars_ != o.vars_) throw input_error("variable set mismatch");
    if (o.is_zero()) throw input_error("division by zero polynomial");
    IntPoly R = *this, Q(vars_);
    const auto& ltB = *o.terms_.rbegin();
    std::vector<int> e(vars_.size());
    while (!R.is_zero()) {
        const auto& ltR = *R.terms_.rbegin();
        mpz_class qc, rem;
        mpz_tdiv_qr(qc.get_mpz_t(), rem.get_mpz_t(), ltR.second.get_mpz_t(), ltB.second.get_mpz_t());
        if (rem != 0) throw input_error("divexact: inexact coefficient");
        for (size_t i = 0; i < e.size(); ++i) {
            e[i] = ltR.first[i] - ltB.first[i];
            if (e[i] < 0) throw input_error("divexact: inexact monomial");
        }
        IntPoly t(vars_);
        t.terms_[e] = qc;
        Q.add_term(e, qc);
        R = R - t * o;
    }
    return Q;
}

mpz_class IntPoly::content() const {
    mpz_class g = 0;
    for (auto& [e, c] : terms_) {
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
        if (g == 1) break;
    }
    return g;
}

mpz_class IntPoly::leading_coeff() const {
    if (terms_.empty()) return 0;
    return terms_.rbegin()->second;
}

IntPoly IntPoly::coeff_of(const std::string& var, int j) const {
    int i = var_index(var);
    IntPoly R(vars_);
    for (auto& [e, c] : terms_) {
        if (e[i] != j) continue;
        auto e2 = e;
        e2[i] = 0;
        R.add_term(e2, c);
    }
    return R;
}

mpz_class IntPoly::eval(const std::vector<mpz_class>& point) const {
    if (point.size() != vars_.size()) throw input_error("eval arity mismatch");
    // per-variable power tables
    std::vector<std::vector<mpz_class>> pw(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i) pw[i].push_back(1);
    mpz_class acc = 0, t;
    for (auto& [e, c] : terms_) {
        t = c;
        for (size_t i = 0; i < e.size(); ++i) {
            auto& tab = pw[i];
            while (int(tab.size()) <= e[i]) tab.push_back(tab.back() * point[i]);
            t *= tab[e[i]];
        }
        acc += t;
    }
    return acc;
}

mpz_class IntPoly::eval_mod(const std::vector<mpz_class>& point, const mpz_class& modulus) const {
    mpz_class v = eval(point) % modulus;
    if (v < 0) v += modulus;
    return v;
}

u64 IntPoly::eval_mod_u64(const std::vector<u64>& point, u64 p) const {
    if (point.size() != vars_.size()) throw input_error("eval arity mismatch");
    std::vector<std::vector<u64>> pw(vars_.size());
    for (size_t i = 0; i < vars_.size(); ++i) pw[i].push_back(1 % p);
    u64 acc = 0;
    for (auto& [e, c] : terms_) {
        u64 t = mpz_fdiv_ui(c.get_mpz_t(), p);
        for (size_t i = 0; i < e.size(); ++i) {
            auto& tab = pw[i];
            while (int(tab.size()) <= e[i]) tab.push_back(mulmod(tab.back(), point[i], p));
            t = mulmod(t, tab[e[i]], p);
        }
        acc = (acc + t) % p;
    }
    return acc;
}

IntPoly IntPoly::substitute(const std::vector<bool>& keep, const std::vector<mpz_class>& point) const {
    std::vector<std::string> nv;
    std::vector<int> map_idx;
    for (size_t i = 0; i < vars_.size(); ++i)
        if (keep[i]) { map_idx.push_back(int(i)); nv.push_back(vars_[i]); }
    IntPoly R(nv);
    std::vector<int> e2(nv.size());
    for (auto& [e, c] : terms_) {
        mpz_class t = c;
        for (size_t i = 0; i < vars_.size(); ++i) {
            if (keep[i]) continue;
            mpz_class pw;
            mpz_pow_ui(pw.get_mpz_t(), point[i].get_mpz_t(), e[i]);
            t *= pw;
        }
        if (t == 0) continue;
        for (size_t j = 0; j < map_idx.size(); ++j) e2[j] = e[map_idx[j]];
        R.add_term(e2, t);
    }
    return R;
}

std::string IntPoly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const mpz_class& c = it->second;
        mpz_class a = abs(c);
        if (first) {
            if (c < 0) os << "-";
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ");
        }
        bool any_var = false;
        for (int x : it->first)
            if (x) any_var = true;
        if (a != 1 || !any_var) os << a.get_str();
        bool need_star = (a != 1 || !any_var);
        for (size_t i = 0; i < vars_.size(); ++i) {
            int x = it->first[i];
            if (!x) continue;
            if (need_star) os << "*";
            os << vars_[i];
            if (x > 1) os << "^" << x;
            need_star = true;
        }
    }
    return os.str();
}

ModPoly ModPoly::reduce(const IntPoly& P, u64 p) {
    ModPoly R;
    R.vars = P.vars();
    R.p = p;
    for (auto& [e, c] : P.terms()) {
        u64 cc = mpz_fdiv_ui(c.get_mpz_t(), p);
        if (cc) R.terms[e] = cc;
    }
    return R;
}

u64 ModPoly::eval(const std::vector<u64>& point) const {
    std::vector<std::vector<u64>> pw(vars.size());
    for (size_t i = 0; i < vars.size(); ++i) pw[i].push_back(1 % p);
    u64 acc = 0;
    for (auto& [e, c] : terms) {
        u64 t = c;
        for (size_t i = 0; i < e.size(); ++i) {
            auto& tab = pw[i];
            while (int(tab.size()) <= e[i]) tab.push_back(mulmod(tab.back(), point[i], p));
            t = mulmod(t, tab[e[i]], p);
        }
        acc = (acc + t) % p;
    }
    return acc;
}

std::string ModPoly::to_string() const {
    std::ostringstream os;
    os << "(mod " << p << ") ";
    bool first = true;
    for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        os << it->second;
        for (size_t i = 0; i < vars.size(); ++i) {
            if (!it->first[i]) continue;
            os << "*" << vars[i];
            if (it->first[i] > 1) os << "^" << it->first[i];
        }
    }
    if (first) os << "0";
    return os.str();
}

IntPoly partial(const IntPoly& P, const std::string& var) {
    int i = P.var_index(var);
    IntPoly R(P.vars_);
    for (auto& [e, c] : P.terms_) {
        if (e[i] == 0) continue;
        auto e2 = e;
        e2[i] -= 1;
        R.add_term(e2, c * e[i]);
    }
    return R;
}

IntPoly bareiss_det(std::vector<std::vector<IntPoly>> M) {
    size_t n = M.size();
    if (n == 0) throw input_error("empty matrix");
    for (auto& row : M)
        if (row.size() != n) throw input_error("matrix not square");
    auto vars = M[0][0].vars();
    IntPoly prev = IntPoly::constant(vars, 1);
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (M[k][k].is_zero()) {
            size_t piv = k + 1;
            while (piv < n && M[piv][k].is_zero()) ++piv;
            if (piv == n) return IntPoly(vars);  // singular: det = 0
            std::swap(M[k], M[piv]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i) {
            for (size_t j = k + 1; j < n; ++j) {
                IntPoly t = M[i][j] * M[k][k] - M[i][k] * M[k][j];
                M[i][j] = t.divexact(prev);
            }
            M[i][k] = IntPoly(vars);
        }
        prev = M[k][k];
    }
    IntPoly det = M[n - 1][n - 1];
    return sign < 0 ? -det : det;
}

IntPoly det_pencil(const std::vector<std::vector<std::vector<i64>>>& mats,
                   const std::vector<std::string>& vars) {
    if (mats.size() != vars.size()) throw input_error("det_pencil: need one variable per matrix");
    size_t k = mats.empty() ? 0 : mats[0].size();
    if (k == 0) throw input_error("det_pencil: empty matrix");
    for (auto& m : mats) {
        if (m.size() != k) throw input_error("det_pencil: size mismatch");
        for (auto& row : m)
            if (row.size() != k) throw input_error("det_pencil: matrix not square");
    }
    std::vector<std::vector<IntPoly>> M(k, std::vector<IntPoly>(k, IntPoly(vars)));
    for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j) {
            std::vector<int> e(vars.size(), 0);
            for (size_t v = 0; v < vars.size(); ++v) {
                if (!mats[v][i][j]) continue;
                std::fill(e.begin(), e.end(), 0);
                e[v] = 1;
                M[i][j].add_term(e, mpz_class((long)mats[v][i][j]));
            }
        }
    return bareiss_det(std::move(M));
}

IntPoly resultant(const IntPoly& P, const IntPoly& Q, const std::string& var) {
    int m = P.degree_in(var), n = Q.degree_in(var);
    if (m <= 0 && n <= 0) throw input_error("resultant: both inputs constant in " + var);
    auto vars = P.vars();
    if (m < 0 || n < 0) throw input_error("resultant: zero polynomial input");
    std::vector<IntPoly> pc(m + 1, IntPoly(vars)), qc(n + 1, IntPoly(vars));
    for (int j = 0; j <= m; ++j) pc[j] = P.coeff_of(var, m - j);  // descending powers
    for (int j = 0; j <= n; ++j) qc[j] = Q.coeff_of(var, n - j);
    size_t N = size_t(m + n);
    std::vector<std::vector<IntPoly>> S(N, std::vector<IntPoly>(N, IntPoly(vars)));
    for (int r = 0; r < n; ++r)
        for (int j = 0; j <= m; ++j) S[r][r + j] = pc[j];
    for (int r = 0; r < m; ++r)
        for (int j = 0; j <= n; ++j) S[n + r][r + j] = qc[j];
    return bareiss_det(std::move(S));
}

mpz_class binary_form_resultant(const std::vector<mpz_class>& A, int degA,
                                const std::vector<mpz_class>& B, int degB) {
    if (int(A.size()) != degA + 1 || int(B.size()) != degB + 1)
        throw input_error("binary_form_resultant: coefficient list length mismatch");
    size_t N = size_t(degA + degB);
    std::vector<std::string> novars;
    std::vector<std::vector<IntPoly>> S(N, std::vector<IntPoly>(N, IntPoly(novars)));
    for (int r = 0; r < degB; ++r)
        for (int j = 0; j <= degA; ++j) S[r][r + j] = IntPoly::constant(novars, A[j]);
    for (int r = 0; r < degA; ++r)
        for (int j = 0; j <= degB; ++j) S[degB + r][r + j] = IntPoly::constant(novars, B[j]);
    IntPoly d = bareiss_det(std::move(S));
    return d.is_zero() ? mpz_class(0) : d.terms().begin()->second;
}

}  // namespace triquad
