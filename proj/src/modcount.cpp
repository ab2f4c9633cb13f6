#include "triquad/modcount.hpp"

#include <algorithm>
#include <cmath>

#include "triquad/expsum.hpp"
#include "triquad/sweep.hpp"

namespace triquad {

std::vector<std::pair<u64, int>> factorize_u64(u64 q) {
    std::vector<std::pair<u64, int>> out;
    if (q == 0) throw input_error("modulus must be positive");
    for (u64 p = 2; p * p <= q; ++p) {
        if (q % p) continue;
        int e = 0;
        while (q % p == 0) {
            q /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (q > 1) out.push_back({q, 1});
    return out;
}

mpz_class count_N_brute(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                        const RunLimits& lim) {
    if (q == 1) return 1;
    i64 r[3];
    for (int m = 0; m < 3; ++m) r[m] = ((n[m] % (i64)q) + (i64)q) % (i64)q;
    u64 cnt = 0;
    residue_sweep(
        sys, q,
        [&](const i64* v, const i64*) {
            for (int m = 0; m < 3; ++m) {
                i64 d = v[m] - r[m];
                if (d % (i64)q != 0) return;
            }
            ++cnt;
        },
        lim.force);
    return mpz_class((unsigned long)cnt);
}

namespace {

constexpr double kBruteCap = double(u64(1) << 27);

mpz_class count_N_pp(const TripleSystem& sys, const std::array<i64, 3>& n, u64 p, int e,
                     const RunLimits& lim) {
    u64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    if (std::pow(double(p), double(e) * sys.k) <= kBruteCap || p == 2)
        return count_N_brute(sys, n, pe, lim);
    if (e >= 2) {
        bool n_unit = false;
        for (int m = 0; m < 3; ++m)
            if (n[m] % (i64)p != 0) n_unit = true;
        if (n_unit && classify_prime(sys, p, n, 1, lim).kind == PrimeKind::GoodTypeI) {
            mpz_class lift, pz((unsigned long)p);
            mpz_pow_ui(lift.get_mpz_t(), pz.get_mpz_t(), (unsigned long)((sys.k - 3) * (e - 1)));
            return lift * count_N_pp(sys, n, p, 1, lim);
        }
        return count_N_brute(sys, n, pe, lim);  // charges the p^{ek} budget
    }
    return count_N_char(sys, n, p);
}

}  // namespace

mpz_class count_N(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                  const RunLimits& lim) {
    mpz_class out = 1;
    for (auto [p, e] : factorize_u64(q)) out *= count_N_pp(sys, n, p, e, lim);
    return out;
}

mpz_class T_from_counts(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                        const RunLimits& lim) {
    mpz_class out = 1;
    for (auto [p, e] : factorize_u64(q)) {
        u64 pe = 1;
        for (int i = 0; i < e; ++i) pe *= p;
        mpz_class pz((unsigned long)p);
        mpz_class p3e, pk3;
        mpz_pow_ui(p3e.get_mpz_t(), pz.get_mpz_t(), 3 * e);
        mpz_pow_ui(pk3.get_mpz_t(), pz.get_mpz_t(), sys.k + 3 * (e - 1));
        mpz_class Ne = count_N_pp(sys, n, p, e, lim);
        mpz_class Nprev = count_N_pp(sys, n, p, e - 1, lim);
        out *= p3e * Ne - pk3 * Nprev;
    }
    return out;
}

mpq_class sigma_p_truncated(const TripleSystem& sys, const std::array<i64, 3>& n, u64 p, int E,
                            const RunLimits& lim) {
    if (E < 0) throw input_error("negative truncation depth");
    mpz_class N = count_N_pp(sys, n, p, E, lim);
    mpz_class den, pz((unsigned long)p);
    mpz_pow_ui(den.get_mpz_t(), pz.get_mpz_t(), (unsigned long)(E * (sys.k - 3)));
    mpq_class out(N, den);
    out.canonicalize();
    return out;
}

// ---------------------------------------------------------------------------
// single-form machinery

namespace {

struct ModTermList {
    struct T {
        std::vector<int> e;
        u64 c;
    };
    std::vector<T> terms;
    int r = 0;

    static ModTermList reduce(const IntPoly& P, u64 m) {
        ModTermList out;
        out.r = (int)P.vars().size();
        mpz_class mm((unsigned long)m);
        for (const auto& [e, c] : P.terms()) {
            mpz_class v = c % mm;
            if (v < 0) v += mm;
            if (v != 0) out.terms.push_back({e, v.get_ui()});
        }
        return out;
    }

    u64 eval(const std::vector<u64>& x, u64 m) const {
        u64 acc = 0;
        for (const auto& t : terms) {
            u64 v = t.c;
            for (int i = 0; i < r; ++i)
                for (int j = 0; j < t.e[i]; ++j) v = mulmod(v, x[i], m);
            acc = (acc + v) % m;
        }
        return acc;
    }
};

int val_p(u64 v, u64 p, int cap) {
    if (v == 0) return cap;
    int b = 0;
    while (v % p == 0) {
        v /= p;
        ++b;
        if (b >= cap) break;
    }
    return b;
}

// odometer over [0, q)^r
template <class CB>
void grid_iter(int r, u64 q, CB&& cb) {
    std::vector<u64> x(r, 0);
    while (true) {
        cb(x);
        int i = 0;
        while (i < r && ++x[i] == q) x[i++] = 0;
        if (i == r) return;
    }
}

bool is_primitive(const std::vector<u64>& x, u64 p) {
    for (u64 v : x)
        if (v % p != 0) return true;
    return false;
}

}  // namespace

int hensel_alpha(const IntPoly& f, u64 p, int cap, const RunLimits& lim) {
    int r = (int)f.vars().size();
    std::vector<IntPoly> grads;
    for (const auto& v : f.vars()) grads.push_back(partial(f, v));
    for (int alpha = 1; alpha <= cap; ++alpha) {
        u64 pa = 1;
        for (int i = 0; i < alpha; ++i) pa *= p;
        Budget::charge(checked_pow_u64(pa, r), lim.force);
        ModTermList fl = ModTermList::reduce(f, pa);
        std::vector<ModTermList> gl;
        for (const auto& g : grads) gl.push_back(ModTermList::reduce(g, pa));
        bool bad = false;
        grid_iter(r, pa, [&](const std::vector<u64>& x) {
            if (bad || !is_primitive(x, p)) return;
            if (fl.eval(x, pa) != 0) return;
            for (const auto& g : gl)
                if (g.eval(x, pa) != 0) return;  // p^alpha !| grad
            bad = true;
        });
        if (!bad) return alpha;
    }
    throw input_error("no Hensel level found below cap");
}

mpz_class hensel_M(const IntPoly& f, u64 p, int alpha, int beta, const RunLimits& lim) {
    if (beta < 0 || beta >= alpha) throw input_error("beta must satisfy 0 <= beta < alpha");
    int r = (int)f.vars().size();
    u64 pa = 1;
    for (int i = 0; i < alpha; ++i) pa *= p;
    u64 pab = pa;
    for (int i = 0; i < beta; ++i) pab *= p;
    Budget::charge(checked_pow_u64(pa, r), lim.force);
    ModTermList fl = ModTermList::reduce(f, pab);
    std::vector<ModTermList> gl;
    for (const auto& v : f.vars()) gl.push_back(ModTermList::reduce(partial(f, v), pa));
    u64 cnt = 0;
    grid_iter(r, pa, [&](const std::vector<u64>& x) {
        if (!is_primitive(x, p)) return;
        int b = alpha;
        for (const auto& g : gl) b = std::min(b, val_p(g.eval(x, pa), p, alpha));
        if (b != beta) return;
        if (fl.eval(x, pab) == 0) ++cnt;  // canonical lift: value mod p^(a+b) is
                                          // well defined given p^beta || grad f
    });
    return mpz_class((unsigned long)cnt);
}

mpz_class count_primitive_brute(const IntPoly& f, u64 p, int ell, const RunLimits& lim) {
    int r = (int)f.vars().size();
    u64 pl = 1;
    for (int i = 0; i < ell; ++i) pl *= p;
    Budget::charge(checked_pow_u64(pl, r), lim.force);
    ModTermList fl = ModTermList::reduce(f, pl);
    u64 cnt = 0;
    grid_iter(r, pl, [&](const std::vector<u64>& x) {
        if (is_primitive(x, p) && fl.eval(x, pl) == 0) ++cnt;
    });
    return mpz_class((unsigned long)cnt);
}

mpz_class hensel_count(const IntPoly& f, u64 p, int ell, const RunLimits& lim) {
    if (ell < 1) throw input_error("ell must be >= 1");
    int r = (int)f.vars().size();
    int alpha = hensel_alpha(f, p, 12, lim);
    if (ell < 2 * alpha - 1) return count_primitive_brute(f, p, ell, lim);
    mpz_class total = 0, pz((unsigned long)p);
    for (int beta = 0; beta < alpha; ++beta) {
        mpz_class pb;
        mpz_pow_ui(pb.get_mpz_t(), pz.get_mpz_t(), beta);
        total += pb * hensel_M(f, p, alpha, beta, lim);
    }
    mpz_class lift;
    mpz_pow_ui(lift.get_mpz_t(), pz.get_mpz_t(), (unsigned long)((ell - alpha) * (r - 1)));
    return lift * total;
}

// ---------------------------------------------------------------------------
// kernel counts

mpz_class kernel_count(std::vector<std::vector<mpz_class>> A, u64 q) {
    int rows = (int)A.size();
    int cols = rows ? (int)A[0].size() : 0;
    mpz_class out = 1;
    mpz_class qz((unsigned long)q);
    int t = 0;
    for (; t < std::min(rows, cols); ++t) {
        // move a minimal nonzero entry of the trailing block to (t,t)
        while (true) {
            int pr = -1, pc = -1;
            for (int i = t; i < rows; ++i)
                for (int j = t; j < cols; ++j)
                    if (A[i][j] != 0 &&
                        (pr < 0 || cmp(abs(A[i][j]), abs(A[pr][pc])) < 0)) {
                        pr = i;
                        pc = j;
                    }
            if (pr < 0) goto done;
            std::swap(A[t], A[pr]);
            for (int i = 0; i < rows; ++i) std::swap(A[i][t], A[i][pc]);
            bool clean = true;
            for (int i = t + 1; i < rows; ++i) {
                if (A[i][t] == 0) continue;
                mpz_class f = A[i][t] / A[t][t];
                if (f != 0)
                    for (int j = t; j < cols; ++j) A[i][j] -= f * A[t][j];
                if (A[i][t] != 0) clean = false;
            }
            for (int j = t + 1; j < cols; ++j) {
                if (A[t][j] == 0) continue;
                mpz_class f = A[t][j] / A[t][t];
                if (f != 0)
                    for (int i = t; i < rows; ++i) A[i][j] -= f * A[i][t];
                if (A[t][j] != 0) clean = false;
            }
            if (clean) break;
        }
        out *= gcd(A[t][t], qz);
    }
done:
    // zero rows/columns of the diagonalization contribute gcd(0, q) = q each
    for (int j = t; j < cols; ++j) out *= qz;
    return out;
}

mpz_class Z_count(const TripleSystem& sys, const std::array<i64, 3>& a, u64 q) {
    std::vector<std::vector<mpz_class>> A(sys.k, std::vector<mpz_class>(sys.k));
    for (int i = 0; i < sys.k; ++i)
        for (int j = 0; j < sys.k; ++j)
            A[i][j] = 2 * (mpz_class((long)a[0]) * (long)sys.Q[0].M[i][j] +
                           mpz_class((long)a[1]) * (long)sys.Q[1].M[i][j] +
                           mpz_class((long)a[2]) * (long)sys.Q[2].M[i][j]);
    return kernel_count(std::move(A), q);
}

mpq_class Z_gcd_max_ratio(const TripleSystem& sys, u64 p, int e, std::array<i64, 3>* argmax,
                         const RunLimits& lim) {
    u64 pe = 1;
    for (int i = 0; i < e; ++i) pe *= p;
    Budget::charge(checked_pow_u64(pe, 3) * (u64)(sys.k * sys.k), lim.force);
    mpz_class pke, pz((unsigned long)p);
    mpz_pow_ui(pke.get_mpz_t(), pz.get_mpz_t(), (unsigned long)(sys.k * e));
    mpq_class best = 0;
    for (u64 a0 = 0; a0 < pe; ++a0)
        for (u64 a1 = 0; a1 < pe; ++a1)
            for (u64 a2 = 0; a2 < pe; ++a2) {
                std::array<i64, 3> a{(i64)a0, (i64)a1, (i64)a2};
                mpz_class Z = Z_count(sys, a, pe);
                mpz_class Fv = sys.F.eval({mpz_class((long)a[0]), mpz_class((long)a[1]), mpz_class((long)a[2])});
                mpz_class g = gcd(Fv, pke);
                if (g == 0) g = pke;
                mpq_class ratio(Z, g);
                ratio.canonicalize();
                if (ratio > best) {
                    best = ratio;
                    if (argmax) *argmax = a;
                }
            }
    return best;
}

mpz_class count_F_sublevel(const TripleSystem& sys, u64 p, int u, const RunLimits& lim) {
    return count_primitive_brute(sys.F, p, u, lim);
}

mpz_class sublevel_count(const IntPoly& P, u64 p, int f, const RunLimits& lim) {
    if (P.is_zero()) throw input_error("sublevel_count: zero polynomial");
    if (f < 0) throw input_error("sublevel_count: negative exponent");
    int s = (int)P.vars().size();
    u64 pf = 1;
    for (int i = 0; i < f; ++i) pf *= p;
    Budget::charge(checked_pow_u64(pf, s), lim.force);
    ModTermList Pl = ModTermList::reduce(P, pf);
    u64 cnt = 0;
    grid_iter(s, pf, [&](const std::vector<u64>& x) {
        if (Pl.eval(x, pf) == 0) ++cnt;
    });
    return mpz_class((unsigned long)cnt);
}

bool lift_certified(const TripleSystem& sys, const std::array<i64, 3>& n, u64 p, int E,
                    const RunLimits& lim) {
    u64 pe = 1;
    for (int i = 0; i < E; ++i) pe *= p;
    i64 r[3];
    for (int m = 0; m < 3; ++m) r[m] = ((n[m] % (i64)pe) + (i64)pe) % (i64)pe;
    bool found = false;
    mpz_class pz((unsigned long)p);
    residue_sweep(
        sys, pe,
        [&](const i64* v, const i64* x) {
            if (found) return;
            for (int m = 0; m < 3; ++m)
                if ((v[m] - r[m]) % (i64)pe != 0) return;
            std::vector<i64> xv(x, x + sys.k);
            auto minors = jacobian_minors(sys, xv);
            int beta = E;  // valuation cap
            for (const auto& [idx, d] : minors.values) {
                if (d == 0) continue;
                mpz_class a = abs(d);
                int b = 0;
                while (b < beta && a % pz == 0) {
                    a /= pz;
                    ++b;
                }
                beta = std::min(beta, b);
                if (beta == 0) break;
            }
            if (E >= 2 * beta + 1) found = true;
        },
        lim.force);
    return found;
}

}  // namespace triquad
