#include "triquad/expsum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "triquad/modcount.hpp"
#include "triquad/sweep.hpp"

namespace triquad {

namespace {

std::vector<cplx> unit_roots(u64 q) {
    std::vector<cplx> w(q);
    for (u64 j = 0; j < q; ++j) w[j] = e2pi(double(j) / double(q));
    return w;
}

u64 umod(i64 v, u64 q) {
    i64 r = v % i64(q);
    if (r < 0) r += i64(q);
    return u64(r);
}

// in-place character transform of a q x q x q array along every axis:
// out[a] = sum_r in[r] e_q(sign * a.r)
void dft3(std::vector<cplx>& h, u64 q, int sign) {
    const auto w = unit_roots(q);
    std::vector<cplx> line(q), acc(q);
    u64 stride[3] = {q * q, q, 1};
    for (int axis = 0; axis < 3; ++axis) {
        u64 s = stride[axis];
        for (u64 block = 0; block < q * q; ++block) {
            // base index of this 1D line
            u64 b0 = (axis == 0) ? block : (axis == 1) ? (block / q) * q * q + block % q
                                                       : block * q;
            for (u64 r = 0; r < q; ++r) line[r] = h[b0 + r * s];
            for (u64 a = 0; a < q; ++a) {
                cplx t = 0;
                for (u64 r = 0; r < q; ++r) {
                    u64 j = a * r % q;
                    t += line[r] * (sign > 0 ? w[j] : std::conj(w[j]));
                }
                acc[a] = t;
            }
            for (u64 a = 0; a < q; ++a) h[b0 + a * s] = acc[a];
        }
    }
}

u64 gcd_u64(u64 a, u64 b) { return std::gcd(a, b); }

bool primitive_triple(u64 a1, u64 a2, u64 a3, u64 q) {
    return gcd_u64(gcd_u64(gcd_u64(a1, a2), a3), q) == 1;
}

// ---- linear congruences -------------------------------------------------

// tracked unimodular diagonalization U A V = D over Z
struct DiagDecomp {
    std::vector<std::vector<mpz_class>> U, V;
    std::vector<mpz_class> d;
};

DiagDecomp diagonalize_tracked(std::vector<std::vector<mpz_class>> A) {
    const int n = int(A.size());
    DiagDecomp out;
    out.U.assign(n, std::vector<mpz_class>(n, 0));
    out.V.assign(n, std::vector<mpz_class>(n, 0));
    for (int i = 0; i < n; ++i) out.U[i][i] = 1;
    for (int i = 0; i < n; ++i) out.V[i][i] = 1;
    for (int t = 0; t < n; ++t) {
        for (;;) {
            int pr = -1, pc = -1;
            for (int i = t; i < n; ++i)
                for (int j = t; j < n; ++j)
                    if (A[i][j] != 0 &&
                        (pr < 0 || mpz_cmpabs(A[i][j].get_mpz_t(), A[pr][pc].get_mpz_t()) < 0)) {
                        pr = i;
                        pc = j;
                    }
            if (pr < 0) break;  // trailing block is zero
            if (pr != t) {
                std::swap(A[pr], A[t]);
                std::swap(out.U[pr], out.U[t]);
            }
            if (pc != t) {
                for (int i = 0; i < n; ++i) std::swap(A[i][pc], A[i][t]);
                for (int i = 0; i < n; ++i) std::swap(out.V[i][pc], out.V[i][t]);
            }
            bool clean = true;
            for (int i = t + 1; i < n; ++i) {
                if (A[i][t] == 0) continue;
                mpz_class f = A[i][t] / A[t][t];
                if (f != 0)
                    for (int j = 0; j < n; ++j) {
                        A[i][j] -= f * A[t][j];
                        out.U[i][j] -= f * out.U[t][j];
                    }
                if (A[i][t] != 0) clean = false;
            }
            for (int j = t + 1; j < n; ++j) {
                if (A[t][j] == 0) continue;
                mpz_class f = A[t][j] / A[t][t];
                if (f != 0)
                    for (int i = 0; i < n; ++i) {
                        A[i][j] -= f * A[i][t];
                        out.V[i][j] -= f * out.V[i][t];
                    }
                if (A[t][j] != 0) clean = false;
            }
            if (clean) break;
        }
    }
    out.d.resize(n);
    for (int t = 0; t < n; ++t) out.d[t] = A[t][t];
    return out;
}

// All h in (Z/q)^k with A h == rhs (mod q); invokes cb(h) per solution.
// Returns the solution count (0 if inconsistent).
template <class CB>
u64 solve_linear_mod(const std::vector<std::vector<mpz_class>>& A,
                     const std::vector<mpz_class>& rhs, u64 q, bool force, CB&& cb) {
    const int n = int(A.size());
    DiagDecomp dd = diagonalize_tracked(A);
    const mpz_class qz((unsigned long)q);
    std::vector<u64> y0(n), g(n), step(n);
    unsigned __int128 tot = 1;
    for (int i = 0; i < n; ++i) {
        mpz_class ci = 0;
        for (int j = 0; j < n; ++j) ci += dd.U[i][j] * rhs[j];
        mpz_class cm = ci % qz;
        if (cm < 0) cm += qz;
        mpz_class dm = dd.d[i] % qz;
        if (dm < 0) dm += qz;
        u64 c = cm.get_ui(), d = dm.get_ui();
        u64 gi = gcd_u64(d, q);  // gcd(0, q) = q
        if (c % gi != 0) return 0;
        u64 m = q / gi;
        y0[i] = (m == 1) ? 0 : mulmod(c / gi % m, invmod(d / gi, m), m);
        g[i] = gi;
        step[i] = m;
        tot *= gi;
    }
    u64 total = tot > (unsigned __int128)(u64(1) << 62) ? (u64(1) << 62) : u64(tot);
    Budget::charge(total, force && total < (u64(1) << 50));
    std::vector<std::vector<u64>> Vq(n, std::vector<u64>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            mpz_class vm = dd.V[i][j] % qz;
            if (vm < 0) vm += qz;
            Vq[i][j] = vm.get_ui();
        }
    std::vector<u64> t(n, 0), y(n), h(n);
    for (;;) {
        for (int i = 0; i < n; ++i) y[i] = (y0[i] + mulmod(step[i], t[i], q)) % q;
        for (int i = 0; i < n; ++i) {
            u64 s = 0;
            for (int j = 0; j < n; ++j) s = (s + mulmod(Vq[i][j], y[j], q)) % q;
            h[i] = s;
        }
        cb(h);
        int pos = 0;
        while (pos < n && ++t[pos] == g[pos]) t[pos++] = 0;
        if (pos == n) break;
    }
    return total;
}

// (a.Q)(x) mod q for x already reduced mod q
u64 eval_aQ_mod(const TripleSystem& sys, const std::array<u64, 3>& a,
                const std::vector<u64>& x, u64 q) {
    u64 s = 0;
    const int k = sys.k;
    for (int m = 0; m < 3; ++m) {
        if (a[m] == 0) continue;
        u64 qm = 0;
        for (int i = 0; i < k; ++i) {
            u64 row = 0;
            for (int j = 0; j < k; ++j) {
                u64 mij = umod(sys.Q[m].M[i][j], q);
                row = (row + mulmod(mij, x[j], q)) % q;
            }
            qm = (qm + mulmod(x[i], row, q)) % q;
        }
        s = (s + mulmod(a[m], qm, q)) % q;
    }
    return s;
}

std::string vec_str(const std::vector<i64>& v) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << "]";
    return os.str();
}

}  // namespace

cplx S_q_brute(const TripleSystem& sys, const std::array<i64, 3>& a,
               const std::array<i64, 3>& n, u64 q, const RunLimits& lim) {
    const auto w = unit_roots(q);
    std::array<u64, 3> ar{umod(a[0], q), umod(a[1], q), umod(a[2], q)};
    std::array<u64, 3> nr{umod(n[0], q), umod(n[1], q), umod(n[2], q)};
    KahanC kc;
    residue_sweep(sys, q, [&](const i64* v, const i64*) {
        u64 m = 0;
        for (int t = 0; t < 3; ++t)
            m = (m + mulmod(ar[t], (umod(v[t], q) + q - nr[t]) % q, q)) % q;
        kc.add(w[m]);
    }, lim.force);
    return kc.value();
}

std::vector<u64> residue_histogram(const TripleSystem& sys, u64 q, const RunLimits& lim) {
    std::vector<u64> h(q * q * q, 0);
    residue_sweep(sys, q, [&](const i64* v, const i64*) {
        ++h[(umod(v[0], q) * q + umod(v[1], q)) * q + umod(v[2], q)];
    }, lim.force);
    return h;
}

std::vector<cplx> all_Sq(const TripleSystem& sys, u64 q, const RunLimits& lim) {
    Budget::charge(6 * q * q * q * q / 2, lim.force);
    auto hist = residue_histogram(sys, q, lim);
    std::vector<cplx> h(hist.size());
    for (size_t i = 0; i < hist.size(); ++i) h[i] = double(hist[i]);
    dft3(h, q, +1);
    return h;
}

mpz_class sum_all_Sq(const TripleSystem& sys, const std::array<i64, 3>& n,
                     u64 q, const RunLimits& lim) {
    auto S = all_Sq(sys, q, lim);
    const auto w = unit_roots(q);
    std::array<u64, 3> nr{umod(n[0], q), umod(n[1], q), umod(n[2], q)};
    KahanC kc;
    for (u64 a1 = 0; a1 < q; ++a1)
        for (u64 a2 = 0; a2 < q; ++a2)
            for (u64 a3 = 0; a3 < q; ++a3) {
                u64 m = (mulmod(a1, nr[0], q) + mulmod(a2, nr[1], q) + mulmod(a3, nr[2], q)) % q;
                kc.add(S[(a1 * q + a2) * q + a3] * std::conj(w[m]));
            }
    cplx v = kc.value();
    double r = std::round(v.real());
    if (std::abs(v.real() - r) > 0.25 || std::abs(v.imag()) > 0.25 || kc.err() > 0.25)
        throw std::runtime_error("sum_all_Sq: cannot round to an integer safely");
    mpz_class out;
    mpz_set_d(out.get_mpz_t(), r);
    return out;
}

cplx S_p_gauss(const TripleSystem& sys, const std::array<i64, 3>& a,
               const std::array<i64, 3>& n, u64 p) {
    if (p == 2 || !is_prime_u64(p)) throw input_error("S_p_gauss: p must be an odd prime");
    const int k = sys.k;
    std::array<u64, 3> ar{umod(a[0], p), umod(a[1], p), umod(a[2], p)};
    // M = a.Q mod p
    std::vector<std::vector<u64>> M(k, std::vector<u64>(k, 0));
    for (int m = 0; m < 3; ++m) {
        if (ar[m] == 0) continue;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                M[i][j] = (M[i][j] + mulmod(ar[m], umod(sys.Q[m].M[i][j], p), p)) % p;
    }
    // symmetric congruence diagonalization over F_p
    std::vector<u64> diag;
    for (int t = 0; t < k; ++t) {
        int piv = -1;
        for (int i = t; i < k; ++i)
            if (M[i][i] != 0) { piv = i; break; }
        if (piv < 0) {
            int oi = -1, oj = -1;
            for (int i = t; i < k && oi < 0; ++i)
                for (int j = i + 1; j < k; ++j)
                    if (M[i][j] != 0) { oi = i; oj = j; break; }
            if (oi < 0) break;
            // row/col j added to row/col i makes M[i][i] = 2 M[i][j] != 0
            for (int c = 0; c < k; ++c) M[oi][c] = (M[oi][c] + M[oj][c]) % p;
            for (int r = 0; r < k; ++r) M[r][oi] = (M[r][oi] + M[r][oj]) % p;
            piv = oi;
        }
        if (piv != t) {
            std::swap(M[piv], M[t]);
            for (int r = 0; r < k; ++r) std::swap(M[r][piv], M[r][t]);
        }
        u64 d = M[t][t];
        u64 dinv = invmod(d, p);
        for (int i = t + 1; i < k; ++i) {
            if (M[i][t] == 0) continue;
            u64 f = mulmod(M[i][t], dinv, p);
            for (int c = 0; c < k; ++c) M[i][c] = (M[i][c] + mulmod(p - f, M[t][c], p)) % p;
            for (int r = 0; r < k; ++r) M[r][i] = (M[r][i] + mulmod(p - f, M[r][t], p)) % p;
        }
        diag.push_back(d);
    }
    const int r = int(diag.size());
    int chi = 1;
    for (u64 c : diag)
        if (powmod(c, (p - 1) / 2, p) != 1) chi = -chi;
    cplx g = (p % 4 == 1) ? cplx(std::sqrt(double(p)), 0) : cplx(0, std::sqrt(double(p)));
    cplx gr = 1;
    for (int i = 0; i < r; ++i) gr *= g;
    double pz = std::pow(double(p), double(k - r));
    u64 ph = (mulmod(ar[0], umod(n[0], p), p) + mulmod(ar[1], umod(n[1], p), p) +
              mulmod(ar[2], umod(n[2], p), p)) % p;
    return pz * double(chi) * gr * std::conj(e2pi(double(ph) / double(p)));
}

mpz_class count_N_char(const TripleSystem& sys, const std::array<i64, 3>& n,
                       u64 p, double* achieved_err) {
    if (p == 2 || !is_prime_u64(p)) throw input_error("count_N_char: p must be an odd prime");
    // N = p^{k-3} + p^{-3} sum_{a != 0} S_p(a; n); the a = 0 term p^k is kept
    // out of the float accumulator so the error bound tracks the small part.
    KahanC kc;
    for (u64 a1 = 0; a1 < p; ++a1)
        for (u64 a2 = 0; a2 < p; ++a2)
            for (u64 a3 = 0; a3 < p; ++a3) {
                if (a1 == 0 && a2 == 0 && a3 == 0) continue;
                kc.add(S_p_gauss(sys, {i64(a1), i64(a2), i64(a3)}, n, p));
            }
    const double p3 = double(p) * double(p) * double(p);
    cplx v = kc.value();
    double dev = v.real() / p3;
    double r = std::round(dev);
    double err = std::max(std::abs(dev - r), std::abs(v.imag()) / p3);
    if (achieved_err) *achieved_err = err;
    if (err > 0.25 || kc.err() / p3 > 0.25)
        throw std::runtime_error("count_N_char: cannot round to an integer safely");
    mpz_class out, pz((unsigned long)p);
    mpz_pow_ui(out.get_mpz_t(), pz.get_mpz_t(), (unsigned long)(sys.k - 3));
    mpz_class devz;
    mpz_set_d(devz.get_mpz_t(), r);
    return out + devz;
}

cplx T_direct(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
              const RunLimits& lim) {
    auto S = all_Sq(sys, q, lim);
    const auto w = unit_roots(q);
    std::array<u64, 3> nr{umod(n[0], q), umod(n[1], q), umod(n[2], q)};
    KahanC kc;
    for (u64 a1 = 0; a1 < q; ++a1)
        for (u64 a2 = 0; a2 < q; ++a2)
            for (u64 a3 = 0; a3 < q; ++a3) {
                if (!primitive_triple(a1, a2, a3, q)) continue;
                u64 m = (mulmod(a1, nr[0], q) + mulmod(a2, nr[1], q) + mulmod(a3, nr[2], q)) % q;
                kc.add(S[(a1 * q + a2) * q + a3] * std::conj(w[m]));
            }
    return kc.value();
}

cplx S_corr_brute(const TripleSystem& sys, const std::vector<i64>& l1,
                  const std::vector<i64>& l2, u64 q, const RunLimits& lim) {
    const int k = sys.k;
    if (int(l1.size()) != k || int(l2.size()) != k)
        throw input_error("S_corr_brute: l1, l2 must have length k");
    const auto w = unit_roots(q);
    std::vector<u64> l1r(k), l2r(k);
    for (int i = 0; i < k; ++i) l1r[i] = umod(l1[i], q), l2r[i] = umod(l2[i], q);
    // C1[rho] = sum_{x: Q(x)=rho} e_q(l1.x), C2 likewise with l2
    std::vector<cplx> C1(q * q * q, 0), C2(q * q * q, 0);
    residue_sweep(sys, q, [&](const i64* v, const i64* x) {
        u64 s1 = 0, s2 = 0;
        for (int i = 0; i < k; ++i) {
            s1 = (s1 + l1r[i] * u64(x[i])) % q;
            s2 = (s2 + l2r[i] * u64(x[i])) % q;
        }
        u64 idx = (umod(v[0], q) * q + umod(v[1], q)) * q + umod(v[2], q);
        C1[idx] += w[s1];
        C2[idx] += w[s2];
    }, lim.force);
    Budget::charge(6 * q * q * q * q, lim.force);
    dft3(C1, q, +1);  // A[a] = U(a; l1)
    dft3(C2, q, -1);  // B[a] = U(-a; l2)
    KahanC kc;
    for (u64 a1 = 0; a1 < q; ++a1)
        for (u64 a2 = 0; a2 < q; ++a2)
            for (u64 a3 = 0; a3 < q; ++a3) {
                if (!primitive_triple(a1, a2, a3, q)) continue;
                u64 idx = (a1 * q + a2) * q + a3;
                kc.add(C1[idx] * C2[idx]);
            }
    return kc.value();
}

cplx S_corr(const TripleSystem& sys, const std::vector<i64>& l1,
            const std::vector<i64>& l2, u64 q, const RunLimits& lim) {
    const int k = sys.k;
    if (int(l1.size()) != k || int(l2.size()) != k)
        throw input_error("S_corr: l1, l2 must have length k");
    Budget::charge(q * q * q * u64(k) * u64(k) * u64(k), lim.force);
    const auto w = unit_roots(q);
    std::vector<mpz_class> rhs(k);  // -l3 = -(l1 + l2)
    for (int i = 0; i < k; ++i) rhs[i] = (unsigned long)umod(-(l1[i] + l2[i]), q);
    std::vector<u64> l1r(k);
    for (int i = 0; i < k; ++i) l1r[i] = umod(l1[i], q);
    KahanC kc;
    std::vector<std::vector<mpz_class>> A(k, std::vector<mpz_class>(k));
    for (u64 a1 = 0; a1 < q; ++a1)
        for (u64 a2 = 0; a2 < q; ++a2)
            for (u64 a3 = 0; a3 < q; ++a3) {
                if (!primitive_triple(a1, a2, a3, q)) continue;
                std::array<u64, 3> ar{a1, a2, a3};
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) {
                        u64 s = 0;
                        for (int m = 0; m < 3; ++m)
                            s = (s + mulmod(ar[m], umod(sys.Q[m].M[i][j], q), q)) % q;
                        A[i][j] = (unsigned long)((2 * s) % q);
                    }
                solve_linear_mod(A, rhs, q, lim.force, [&](const std::vector<u64>& h) {
                    u64 ph = eval_aQ_mod(sys, ar, h, q);
                    for (int i = 0; i < k; ++i) ph = (ph + mulmod(l1r[i], h[i], q)) % q;
                    kc.add(w[ph]);
                });
            }
    return std::pow(double(q), double(k)) * kc.value();
}

mpq_class S_corr_counts(const TripleSystem& sys, const std::vector<i64>& l1,
                        const std::vector<i64>& l2, u64 p, int e,
                        const RunLimits& lim) {
    const int k = sys.k;
    if (p == 2 || !is_prime_u64(p)) throw input_error("S_corr_counts: p must be an odd prime");
    if (e < 1) throw input_error("S_corr_counts: e must be >= 1");
    u64 q = 1, qe1 = 1;
    for (int i = 0; i < e; ++i) {
        q *= p;
        if (i < e - 1) qe1 *= p;
    }
    Budget::charge(q * q * q * u64(k) * u64(k) * u64(k), lim.force);
    std::vector<mpz_class> rhs(k);  // -l4 = -(l1 - l2)
    for (int i = 0; i < k; ++i) rhs[i] = (unsigned long)umod(-(l1[i] - l2[i]), q);
    std::vector<u64> l3r(k);
    for (int i = 0; i < k; ++i) l3r[i] = umod(l1[i] + l2[i], q);
    mpz_class N1 = 0, N2 = 0;
    std::vector<std::vector<mpz_class>> A(k, std::vector<mpz_class>(k));
    for (u64 b1 = 0; b1 < q; ++b1)
        for (u64 b2 = 0; b2 < q; ++b2)
            for (u64 b3 = 0; b3 < q; ++b3) {
                if (b1 % p == 0 && b2 % p == 0 && b3 % p == 0) continue;
                std::array<u64, 3> br{b1, b2, b3};
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) {
                        u64 s = 0;
                        for (int m = 0; m < 3; ++m)
                            s = (s + mulmod(br[m], umod(sys.Q[m].M[i][j], q), q)) % q;
                        A[i][j] = (unsigned long)s;
                    }
                solve_linear_mod(A, rhs, q, lim.force, [&](const std::vector<u64>& wv) {
                    u64 s3 = 0;
                    for (int i = 0; i < k; ++i) s3 = (s3 + mulmod(l3r[i], wv[i], q)) % q;
                    if (s3 % qe1 == 0) ++N1;
                    if (s3 == 0) ++N2;
                });
            }
    mpz_class pk;
    mpz_ui_pow_ui(pk.get_mpz_t(), (unsigned long)p, (unsigned long)(u64(e) * u64(k)));
    mpz_class qz((unsigned long)q), qe1z((unsigned long)qe1);
    mpq_class out(pk * (qz * N2 - qe1z * N1), qz - qe1z);
    out.canonicalize();
    return out;
}

CorrDegeneracy corr_degeneracy(const TripleSystem& sys, const std::vector<i64>& l1,
                               const std::vector<i64>& l2, u64 p) {
    const int k = sys.k;
    if (int(l1.size()) != k || int(l2.size()) != k)
        throw input_error("corr_degeneracy: l1, l2 must have length k");
    const int d = k + 1;
    CorrDegeneracy out;
    std::vector<std::vector<u64>> M(d, std::vector<u64>(d));
    for (u64 b1 = 0; b1 < p; ++b1)
        for (u64 b2 = 0; b2 < p; ++b2)
            for (u64 b3 = 0; b3 < p; ++b3) {
                std::array<u64, 3> br{b1, b2, b3};
                for (int i = 0; i < k; ++i)
                    for (int j = 0; j < k; ++j) {
                        u64 s = 0;
                        for (int m = 0; m < 3; ++m)
                            s = (s + mulmod(br[m], umod(sys.Q[m].M[i][j], p), p)) % p;
                        M[i][j] = s;
                    }
                for (int i = 0; i < k; ++i) {
                    M[i][k] = umod(l1[i] - l2[i], p);  // last column: l4
                    M[k][i] = umod(l1[i] + l2[i], p);  // last row:    l3^T
                }
                M[k][k] = 0;
                // rank by Gaussian elimination
                auto E = M;
                int rank = 0;
                for (int c = 0; c < d && rank < d; ++c) {
                    int piv = -1;
                    for (int r = rank; r < d; ++r)
                        if (E[r][c] != 0) { piv = r; break; }
                    if (piv < 0) continue;
                    std::swap(E[piv], E[rank]);
                    u64 inv = invmod(E[rank][c], p);
                    for (int r = rank + 1; r < d; ++r) {
                        if (E[r][c] == 0) continue;
                        u64 f = mulmod(E[r][c], inv, p);
                        for (int cc = c; cc < d; ++cc)
                            E[r][cc] = (E[r][cc] + mulmod(p - f, E[rank][cc], p)) % p;
                    }
                    ++rank;
                }
                if (rank < d) ++out.f;
                if (rank <= k - 1) ++out.g;
            }
    return out;
}

double corr_window_sum(const TripleSystem& sys, u64 qmax, i64 L, const RunLimits& lim) {
    if (L < 0) throw input_error("corr_window_sum: window size must be >= 0");
    const int k = sys.k;
    double total = std::pow(double(2 * L + 1), 2.0 * k);  // q = 1: every S(l;1) = 1
    for (u64 q = 2; q <= qmax; ++q) {
        // residue classes of [-L, L] mod q, with multiplicities
        std::map<u64, u64> coord;
        for (i64 v = -L; v <= L; ++v) ++coord[umod(v, q)];
        std::vector<std::pair<u64, u64>> cls(coord.begin(), coord.end());
        const u64 nc = cls.size();
        std::map<u64, u64> idx_of;
        for (u64 j = 0; j < nc; ++j) idx_of[cls[j].first] = j;
        const u64 ncls = checked_pow_u64(nc, k);
        Budget::charge(checked_pow_u64(q, k) * ncls + 3 * checked_pow_u64(q, 4) * ncls +
                           checked_pow_u64(q, 3) * ncls * ncls,
                       lim.force);
        // per class vector: residues, window multiplicity, negated-class index
        std::vector<double> mult(ncls);
        std::vector<u64> negidx(ncls);
        std::vector<u64> digit(k, 0);
        for (u64 ci = 0;; ++ci) {
            double m = 1;
            u64 ni = 0;
            for (int i = 0; i < k; ++i) {
                m *= double(cls[digit[i]].second);
                ni = ni * nc + idx_of[(q - cls[digit[i]].first) % q];
            }
            mult[ci] = m;
            negidx[ci] = ni;
            if (ci + 1 == ncls) break;
            int d = k - 1;
            while (digit[d] + 1 == nc) digit[d--] = 0;
            ++digit[d];
        }
        // H[rho * ncls + c] = sum over {x : Q(x) = rho} of e_q(class_c . x)
        const auto w = unit_roots(q);
        std::vector<cplx> H(q * q * q * ncls, 0);
        std::vector<std::vector<u64>> s(k, std::vector<u64>(nc));
        std::vector<u64> pref(k + 1, 0);
        residue_sweep(
            sys, q,
            [&](const i64* v, const i64* x) {
                for (int i = 0; i < k; ++i)
                    for (u64 j = 0; j < nc; ++j) s[i][j] = cls[j].first * u64(x[i]) % q;
                u64 base = ((umod(v[0], q) * q + umod(v[1], q)) * q + umod(v[2], q)) * ncls;
                std::fill(digit.begin(), digit.end(), 0);
                for (int i = 0; i < k; ++i) pref[i + 1] = (pref[i] + s[i][0]) % q;
                for (u64 ci = 0;; ++ci) {
                    H[base + ci] += w[pref[k]];
                    if (ci + 1 == ncls) break;
                    int d = k - 1;
                    while (digit[d] + 1 == nc) digit[d--] = 0;
                    ++digit[d];
                    for (int i = d; i < k; ++i) pref[i + 1] = (pref[i] + s[i][digit[i]]) % q;
                }
            },
            lim.force);
        // U[a * ncls + c] = U(a; class_c) via the character transform over rho
        std::vector<cplx> U(q * q * q * ncls);
        std::vector<cplx> col(q * q * q);
        for (u64 c = 0; c < ncls; ++c) {
            for (u64 r = 0; r < q * q * q; ++r) col[r] = H[r * ncls + c];
            dft3(col, q, +1);
            for (u64 a = 0; a < q * q * q; ++a) U[a * ncls + c] = col[a];
        }
        std::vector<cplx> pair(ncls * ncls, 0);
        for (u64 a1 = 0; a1 < q; ++a1)
            for (u64 a2 = 0; a2 < q; ++a2)
                for (u64 a3 = 0; a3 < q; ++a3) {
                    if (!primitive_triple(a1, a2, a3, q)) continue;
                    const cplx* ua = &U[((a1 * q + a2) * q + a3) * ncls];
                    for (u64 i = 0; i < ncls; ++i) {
                        cplx ui = ua[i];
                        for (u64 j = 0; j < ncls; ++j)
                            pair[i * ncls + j] += ui * std::conj(ua[negidx[j]]);
                    }
                }
        KahanC kc;
        for (u64 i = 0; i < ncls; ++i)
            for (u64 j = 0; j < ncls; ++j)
                kc.add(mult[i] * mult[j] * std::abs(pair[i * ncls + j]), 0.0);
        total += kc.value().real();
    }
    return total;
}

namespace {

std::vector<std::pair<std::vector<i64>, std::vector<i64>>> sample_l(
    int k, u64 q, int nl, u64 seed) {
    std::vector<std::pair<std::vector<i64>, std::vector<i64>>> ls;
    std::vector<i64> z(k, 0), e1(k, 0);
    e1[0] = 1;
    std::vector<i64> me1(k, 0);
    me1[0] = -1;
    ls.push_back({z, z});
    ls.push_back({e1, z});
    ls.push_back({e1, me1});  // l3 = 0
    ls.push_back({e1, e1});   // l4 = 0
    auto rng = seeded_rng(seed, 0xEC1);
    std::uniform_int_distribution<i64> U(0, i64(q) - 1);
    for (int t = 0; t < nl; ++t) {
        std::vector<i64> a(k), b(k);
        for (int i = 0; i < k; ++i) a[i] = U(rng), b[i] = U(rng);
        ls.push_back({a, b});
    }
    return ls;
}

}  // namespace

ObsRecord observe_corr_plain(const TripleSystem& sys, u64 p, int e, int nl,
                             const RunLimits& lim) {
    u64 q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    const double env = (sys.k * e + 1) * std::pow(double(p), double(e) * (sys.k + 3));
    ObsRecord rec;
    rec.name = "corr_plain(p=" + std::to_string(p) + ",e=" + std::to_string(e) + ")";
    for (auto& [l1, l2] : sample_l(sys.k, q, nl, lim.seed)) {
        double ratio = std::abs(S_corr(sys, l1, l2, q, lim)) / env;
        ++rec.samples;
        if (ratio > rec.value) {
            rec.value = ratio;
            rec.argmax = "l1=" + vec_str(l1) + " l2=" + vec_str(l2);
        }
    }
    return rec;
}

ObsRecord observe_corr_refined(const TripleSystem& sys, u64 p, int e, int nl,
                               const RunLimits& lim) {
    u64 q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    const double base = (sys.k * e + 1) * std::pow(double(p), double(e) * (sys.k + 3));
    ObsRecord rec;
    rec.name = "corr_refined(p=" + std::to_string(p) + ",e=" + std::to_string(e) + ")";
    for (auto& [l1, l2] : sample_l(sys.k, q, nl, lim.seed)) {
        auto dg = corr_degeneracy(sys, l1, l2, p);
        double env = base * (1.0 / p + double(dg.f) / (double(p) * p * p) +
                             double(dg.g) / (double(p) * p));
        double ratio = std::abs(S_corr(sys, l1, l2, q, lim)) / env;
        ++rec.samples;
        if (ratio > rec.value) {
            rec.value = ratio;
            rec.argmax = "l1=" + vec_str(l1) + " l2=" + vec_str(l2) +
                         " f=" + std::to_string(dg.f) + " g=" + std::to_string(dg.g);
        }
    }
    return rec;
}

ObsRecord observe_T(const TripleSystem& sys, u64 p, int e, int nn, const RunLimits& lim) {
    u64 q = 1;
    for (int i = 0; i < e; ++i) q *= p;
    const double env = std::pow(double(p), double(e) * (3.0 + sys.k / 2.0));
    ObsRecord rec;
    rec.name = "Tbound(p=" + std::to_string(p) + ",e=" + std::to_string(e) + ")";
    auto rng = seeded_rng(lim.seed, 0xEC2);
    std::uniform_int_distribution<i64> U(0, i64(q) - 1);
    std::vector<std::array<i64, 3>> ns = {{0, 0, 0}, {1, 0, 0}, {1, 1, 1}};
    for (int t = 0; t < nn; ++t) ns.push_back({U(rng), U(rng), U(rng)});
    for (auto& n : ns) {
        mpz_class T = T_from_counts(sys, n, q, lim);
        double ratio = std::abs(T.get_d()) / env;
        ++rec.samples;
        if (ratio > rec.value) {
            rec.value = ratio;
            rec.argmax = "n=[" + std::to_string(n[0]) + "," + std::to_string(n[1]) + "," +
                         std::to_string(n[2]) + "]";
        }
    }
    return rec;
}

ObsRecord observe_SqZ(const TripleSystem& sys, u64 q, const RunLimits& lim) {
    auto S = all_Sq(sys, q, lim);
    ObsRecord rec;
    rec.name = "SqZ(q=" + std::to_string(q) + ")";
    for (u64 a1 = 0; a1 < q; ++a1)
        for (u64 a2 = 0; a2 < q; ++a2)
            for (u64 a3 = 0; a3 < q; ++a3) {
                double m2 = std::norm(S[(a1 * q + a2) * q + a3]);
                mpz_class Z = Z_count(sys, {i64(a1), i64(a2), i64(a3)}, q);
                double env = std::pow(double(q), double(sys.k)) * Z.get_d();
                double ratio = m2 / env;
                ++rec.samples;
                if (ratio > rec.value) {
                    rec.value = ratio;
                    rec.argmax = "a=[" + std::to_string(a1) + "," + std::to_string(a2) + "," +
                                 std::to_string(a3) + "]";
                }
            }
    return rec;
}

}  // namespace triquad
