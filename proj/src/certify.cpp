#include <algorithm>
#include <numeric>

#include "triquad/quadsys.hpp"

namespace triquad {

namespace {

// --- modular univariate helpers (coefficient arrays ascending in degree) ---

int trim_deg(const std::vector<u64>& f) {
    int d = (int)f.size() - 1;
    while (d >= 0 && f[d] == 0) --d;
    return d;
}

// Resultant of f and g over F_p by the Euclidean remainder sequence,
// Res(f,g) = (-1)^(df dg) lc(g)^(df-dr) Res(g,r).
u64 prs_resultant(std::vector<u64> f, std::vector<u64> g, u64 p) {
    int df = trim_deg(f), dg = trim_deg(g);
    if (df < 0 || dg < 0) return 0;
    u64 res = 1;
    if (df < dg) {
        std::swap(f, g);
        std::swap(df, dg);
        if (((u64)df * (u64)dg) & 1) res = p - res;
    }
    while (dg > 0) {
        // r = f mod g
        u64 lginv = invmod(g[dg], p);
        std::vector<u64> r(f.begin(), f.begin() + df + 1);
        for (int i = df; i >= dg; --i) {
            if (r[i] == 0) continue;
            u64 q = mulmod(r[i], lginv, p);
            for (int j = 0; j <= dg; ++j) {
                u64 t = mulmod(q, g[j], p);
                r[i - dg + j] = (r[i - dg + j] + p - t) % p;
            }
        }
        int dr = dg - 1;
        while (dr >= 0 && r[dr] == 0) --dr;
        if (((u64)df * (u64)dg) & 1) res = (p - res) % p;
        res = mulmod(res, powmod(g[dg], (u64)(df - (dr < 0 ? 0 : dr)), p), p);
        if (dr < 0) return 0;
        f.assign(g.begin(), g.begin() + dg + 1);
        df = dg;
        g.assign(r.begin(), r.begin() + dr + 1);
        dg = dr;
    }
    // g constant
    res = mulmod(res, powmod(g[0], (u64)df, p), p);
    return res;
}

// Newton interpolation through (xs[i], ys[i]); returns ascending coefficients.
std::vector<u64> interp_mod(const std::vector<u64>& xs, std::vector<u64> ys, u64 p) {
    int n = (int)xs.size();
    for (int j = 1; j < n; ++j)
        for (int i = n - 1; i >= j; --i) {
            u64 num = (ys[i] + p - ys[i - 1]) % p;
            u64 den = (xs[i] + p - xs[i - j]) % p;
            ys[i] = mulmod(num, invmod(den, p), p);
        }
    std::vector<u64> c(n, 0);
    for (int i = n - 1; i >= 0; --i) {
        // c = c*(x - xs[i]) + ys[i]
        for (int j = n - 1; j >= 1; --j)
            c[j] = (c[j - 1] + p - mulmod(c[j], xs[i] % p, p)) % p;
        c[0] = (p - mulmod(c[0], xs[i] % p, p) + ys[i]) % p;
    }
    return c;
}

// --- chain machinery ---

// coeff_table[j][m] = coefficient of x^j y^m z^(k-1-j-m) of a homogeneous
// degree-(k-1) polynomial, reduced mod p
std::vector<std::vector<u64>> coeff_table(const IntPoly& P, int k, u64 p) {
    std::vector<std::vector<u64>> T(k);
    for (int j = 0; j < k; ++j) T[j].assign(k - j, 0);
    mpz_class pm((unsigned long)p);
    for (const auto& [e, c] : P.terms()) {
        mpz_class r = c % pm;
        if (r < 0) r += pm;
        T[e[0]][e[1]] = r.get_ui();
    }
    return T;
}

// f_j(t) for the specialization (x, t, 1); returns ascending x-coefficients
std::vector<u64> specialize_x_coeffs(const std::vector<std::vector<u64>>& T, int k, u64 t, u64 p) {
    std::vector<u64> pw(k, 1);
    for (int i = 1; i < k; ++i) pw[i] = mulmod(pw[i - 1], t, p);
    std::vector<u64> f(k, 0);
    for (int j = 0; j < k; ++j) {
        u64 acc = 0;
        for (int m = 0; m < (int)T[j].size(); ++m)
            if (T[j][m]) acc = (acc + mulmod(T[j][m], pw[m], p)) % p;
        f[j] = acc;
    }
    return f;
}

// Determinant mod p of the Sylvester matrix of f, g with formal degrees d, d.
u64 sylvester_det_formal(const std::vector<u64>& f, const std::vector<u64>& g, int d, u64 p) {
    int n = 2 * d;
    std::vector<std::vector<u64>> M(n, std::vector<u64>(n, 0));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= d; ++j) {
            M[i][i + j] = f[d - j];
            M[d + i][i + j] = g[d - j];
        }
    u64 det = 1;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (M[r][col]) {
                piv = r;
                break;
            }
        if (piv < 0) return 0;
        if (piv != col) {
            std::swap(M[piv], M[col]);
            det = (p - det) % p;
        }
        det = mulmod(det, M[col][col], p);
        u64 inv = invmod(M[col][col], p);
        for (int r = col + 1; r < n; ++r) {
            if (!M[r][col]) continue;
            u64 t = mulmod(M[r][col], inv, p);
            for (int c = col; c < n; ++c)
                M[r][c] = (M[r][c] + p - mulmod(t, M[col][c], p)) % p;
        }
    }
    return det;
}

struct ChainOutcome {
    bool ok = false;
    bool lead_ok = false;
    std::string why;
};

// One prime of the fast-modular chain: interpolate the two inner resultants
// from Sylvester specializations, then certify the outer resultant equals
// c * z^(k-1)^4 by evaluation at (k-1)^4 + 1 points.
ChainOutcome chain_one_prime(int k, const IntPoly& Px, const IntPoly& Py, const IntPoly& Pz,
                             u64 p) {
    ChainOutcome out;
    int d = k - 1;
    int D = d * d;
    u64 N = (u64)D * (u64)D;
    Budget::charge((N + 1) * (u64)(D + 25));

    auto TX = coeff_table(Px, k, p), TY = coeff_table(Py, k, p), TZ = coeff_table(Pz, k, p);

    std::vector<u64> xs(D + 1), v1(D + 1), v2(D + 1);
    for (int t = 0; t <= D; ++t) {
        xs[t] = (u64)t;
        auto fx = specialize_x_coeffs(TX, k, t, p);
        auto fy = specialize_x_coeffs(TY, k, t, p);
        auto fz = specialize_x_coeffs(TZ, k, t, p);
        v1[t] = sylvester_det_formal(fx, fy, d, p);
        v2[t] = sylvester_det_formal(fx, fz, d, p);
    }
    std::vector<u64> r1 = interp_mod(xs, v1, p);
    std::vector<u64> r2 = interp_mod(xs, v2, p);
    if (trim_deg(r1) < 0 || trim_deg(r2) < 0) {
        out.why = "inner resultant vanishes mod p";
        return out;
    }
    out.lead_ok = r1[D] != 0 && r2[D] != 0;

    u64 cp = 0;
    std::vector<u64> zpow(D + 1), a(D + 1), b(D + 1);
    for (u64 z0 = 1; z0 <= N + 1; ++z0) {
        zpow[0] = 1;
        for (int i = 1; i <= D; ++i) zpow[i] = mulmod(zpow[i - 1], z0, p);
        // R1(y, z0) has y^j coefficient r1[j] * z0^(D-j)
        for (int j = 0; j <= D; ++j) {
            a[j] = mulmod(r1[j], zpow[D - j], p);
            b[j] = mulmod(r2[j], zpow[D - j], p);
        }
        u64 v = prs_resultant(a, b, p);
        if (z0 == 1) {
            cp = v;
            if (cp == 0) {
                out.why = "outer resultant vanishes at z=1";
                return out;
            }
        } else if (v != mulmod(cp, powmod(z0, N, p), p)) {
            out.why = "outer resultant is not a pure power of z";
            return out;
        }
    }
    out.ok = true;
    return out;
}

// --- witness machinery ---

struct FrameMats {
    std::array<std::vector<std::vector<i64>>, 3> mats;
    std::array<std::array<i64, 3>, 3> T;  // accumulated pencil coordinate change
};

std::array<mpz_class, 3> apply_T(const std::array<std::array<i64, 3>, 3>& T,
                                 const std::array<mpz_class, 3>& w) {
    std::array<mpz_class, 3> out;
    for (int i = 0; i < 3; ++i)
        out[i] = mpz_class((long)T[i][0]) * w[0] + mpz_class((long)T[i][1]) * w[1] + mpz_class((long)T[i][2]) * w[2];
    return out;
}

bool verify_witness(const std::array<IntPoly, 3>& parts, const std::array<mpz_class, 3>& w) {
    if (w[0] == 0 && w[1] == 0 && w[2] == 0) return false;
    std::vector<mpz_class> pt{w[0], w[1], w[2]};
    for (const auto& P : parts)
        if (P.eval(pt) != 0) return false;
    return true;
}

struct Fast3Term {
    int ex, ey, ez;
    u64 c;
};

std::vector<Fast3Term> fast_terms(const IntPoly& P, u64 p) {
    std::vector<Fast3Term> out;
    mpz_class pm((unsigned long)p);
    for (const auto& [e, c] : P.terms()) {
        mpz_class r = c % pm;
        if (r < 0) r += pm;
        if (r != 0) out.push_back({e[0], e[1], e[2], r.get_ui()});
    }
    return out;
}

std::optional<std::array<mpz_class, 3>> witness_hunt(const std::array<IntPoly, 3>& parts,
                                                     const TripleSystem& sys,
                                                     std::mt19937_64& rng) {
    // product-of-linear-forms shortcut for simultaneously diagonal systems
    bool all_diag = true;
    for (int m = 0; m < 3 && all_diag; ++m)
        for (int i = 0; i < sys.k && all_diag; ++i)
            for (int j = 0; j < sys.k; ++j)
                if (i != j && sys.Q[m].M[i][j] != 0) {
                    all_diag = false;
                    break;
                }
    auto cross = [](const std::array<mpz_class, 3>& u,
                    const std::array<mpz_class, 3>& v) -> std::array<mpz_class, 3> {
        return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    };
    if (all_diag) {
        std::vector<std::array<mpz_class, 3>> rows(sys.k);
        for (int i = 0; i < sys.k; ++i)
            rows[i] = {mpz_class((long)sys.Q[0].M[i][i]), mpz_class((long)sys.Q[1].M[i][i]),
                       mpz_class((long)sys.Q[2].M[i][i])};
        for (int i = 0; i < sys.k; ++i)
            for (int j = i + 1; j < sys.k; ++j) {
                auto w = cross(rows[i], rows[j]);
                if (verify_witness(parts, w)) return w;
            }
        // all row vectors parallel: any point on the common line works
        for (int i = 0; i < sys.k; ++i)
            for (int ax = 0; ax < 3; ++ax) {
                std::array<mpz_class, 3> e{0, 0, 0};
                e[ax] = 1;
                auto w = cross(rows[i], e);
                if (verify_witness(parts, w)) return w;
            }
    }
    // small-height projective search, filtered modulo two random primes
    const int H = 12;
    u64 pr[2];
    for (int i = 0; i < 2; ++i) {
        u64 p;
        do p = ((u64)rng() % (1u << 29)) + (1u << 29) + 1;
        while (!is_prime_u64(p));
        pr[i] = p;
    }
    std::array<std::vector<Fast3Term>, 2> t0, t1, t2;
    for (int i = 0; i < 2; ++i) {
        t0[i] = fast_terms(parts[0], pr[i]);
        t1[i] = fast_terms(parts[1], pr[i]);
        t2[i] = fast_terms(parts[2], pr[i]);
    }
    int dmax = 0;
    for (const auto& P : parts) dmax = std::max(dmax, P.degree());
    Budget::charge((u64)(2 * H + 1) * (2 * H + 1) * (2 * H + 1) * 4);
    for (i64 a = -H; a <= H; ++a)
        for (i64 b = -H; b <= H; ++b)
            for (i64 c = -H; c <= H; ++c) {
                if (a == 0 && b == 0 && c == 0) continue;
                i64 lead = a != 0 ? a : (b != 0 ? b : c);
                if (lead < 0) continue;
                i64 g = std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
                if (g != 1) continue;
                bool pass = true;
                for (int i = 0; i < 2 && pass; ++i) {
                    u64 p = pr[i];
                    auto red = [&](i64 v) -> u64 { return (u64)(((v % (i64)p) + (i64)p) % (i64)p); };
                    std::vector<u64> pa(dmax + 1, 1), pb(dmax + 1, 1), pc(dmax + 1, 1);
                    for (int e = 1; e <= dmax; ++e) {
                        pa[e] = mulmod(pa[e - 1], red(a), p);
                        pb[e] = mulmod(pb[e - 1], red(b), p);
                        pc[e] = mulmod(pc[e - 1], red(c), p);
                    }
                    for (const auto* T : {&t0[i], &t1[i], &t2[i]}) {
                        u64 acc = 0;
                        for (const auto& t : *T)
                            acc = (acc +
                                   mulmod(mulmod(t.c, pa[t.ex], p), mulmod(pb[t.ey], pc[t.ez], p), p)) %
                                  p;
                        if (acc != 0) {
                            pass = false;
                            break;
                        }
                    }
                }
                if (!pass) continue;
                std::array<mpz_class, 3> w{mpz_class((long)a), mpz_class((long)b), mpz_class((long)c)};
                if (verify_witness(parts, w)) return w;
            }
    return std::nullopt;
}

bool z0_subcase_ok(const IntPoly& F, int k) {
    IntPoly G = F.substitute({true, true, false}, {mpz_class(0), mpz_class(0), mpz_class(0)});
    if (G.is_zero()) return false;
    IntPoly A = partial(G, "x"), B = partial(G, "y");
    std::vector<mpz_class> la(k, 0), lb(k, 0);
    for (const auto& [e, c] : A.terms()) la[e[1]] = c;
    for (const auto& [e, c] : B.terms()) lb[e[1]] = c;
    return binary_form_resultant(la, k - 1, lb, k - 1) != 0;
}

std::array<std::array<i64, 3>, 3> random_unimodular(std::mt19937_64& rng) {
    while (true) {
        std::array<std::array<i64, 3>, 3> T{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
        for (int step = 0; step < 6; ++step) {
            int op = (int)(rng() % 3);
            int r = (int)(rng() % 3), s = (int)(rng() % 3);
            if (op == 0 && r != s) {
                i64 f = (rng() & 1) ? 1 : -1;
                for (int c = 0; c < 3; ++c) T[r][c] += f * T[s][c];
            } else if (op == 1) {
                std::swap(T[r], T[s]);
            } else {
                for (int c = 0; c < 3; ++c) T[r][c] = -T[r][c];
            }
        }
        i64 mx = 0;
        bool ident = true;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                mx = std::max(mx, std::abs(T[i][j]));
                if (T[i][j] != (i == j ? 1 : 0)) ident = false;
            }
        if (mx <= 6 && !ident) return T;
    }
}

std::array<std::array<i64, 3>, 3> mat3_mul(const std::array<std::array<i64, 3>, 3>& A,
                                           const std::array<std::array<i64, 3>, 3>& B) {
    std::array<std::array<i64, 3>, 3> C{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            i64 s = 0;
            for (int l = 0; l < 3; ++l) s += A[i][l] * B[l][j];
            C[i][j] = s;
        }
    return C;
}

u64 random_30bit_prime(std::mt19937_64& rng, const std::vector<u64>& used) {
    while (true) {
        u64 p = ((u64)rng() % (1u << 29)) + (1u << 29);
        p |= 1;
        if (!is_prime_u64(p)) continue;
        if (std::find(used.begin(), used.end(), p) != used.end()) continue;
        return p;
    }
}

// Exact-long chain: exact inner resultants over Z, outer resultant
// reconstructed coefficient-by-coefficient with CRT until stable.
bool exact_chain(const TripleSystem& sys, const std::array<IntPoly, 3>& parts,
                 std::mt19937_64& rng, Cond2Certificate& cert) {
    int k = sys.k;
    int D = (k - 1) * (k - 1);
    u64 N = (u64)D * (u64)D;
    IntPoly R1 = resultant(parts[0], parts[1], "x");
    IntPoly R2 = resultant(parts[0], parts[2], "x");
    if (R1.is_zero() || R2.is_zero()) {
        cert.note = "inner resultant vanishes identically";
        return false;
    }
    if (R1.degree() != D || R2.degree() != D) {
        cert.note = "inner resultant has unexpected degree " + std::to_string(R1.degree());
        return false;
    }
    std::vector<mpz_class> c1(D + 1, 0), c2(D + 1, 0);
    for (const auto& [e, c] : R1.terms()) c1[e[1]] = c;
    for (const auto& [e, c] : R2.terms()) c2[e[1]] = c;

    std::vector<mpz_class> rec(N + 1, 0);  // balanced CRT residues of R3
    mpz_class modulus = 1;
    int stable = 0;
    std::vector<u64> used;
    while (stable < 3) {
        u64 p = random_30bit_prime(rng, used);
        used.push_back(p);
        Budget::charge((N + 1) * (u64)(D + 25) + N * N / 8);
        std::vector<u64> r1(D + 1), r2(D + 1);
        mpz_class pm((unsigned long)p);
        for (int j = 0; j <= D; ++j) {
            mpz_class v = c1[j] % pm;
            if (v < 0) v += pm;
            r1[j] = v.get_ui();
            v = c2[j] % pm;
            if (v < 0) v += pm;
            r2[j] = v.get_ui();
        }
        std::vector<u64> xs(N + 1), ys(N + 1), zpow(D + 1), a(D + 1), b(D + 1);
        for (u64 z0 = 1; z0 <= N + 1; ++z0) {
            zpow[0] = 1;
            for (int i = 1; i <= D; ++i) zpow[i] = mulmod(zpow[i - 1], z0, p);
            for (int j = 0; j <= D; ++j) {
                a[j] = mulmod(r1[j], zpow[D - j], p);
                b[j] = mulmod(r2[j], zpow[D - j], p);
            }
            xs[z0 - 1] = z0;
            ys[z0 - 1] = prs_resultant(a, b, p);
        }
        std::vector<u64> r3 = interp_mod(xs, ys, p);
        bool changed = false;
        mpz_class newmod = modulus * pm;
        for (u64 j = 0; j <= N; ++j) {
            // lift rec[j] (balanced mod `modulus`) to match r3[j] mod p
            mpz_class cur = rec[j];
            mpz_class curp = cur % pm;
            if (curp < 0) curp += pm;
            u64 delta = (r3[j] + p - curp.get_ui()) % p;
            if (delta != 0) {
                mpz_class minv;
                mpz_class mm = modulus % pm;
                u64 minv_u = invmod(mm.get_ui() % p, p);
                mpz_class add = modulus * mpz_class((unsigned long)mulmod(delta, minv_u, p));
                cur += add;
                changed = true;
            }
            mpz_class half = newmod / 2;
            cur %= newmod;
            if (cur > half) cur -= newmod;
            if (cur < -half) cur += newmod;
            if (cur != rec[j]) {
                rec[j] = cur;
                changed = true;
            }
        }
        modulus = newmod;
        stable = changed ? 0 : stable + 1;
        if (used.size() > 1200) {
            cert.note = "exact outer resultant did not stabilize";
            return false;
        }
    }
    // guard primes: spot-check the reconstruction against direct evaluation
    for (int g = 0; g < 2; ++g) {
        u64 p = random_30bit_prime(rng, used);
        used.push_back(p);
        mpz_class pm((unsigned long)p);
        std::vector<u64> r1(D + 1), r2(D + 1), r3(N + 1);
        for (int j = 0; j <= D; ++j) {
            mpz_class v = c1[j] % pm;
            if (v < 0) v += pm;
            r1[j] = v.get_ui();
            v = c2[j] % pm;
            if (v < 0) v += pm;
            r2[j] = v.get_ui();
        }
        for (u64 j = 0; j <= N; ++j) {
            mpz_class v = rec[j] % pm;
            if (v < 0) v += pm;
            r3[j] = v.get_ui();
        }
        std::vector<u64> zpow(D + 1), a(D + 1), b(D + 1);
        for (int trial = 0; trial < 32; ++trial) {
            u64 z0 = (u64)rng() % (p - 1) + 1;
            zpow[0] = 1;
            for (int i = 1; i <= D; ++i) zpow[i] = mulmod(zpow[i - 1], z0, p);
            for (int j = 0; j <= D; ++j) {
                a[j] = mulmod(r1[j], zpow[D - j], p);
                b[j] = mulmod(r2[j], zpow[D - j], p);
            }
            u64 direct = prs_resultant(a, b, p);
            u64 horner = 0;
            for (u64 j = N + 1; j-- > 0;) horner = (mulmod(horner, z0, p) + r3[j]) % p;
            if (direct != horner) {
                cert.note = "guard prime rejected the reconstructed outer resultant";
                return false;
            }
        }
    }
    cert.primes_used = used;
    for (u64 j = 0; j < N; ++j)
        if (rec[j] != 0) {
            cert.note = "outer resultant has a nonzero coefficient below z^" + std::to_string(N);
            return false;
        }
    if (rec[N] == 0) {
        cert.note = "outer resultant reconstructed as zero";
        return false;
    }
    cert.exact_c = rec[N];
    cert.chain_power = (int)N;
    return true;
}

}  // namespace

Cond2Certificate certify_cond2(const TripleSystem& sys, CertifyMode mode, const RunLimits& lim) {
    Cond2Certificate cert;
    auto rng = seeded_rng(lim.seed, 0xC2);

    if (sys.F.is_zero()) {
        cert.status = CertStatus::SingularWithWitness;
        cert.witness = {mpz_class(1), mpz_class(0), mpz_class(0)};
        cert.note = "pencil determinant vanishes identically";
        return cert;
    }

    FrameMats frame;
    for (int m = 0; m < 3; ++m) frame.mats[m] = sys.Q[m].M;
    frame.T = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

    const int max_frames = 4;
    for (int fi = 0; fi < max_frames; ++fi) {
        TripleSystem cur = fi == 0 ? sys : TripleSystem::from_matrices(sys.k, frame.mats);
        std::array<IntPoly, 3> parts{cur.partial_F(0), cur.partial_F(1), cur.partial_F(2)};

        if (auto w = witness_hunt(parts, cur, rng)) {
            auto worig = apply_T(frame.T, *w);
            // normalize sign and content
            mpz_class g = gcd(gcd(worig[0], worig[1]), worig[2]);
            if (g > 1)
                for (auto& v : worig) v /= g;
            cert.status = CertStatus::SingularWithWitness;
            cert.witness = worig;
            cert.coordinate_changes = fi;
            return cert;
        }

        bool zok = z0_subcase_ok(cur.F, sys.k);
        if (zok) {
            if (mode == CertifyMode::ExactLong) {
                Cond2Certificate ecert = cert;
                if (exact_chain(cur, parts, rng, ecert)) {
                    ecert.status = CertStatus::CertifiedNonsingular;
                    ecert.z0_case_ok = true;
                    ecert.lead_coeffs_ok = true;
                    ecert.coordinate_changes = fi;
                    return ecert;
                }
                cert.note = ecert.note;
            } else {
                std::vector<u64> good;
                bool leads = true;
                int failures = 0;
                while ((int)good.size() < 3 && failures < 8) {
                    u64 p = random_30bit_prime(rng, good);
                    auto oc = chain_one_prime(sys.k, parts[0], parts[1], parts[2], p);
                    if (oc.ok && oc.lead_ok) {
                        good.push_back(p);
                    } else {
                        ++failures;
                        cert.note = oc.why;
                        if (!oc.lead_ok && oc.ok) cert.note = "leading coefficient check failed";
                    }
                }
                if ((int)good.size() == 3) {
                    cert.status = CertStatus::CertifiedNonsingular;
                    cert.primes_used = good;
                    cert.lead_coeffs_ok = leads;
                    cert.z0_case_ok = true;
                    cert.chain_power = (sys.k - 1) * (sys.k - 1) * (sys.k - 1) * (sys.k - 1);
                    cert.coordinate_changes = fi;
                    cert.note.clear();
                    return cert;
                }
            }
        } else if (cert.note.empty()) {
            cert.note = "z=0 subcase failed";
        }

        // try a new pencil coordinate frame
        for (int attempt = 0; attempt < 64; ++attempt) {
            auto T = random_unimodular(rng);
            // require det(Q1') != 0 in the new frame: F(first column of T) != 0
            IntPoly Fcur = fi == 0 ? sys.F : TripleSystem::from_matrices(sys.k, frame.mats).F;
            std::vector<mpz_class> col{mpz_class((long)T[0][0]), mpz_class((long)T[1][0]), mpz_class((long)T[2][0])};
            if (Fcur.eval(col) == 0) continue;
            std::array<std::vector<std::vector<i64>>, 3> nm;
            for (int i = 0; i < 3; ++i) {
                nm[i].assign(sys.k, std::vector<i64>(sys.k, 0));
                for (int r = 0; r < sys.k; ++r)
                    for (int c = 0; c < sys.k; ++c)
                        for (int j = 0; j < 3; ++j)
                            nm[i][r][c] += T[j][i] * frame.mats[j][r][c];
            }
            frame.mats = nm;
            frame.T = mat3_mul(frame.T, T);
            break;
        }
    }
    cert.status = CertStatus::Inconclusive;
    if (cert.note.empty()) cert.note = "certification chain failed in all coordinate frames";
    return cert;
}

}  // namespace triquad
