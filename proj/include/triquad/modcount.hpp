#pragma once

#include <gmpxx.h>

#include "triquad/quadsys.hpp"

namespace triquad {

// N(n; q): number of x in (Z/q)^k with Q_m(x) = n_m for all m.  Per prime
// power: direct enumeration while p^{ek} is affordable; above that, odd p
// falls back to the smooth-fiber lifting N(n;p^e) = p^{k-3} N(n;p^{e-1})
// (valid once every mod-p solution is a smooth point, certified by the
// incidence scan and n != 0 mod p) and, at e = 1, to the character route.
mpz_class count_N(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                  const RunLimits& lim = {});
// direct q^k sweep regardless of factorization (oracle for count_N)
mpz_class count_N_brute(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                        const RunLimits& lim = {});

// T(n; q) assembled from counts: multiplicative over prime powers, with
// T(n;p^e) = p^(3e) N(n;p^e) - p^(k+3(e-1)) N(n;p^(e-1)).
mpz_class T_from_counts(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
                        const RunLimits& lim = {});

// truncated local density p^(E(3-k)) N(n; p^E)
mpq_class sigma_p_truncated(const TripleSystem& sys, const std::array<i64, 3>& n, u64 p, int E,
                            const RunLimits& lim = {});

// --- single-form primitive-solution counting ---------------------------------

// Smallest alpha such that no primitive x mod p^alpha has both
// f(x) = 0 mod p^alpha and p^alpha | grad f(x). Throws if cap is exceeded.
int hensel_alpha(const IntPoly& f, u64 p, int cap = 12, const RunLimits& lim = {});

// #{x mod p^alpha : p !| x, p^beta || grad f(x), f(x) = 0 mod p^(alpha+beta)}
mpz_class hensel_M(const IntPoly& f, u64 p, int alpha, int beta, const RunLimits& lim = {});

// primitive solutions of f = 0 mod p^ell; lifting formula for ell >= 2*alpha-1,
// direct enumeration below
mpz_class hensel_count(const IntPoly& f, u64 p, int ell, const RunLimits& lim = {});
mpz_class count_primitive_brute(const IntPoly& f, u64 p, int ell, const RunLimits& lim = {});

// --- kernel counts ------------------------------------------------------------

// #{z in (Z/q)^k : A z = 0 mod q} via unimodular diagonalization
mpz_class kernel_count(std::vector<std::vector<mpz_class>> A, u64 q);

// Z(a, q) = #{z mod q : q | 2 (a.Q) z}
mpz_class Z_count(const TripleSystem& sys, const std::array<i64, 3>& a, u64 q);

// max over a mod p^e of Z(a,p^e) / gcd(F_Q(a), p^(ke)), with the canonical lift
mpq_class Z_gcd_max_ratio(const TripleSystem& sys, u64 p, int e,
                          std::array<i64, 3>* argmax = nullptr, const RunLimits& lim = {});

// #{x mod p^u : primitive, p^u | F_Q(x)}
mpz_class count_F_sublevel(const TripleSystem& sys, u64 p, int u, const RunLimits& lim = {});

// r(p^f) = #{x mod p^f : p^f | P(x)}, all residues (imprimitive included)
mpz_class sublevel_count(const IntPoly& P, u64 p, int f, const RunLimits& lim = {});

// True if some x mod p^E satisfies Q(x) = n mod p^E and the Jacobian at x has a
// 3x3 minor of p-valuation beta with E >= 2*beta + 1 (certifies a Z_p point).
bool lift_certified(const TripleSystem& sys, const std::array<i64, 3>& n, u64 p, int E,
                    const RunLimits& lim = {});

std::vector<std::pair<u64, int>> factorize_u64(u64 q);

}  // namespace triquad
