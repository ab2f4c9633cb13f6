#pragma once

#include <array>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "triquad/common.hpp"
#include "triquad/quadsys.hpp"

namespace triquad {

// S_q(a; n) = sum_{x mod q} e_q(a.Q(x) - a.n), by direct lattice enumeration.
cplx S_q_brute(const TripleSystem& sys, const std::array<i64, 3>& a,
               const std::array<i64, 3>& n, u64 q, const RunLimits& lim = {});

// Joint distribution of (Q_1, Q_2, Q_3) mod q over x in [0,q)^k.
// Entry (r1*q + r2)*q + r3 holds #{x : Q_i(x) == r_i mod q}.
std::vector<u64> residue_histogram(const TripleSystem& sys, u64 q,
                                   const RunLimits& lim = {});

// All S_q(a; 0) at once, as the 3D character transform of the residue
// histogram.  Entry (a1*q + a2)*q + a3; multiply by e_q(-a.n) for general n.
std::vector<cplx> all_Sq(const TripleSystem& sys, u64 q,
                         const RunLimits& lim = {});

// sum_{ALL a mod q} S_q(a; n), rounded to an exact integer.  Throws
// std::runtime_error if the accumulated floating-point error makes the
// rounding unsafe.
mpz_class sum_all_Sq(const TripleSystem& sys, const std::array<i64, 3>& n,
                     u64 q, const RunLimits& lim = {});

// S_p(a; n) for odd prime p via congruence diagonalization of a.Q over F_p
// and the classical quadratic Gauss sum for each diagonal entry.
cplx S_p_gauss(const TripleSystem& sys, const std::array<i64, 3>& a,
               const std::array<i64, 3>& n, u64 p);

// N(n; p) for odd prime p recovered from the character side:
// p^{-3} sum_{a mod p} S_p(a; n), Gauss backend for a != 0.  The result is
// verified to round to an integer within the tracked error bound.
mpz_class count_N_char(const TripleSystem& sys, const std::array<i64, 3>& n,
                       u64 p, double* achieved_err = nullptr);

// T(n; q) = sum over primitive a (gcd(a1,a2,a3,q) = 1) of S_q(a; n),
// evaluated on the character side.  The counting route T_from_counts is the
// exact cross-check.
cplx T_direct(const TripleSystem& sys, const std::array<i64, 3>& n, u64 q,
              const RunLimits& lim = {});

// ---- correlation sums --------------------------------------------------
//
// S(l; q) = sum_{a primitive mod q} sum_{r1, r2 mod q}
//             e_q(a.Q(r1) - a.Q(r2)) e_q(l1.r1 + l2.r2)
// with l = (l1, l2) in Z^{2k}.  Three routes:
//
//  * S_corr_brute: theta factorization U(a; l1) * conj(U(a; -l2)) with
//    U(a; l) = sum_r e_q(a.Q(r) + l.r); one lattice sweep total.
//  * S_corr: the substitution r1 = r2 + h collapses the r2-sum onto the
//    solution set of 2(a.Q)h == -l3 (mod q), l3 = l1 + l2, leaving
//      S(l; q) = q^k sum_a sum_{h : q | 2(a.Q)h + l3} e_q(a.Q(h) + l1.h).
//  * S_corr_counts: for odd prime powers the whole sum is an exact rational
//      S(l; p^e) = p^{ek} (p^e N2 - p^{e-1} N1) / phi(p^e),
//    where N1, N2 count pairs (b, w) mod p^e with b primitive,
//    (b.Q)w == -l4 (mod p^e), l4 = l1 - l2, and p^{e-1} | l3.w resp.
//    p^e | l3.w.

cplx S_corr_brute(const TripleSystem& sys, const std::vector<i64>& l1,
                  const std::vector<i64>& l2, u64 q,
                  const RunLimits& lim = {});

cplx S_corr(const TripleSystem& sys, const std::vector<i64>& l1,
            const std::vector<i64>& l2, u64 q, const RunLimits& lim = {});

mpq_class S_corr_counts(const TripleSystem& sys, const std::vector<i64>& l1,
                        const std::vector<i64>& l2, u64 p, int e,
                        const RunLimits& lim = {});

// Degeneracy counts entering the refined correlation bound.  With
// M(b; x, y) the (k+1)x(k+1) matrix [[b.Q, y], [x^T, 0]]:
//   f = #{b mod p : det M(b; l3, l4) == 0 in F_p}
//   g = #{b mod p : rank_{F_p} M(b; l3, l4) <= k-1}
struct CorrDegeneracy {
    u64 f = 0;
    u64 g = 0;
};
CorrDegeneracy corr_degeneracy(const TripleSystem& sys,
                               const std::vector<i64>& l1,
                               const std::vector<i64>& l2, u64 p);

// sum_{q <= qmax} sum_{l1, l2 in [-L,L]^k} |S(l; q)|, exact window mass.
// Shared work: one residue sweep per q feeds every shift class at once.
double corr_window_sum(const TripleSystem& sys, u64 qmax, i64 L,
                       const RunLimits& lim = {});

// ---- bound observatories -------------------------------------------------
// Each returns the maximal observed ratio |quantity| / envelope over a
// deterministic sample; the envelopes match the proved upper bounds with
// constant 1, so `value` IS the measured constant.

struct ObsRecord {
    std::string name;
    double value = 0.0;
    u64 samples = 0;
    std::string argmax;
};

// |S(l; p^e)| vs (ke+1) p^{e(k+3)}
ObsRecord observe_corr_plain(const TripleSystem& sys, u64 p, int e, int nl,
                             const RunLimits& lim = {});
// |S(l; p^e)| vs (ke+1) p^{e(k+3)} (p^{-1} + p^{-3} f + p^{-2} g)
ObsRecord observe_corr_refined(const TripleSystem& sys, u64 p, int e, int nl,
                               const RunLimits& lim = {});
// |T(n; p^e)| vs p^{e(3+k/2)}
ObsRecord observe_T(const TripleSystem& sys, u64 p, int e, int nn,
                    const RunLimits& lim = {});
// |S_q(a)|^2 vs q^k Z(a, q), over all a mod q
ObsRecord observe_SqZ(const TripleSystem& sys, u64 q,
                      const RunLimits& lim = {});

}  // namespace triquad
