#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triquad/poly.hpp"

namespace triquad {

// Arithmetic context for F_q, q = p^ext (ext 1 or 2), realized for ext=2 as
// F_p[s]/(s^2 - nu) with nu the least quadratic non-residue mod p.
struct FqCtx {
    u64 p = 0;
    int ext = 1;
    u64 nu = 0;

    static FqCtx make(u64 p, int ext);
    u64 q() const { return ext == 2 ? p * p : p; }
};

struct Fq {
    u64 a = 0, b = 0;  // a + b*s
    bool operator==(const Fq&) const = default;
};

Fq fq_add(const FqCtx& C, Fq x, Fq y);
Fq fq_sub(const FqCtx& C, Fq x, Fq y);
Fq fq_mul(const FqCtx& C, Fq x, Fq y);
Fq fq_inv(const FqCtx& C, Fq x);
Fq fq_pow(const FqCtx& C, Fq x, u64 e);
bool fq_is_zero(Fq x);
bool fq_is_square(const FqCtx& C, Fq x);          // true for x = 0 as well
std::optional<Fq> fq_sqrt(const FqCtx& C, Fq x);  // deterministic
Fq fq_from_index(const FqCtx& C, u64 idx);        // idx = a + p*b enumeration order

struct QuadForm {
    int k = 0;
    std::vector<std::vector<i64>> M;  // symmetric integer matrix

    i64 eval(const std::vector<i64>& x) const;                 // x^t M x
    std::vector<i64> grad(const std::vector<i64>& x) const;    // 2 M x
    double norm() const;  // sup_{|x|=1} |Q(x)| = spectral radius
};

struct TripleSystem {
    int k = 0;
    std::array<QuadForm, 3> Q;

    // det(x*Q1 + y*Q2 + z*Q3) in variables x,y,z (computed on load)
    IntPoly F;

    static TripleSystem load(const std::string& json_text);
    static TripleSystem load_file(const std::string& path);
    static TripleSystem from_matrices(int k, std::array<std::vector<std::vector<i64>>, 3> mats);
    std::string to_json() const;

    std::array<i64, 3> eval(const std::vector<i64>& x) const;
    double norm() const;  // max_i ||Q_i||
    IntPoly partial_F(int axis) const;  // cached partials of F
};

enum class CertStatus { CertifiedNonsingular, SingularWithWitness, Inconclusive };

struct Cond2Certificate {
    CertStatus status = CertStatus::Inconclusive;
    std::optional<std::array<mpz_class, 3>> witness;  // projective common zero of all partials
    // evidence
    std::vector<u64> primes_used;
    bool lead_coeffs_ok = false;
    bool z0_case_ok = false;
    int coordinate_changes = 0;
    int chain_power = 0;             // expected (k-1)^4
    std::optional<mpz_class> exact_c;  // exact outer-resultant scalar (exact mode)
    std::string note;

    std::string to_json() const;
};

enum class PrimeKind { Bad, GoodTypeI, GoodTypeII };

struct FiberWitness {
    std::vector<Fq> x;       // affine fiber point over F_{p^ext}
    std::array<Fq, 3> lambda;  // pencil direction annihilating x
    int ext = 1;
    bool nullity_violation = false;  // null space of lambda.Q had dimension >= 2
};

struct PrimeClass {
    u64 p = 0;
    PrimeKind kind = PrimeKind::Bad;
    std::array<i64, 3> n{0, 0, 0};
    std::optional<FiberWitness> witness;       // Type II fiber witness
    std::optional<std::array<Fq, 3>> sing_pt;  // projective singular point of F mod p (Bad)
    int sing_ext = 0;
    bool reclassified = false;  // good-looking prime demoted by a nullity violation
    std::string to_json() const;
};

TripleSystem load_system(const std::string& json_text);

enum class CertifyMode { FastModular, ExactLong };

Cond2Certificate certify_cond2(const TripleSystem& sys, CertifyMode mode,
                               const RunLimits& lim = {});

enum class RankField { Rationals, Fp };

int rank_pencil(const TripleSystem& sys, const std::array<i64, 3>& lambda, RankField field,
                u64 p = 0);

// Enumerates projective lambda over F_{p^ext} with F(lambda)=0; for rank-(k-1)
// pencil elements, reports the first fiber point (by chart/index order) where
// the Jacobian criterion fails for Q(x)=n, if any.
std::optional<FiberWitness> singular_fiber_scan(const TripleSystem& sys,
                                                const std::array<i64, 3>& n, u64 p, int ext,
                                                const RunLimits& lim = {});

PrimeClass classify_prime(const TripleSystem& sys, u64 p, const std::array<i64, 3>& n,
                          int ext = 2, const RunLimits& lim = {});

// Searches P^2(F_p) and P^2(F_{p^2}) for a projective singular point of F mod p.
std::optional<std::pair<std::array<Fq, 3>, int>> find_singular_point_mod_p(const TripleSystem& sys,
                                                                           u64 p);

struct JacobianMinors {
    std::vector<i64> x;
    std::map<std::array<int, 3>, mpz_class> values;  // keyed by column triple i<j<l
};

JacobianMinors jacobian_minors(const TripleSystem& sys, const std::vector<i64>& x);

// Helpers shared with other modules.
std::vector<std::vector<i64>> pencil_matrix(const TripleSystem& sys, const std::array<i64, 3>& lam);

}  // namespace triquad
