#pragma once

#include <gmpxx.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "triquad/common.hpp"

namespace triquad {

// Graded-lexicographic term order on exponent vectors (total degree first).
struct GradedLex {
    bool operator()(const std::vector<int>& a, const std::vector<int>& b) const {
        int da = 0, db = 0;
        for (int e : a) da += e;
        for (int e : b) db += e;
        if (da != db) return da < db;
        return a < b;
    }
};

// Sparse multivariate polynomial over Z. Invariants: no zero coefficients
// stored; every exponent vector has length vars.size().
class IntPoly {
  public:
    using TermMap = std::map<std::vector<int>, mpz_class, GradedLex>;

    IntPoly() = default;
    explicit IntPoly(std::vector<std::string> vars) : vars_(std::move(vars)) {}

    static IntPoly constant(std::vector<std::string> vars, const mpz_class& c);
    static IntPoly variable(std::vector<std::string> vars, const std::string& v);

    const std::vector<std::string>& vars() const { return vars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;             // max total degree, -1 for zero poly
    int degree_in(const std::string& var) const;
    int valuation_in(const std::string& var) const;  // min exponent, 0 for zero poly
    bool homogeneous() const;

    void add_term(const std::vector<int>& exp, const mpz_class& c);

    IntPoly operator+(const IntPoly& o) const;
    IntPoly operator-(const IntPoly& o) const;
    IntPoly operator*(const IntPoly& o) const;
    IntPoly operator-() const;
    bool operator==(const IntPoly& o) const { return vars_ == o.vars_ && terms_ == o.terms_; }

    // Exact division; throws input_error if o does not divide *this.
    IntPoly divexact(const IntPoly& o) const;

    mpz_class content() const;  // gcd of coefficients (non-negative), 0 for zero poly
    mpz_class leading_coeff() const;  // graded-lex leading term's coefficient

    // Coefficient of var^j, as a polynomial in the same variable set.
    IntPoly coeff_of(const std::string& var, int j) const;

    mpz_class eval(const std::vector<mpz_class>& point) const;
    mpz_class eval_mod(const std::vector<mpz_class>& point, const mpz_class& modulus) const;
    u64 eval_mod_u64(const std::vector<u64>& point, u64 p) const;

    // Substitute point[i] for vars()[i] wherever keep[i] is false; the result
    // lives in the kept variables only.
    IntPoly substitute(const std::vector<bool>& keep, const std::vector<mpz_class>& point) const;

    std::string to_string() const;  // canonical: graded-lex descending, coef*x^a*y^b

  private:
    std::vector<std::string> vars_;
    TermMap terms_;
    int var_index(const std::string& v) const;
    friend IntPoly partial(const IntPoly&, const std::string&);
};

// Same shape as IntPoly with coefficients reduced into [0, p).
struct ModPoly {
    std::vector<std::string> vars;
    std::map<std::vector<int>, u64, GradedLex> terms;
    u64 p = 0;

    static ModPoly reduce(const IntPoly& P, u64 p);
    u64 eval(const std::vector<u64>& point) const;
    std::string to_string() const;
};

IntPoly partial(const IntPoly& P, const std::string& var);

// det(x*Q1 + y*Q2 + z*Q3) expanded, via fraction-free elimination.
IntPoly det_pencil(const std::vector<std::vector<std::vector<i64>>>& mats,
                   const std::vector<std::string>& vars);

// Sylvester resultant eliminating `var`; classical sign convention
// (deg Q rows of P's coefficients first, powers descending).
IntPoly resultant(const IntPoly& P, const IntPoly& Q, const std::string& var);

// Resultant of two binary forms given by full coefficient lists of formal
// degrees degA, degB (index i = coefficient of x^(deg-i) y^i). Detects
// common projective roots including those at infinity.
mpz_class binary_form_resultant(const std::vector<mpz_class>& A, int degA,
                                const std::vector<mpz_class>& B, int degB);

// Fraction-free determinant of a square IntPoly matrix.
IntPoly bareiss_det(std::vector<std::vector<IntPoly>> M);

}  // namespace triquad
