#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "triquad/poly.hpp"

using namespace triquad;

namespace {

const std::vector<std::string> XYZ{"x", "y", "z"};

IntPoly lin(long a, long b, long c) {
    IntPoly t(XYZ);
    t.add_term({1, 0, 0}, a);
    t.add_term({0, 1, 0}, b);
    t.add_term({0, 0, 1}, c);
    return t;
}

IntPoly mono(std::vector<int> e, long c) {
    IntPoly t(XYZ);
    t.add_term(e, c);
    return t;
}

}  // namespace

TEST_CASE("det_pencil identity 2x2") {
    std::vector<std::vector<std::vector<i64>>> mats{
        {{1, 0}, {0, 1}}, {{0, 0}, {0, 0}}, {{0, 0}, {0, 0}}};
    IntPoly F = det_pencil(mats, XYZ);
    CHECK(F == mono({2, 0, 0}, 1));
}

TEST_CASE("det_pencil rejects dimension mismatch") {
    std::vector<std::vector<std::vector<i64>>> mats{
        {{1, 0}, {0, 1}}, {{1}}, {{0, 0}, {0, 0}}};
    CHECK_THROWS_AS(det_pencil(mats, XYZ), input_error);
}

TEST_CASE("diagonal pencil determinant splits into four lines") {
    IntPoly want = lin(0, 1, 1) * lin(0, 1, 2) * lin(1, 1, 1) * lin(1, 0, 1);
    CHECK(testfix::sysB().F == want);
    // spot value at (1,1,0): (1)(1)(2)(1) = 2
    CHECK(want.eval({1, 1, 0}) == 2);
}

TEST_CASE("pencil determinant of the k=10 system at (1,0,0) is det Q1 = 1") {
    CHECK(testfix::sysA().F.eval({1, 0, 0}) == 1);
    CHECK(testfix::sysA().F.homogeneous());
    CHECK(testfix::sysA().F.degree() == 10);
}

TEST_CASE("partial derivative basics") {
    CHECK(partial(mono({2, 1, 0}, 1), "x") == mono({1, 1, 0}, 2));
    CHECK_THROWS_AS(partial(mono({1, 0, 0}, 1), "w"), input_error);
}

TEST_CASE("derivative commutes with expansion on a factored product") {
    IntPoly f1 = lin(0, 1, 1), f2 = lin(0, 1, 2), f3 = lin(1, 1, 1), f4 = lin(1, 0, 1);
    IntPoly expanded = f1 * f2 * f3 * f4;
    // product rule on the factored form
    IntPoly by_rule = partial(f1, "y") * f2 * f3 * f4 + f1 * partial(f2, "y") * f3 * f4 +
                      f1 * f2 * partial(f3, "y") * f4 + f1 * f2 * f3 * partial(f4, "y");
    CHECK(partial(expanded, "y") == by_rule);
}

TEST_CASE("Euler identity x Fx + y Fy + z Fz = k F") {
    for (const TripleSystem* s : {&testfix::sysB(), &testfix::k4()}) {
        IntPoly lhs = mono({1, 0, 0}, 1) * partial(s->F, "x") +
                      mono({0, 1, 0}, 1) * partial(s->F, "y") +
                      mono({0, 0, 1}, 1) * partial(s->F, "z");
        IntPoly rhs = IntPoly::constant(XYZ, s->k) * s->F;
        CHECK(lhs == rhs);
    }
}

TEST_CASE("homogeneity of pencil determinants under scaling") {
    const IntPoly& F = testfix::k4().F;
    for (long lam : {2, -3}) {
        for (auto [a, b, c] : {std::array<long, 3>{1, 2, 3}, {0, -1, 4}, {5, 1, -2}}) {
            mpz_class base = F.eval({a, b, c});
            mpz_class scaled = F.eval({lam * a, lam * b, lam * c});
            mpz_class pw;
            mpz_class lz(lam);
            mpz_pow_ui(pw.get_mpz_t(), lz.get_mpz_t(), 4);
            CHECK(scaled == pw * base);
        }
    }
}

TEST_CASE("resultant of two monic linear polynomials") {
    // Res_x(x - a, x - b) = a - b, working in variables x, a, b
    std::vector<std::string> V{"x", "a", "b"};
    IntPoly P(V), Q(V), want(V);
    P.add_term({1, 0, 0}, 1);
    P.add_term({0, 1, 0}, -1);
    Q.add_term({1, 0, 0}, 1);
    Q.add_term({0, 0, 1}, -1);
    want.add_term({0, 1, 0}, 1);
    want.add_term({0, 0, 1}, -1);
    CHECK(resultant(P, Q, "x") == want);
    CHECK_THROWS_AS(resultant(want, want, "x"), input_error);  // both constant in x
}

TEST_CASE("resultant specializes at points where leading coefficients survive") {
    // P, Q in x whose coefficients are polynomials in y
    IntPoly P = mono({2, 0, 0}, 1) + mono({1, 1, 0}, 3) + mono({0, 2, 0}, -1);
    IntPoly Q = mono({1, 1, 0}, 2) + mono({0, 0, 0}, 7) + mono({0, 2, 0}, 1);
    IntPoly R = resultant(P, Q, "x");
    std::vector<bool> keep{true, false, false};
    for (long y0 : {1, 2, -3, 5}) {
        IntPoly Ps = P.substitute(keep, {0, y0, 0});
        IntPoly Qs = Q.substitute(keep, {0, y0, 0});
        mpz_class direct = resultant(Ps, Qs, "x").eval({0});
        CHECK(R.eval({0, y0, 0}) == direct);
    }
}

TEST_CASE("resultant vanishes exactly where the inputs share a root") {
    // Res_x(x - y, x - 3) = +-(y - 3): zero iff y = 3
    IntPoly P = mono({1, 0, 0}, 1) + mono({0, 1, 0}, -1);
    IntPoly Q = mono({1, 0, 0}, 1) + mono({0, 0, 0}, -3);
    IntPoly R = resultant(P, Q, "x");
    CHECK(R.eval({0, 3, 0}) == 0);
    CHECK(R.eval({0, 4, 0}) != 0);
}

TEST_CASE("binary form resultant detects common projective roots") {
    // A = x*y, B = x^2 share the root (0 : 1)
    std::vector<mpz_class> A{0, 1, 0}, B{1, 0, 0};
    CHECK(binary_form_resultant(A, 2, B, 2) == 0);
    // A = x, B = y are coprime
    std::vector<mpz_class> C{1, 0}, D{0, 1};
    CHECK(binary_form_resultant(C, 1, D, 1) != 0);
}

TEST_CASE("evaluation with and without modulus") {
    IntPoly P = mono({2, 1, 0}, 1);  // x^2 y
    CHECK(P.eval({2, 3, 0}) == 12);
    CHECK(P.eval_mod({2, 3, 0}, 5) == 2);
    CHECK(P.eval_mod_u64({2, 3, 0}, 5) == 2);
}

TEST_CASE("content and exact division") {
    IntPoly P = mono({1, 0, 0}, 6) + mono({0, 1, 0}, 9);
    CHECK(P.content() == 3);
    IntPoly num = mono({2, 0, 0}, 1) + mono({0, 2, 0}, -1);
    IntPoly den = mono({1, 0, 0}, 1) + mono({0, 1, 0}, -1);
    IntPoly quo = mono({1, 0, 0}, 1) + mono({0, 1, 0}, 1);
    CHECK(num.divexact(den) == quo);
    CHECK_THROWS_AS(num.divexact(mono({0, 0, 1}, 1)), input_error);
}

TEST_CASE("bareiss determinant matches cofactor expansion") {
    IntPoly x = mono({1, 0, 0}, 1), y = mono({0, 1, 0}, 1), one = IntPoly::constant(XYZ, 1);
    std::vector<std::vector<IntPoly>> M{{x, y, one}, {one, x, y}, {y, one, x}};
    // det = x^3 + y^3 + 1 - 3xy
    IntPoly want = mono({3, 0, 0}, 1) + mono({0, 3, 0}, 1) + IntPoly::constant(XYZ, 1) +
                   mono({1, 1, 0}, -3);
    CHECK(bareiss_det(M) == want);
}

TEST_CASE("mod-p reduction keeps coefficients in range") {
    IntPoly P = mono({1, 0, 0}, -1) + mono({0, 1, 0}, 7);
    ModPoly Pm = ModPoly::reduce(P, 5);
    for (const auto& [e, c] : Pm.terms) CHECK(c < 5u);
    CHECK(Pm.eval({1, 0, 0}) == 4);
}

TEST_CASE("canonical text form is stable") {
    IntPoly P = mono({2, 0, 0}, 1) + mono({0, 1, 0}, -3) + IntPoly::constant(XYZ, 2);
    CHECK(P.to_string() == P.to_string());
    CHECK(P.to_string().find("x^2") != std::string::npos);
}

TEST_CASE("term bookkeeping never stores zeros and tracks degrees") {
    IntPoly P(XYZ);
    P.add_term({1, 0, 0}, 5);
    P.add_term({1, 0, 0}, -5);
    CHECK(P.is_zero());
    CHECK(P.degree() == -1);
    IntPoly Q = mono({2, 3, 0}, 1) + mono({0, 0, 1}, 1);
    CHECK(Q.degree() == 5);
    CHECK(Q.degree_in("y") == 3);
    CHECK(Q.valuation_in("z") == 0);
    CHECK_FALSE(Q.homogeneous());
}
