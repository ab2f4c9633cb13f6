#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "triquad/expsum.hpp"
#include "triquad/modcount.hpp"

using namespace triquad;
using testfix::k4;
using testfix::sysA;

namespace {

const std::vector<std::string> XYZ{"x", "y", "z"};

IntPoly sum_of_squares() {
    IntPoly f(XYZ);
    f.add_term({2, 0, 0}, 1);
    f.add_term({0, 2, 0}, 1);
    f.add_term({0, 0, 2}, 1);
    return f;
}

mpz_class Z_count_brute(const TripleSystem& sys, const std::array<i64, 3>& a, u64 q) {
    auto M = pencil_matrix(sys, {a[0], a[1], a[2]});
    std::vector<i64> z(sys.k, 0);
    u64 cnt = 0;
    for (;;) {
        bool ok = true;
        for (int i = 0; i < sys.k && ok; ++i) {
            i64 acc = 0;
            for (int j = 0; j < sys.k; ++j) acc += 2 * M[i][j] * z[j];
            ok = acc % (i64)q == 0;
        }
        if (ok) ++cnt;
        int d = sys.k - 1;
        while (d >= 0 && z[d] + 1 == (i64)q) z[d--] = 0;
        if (d < 0) break;
        ++z[d];
    }
    return mpz_class((unsigned long)cnt);
}

}  // namespace

TEST_CASE("count basics") {
    CHECK(count_N(k4(), {0, 0, 0}, 1) == 1);
    // 16-point check against an inline enumeration at q = 2
    mpz_class direct = 0;
    for (i64 x0 : {0, 1})
        for (i64 x1 : {0, 1})
            for (i64 x2 : {0, 1})
                for (i64 x3 : {0, 1}) {
                    auto v = k4().eval({x0, x1, x2, x3});
                    if (v[0] % 2 == 0 && v[1] % 2 == 0 && v[2] % 2 == 0) ++direct;
                }
    CHECK(count_N(k4(), {0, 0, 0}, 2) == direct);
}

TEST_CASE("count is multiplicative across coprime moduli") {
    for (auto [q1, q2] : {std::pair<u64, u64>{2, 3}, {4, 3}, {8, 5}, {7, 8}, {9, 8}}) {
        for (const std::array<i64, 3>& n :
             {std::array<i64, 3>{0, 0, 0}, {1, 2, 3}, {-1, 4, 2}}) {
            // one direct sweep modulo the product: no CRT shortcut on the left
            CHECK(count_N_brute(k4(), n, q1 * q2) ==
                  count_N(k4(), n, q1) * count_N(k4(), n, q2));
        }
    }
}

TEST_CASE("enumeration and character route agree on the k=10 system") {
    for (u64 p : {3, 5}) {
        for (const std::array<i64, 3>& n :
             {std::array<i64, 3>{0, 0, 0}, {1, 1, 1}, {2, 1, 0}}) {
            CHECK(count_N_brute(sysA(), n, p) == count_N_char(sysA(), n, p));
        }
    }
}

TEST_CASE("smooth-fiber lifting matches enumeration where both run") {
    // p^{k-3} scaling from level 1 to level 2, checked against the 3^20-free
    // route: k=4 keeps the brute side tiny
    for (u64 p : {3, 5}) {
        std::array<i64, 3> n{1, 2, 1};
        auto pc = classify_prime(k4(), p, n, 1);
        if (pc.kind != PrimeKind::GoodTypeI) continue;
        bool n_unit = n[0] % (i64)p || n[1] % (i64)p || n[2] % (i64)p;
        if (!n_unit) continue;
        mpz_class lvl1 = count_N_brute(k4(), n, p);
        mpz_class lvl2 = count_N_brute(k4(), n, p * p);
        mpz_class pz((unsigned long)p);
        CHECK(lvl2 == pz * lvl1);  // p^{k-3} = p for k = 4
    }
}

TEST_CASE("budget guard refuses runaway enumerations") {
    CHECK_THROWS_AS(count_N_brute(k4(), {0, 0, 0}, 1009), budget_error);
}

TEST_CASE("hensel count equals brute force on the k=10 pencil determinant") {
    for (int ell : {1, 2, 3}) {
        CHECK(hensel_count(sysA().F, 3, ell) == count_primitive_brute(sysA().F, 3, ell));
    }
    CHECK(hensel_count(sysA().F, 5, 2) == count_primitive_brute(sysA().F, 5, 2));
}

TEST_CASE("hensel count on a smooth quadric") {
    IntPoly f = sum_of_squares();
    CHECK(hensel_alpha(f, 5) == 1);
    for (int ell : {1, 2, 3})
        CHECK(hensel_count(f, 5, ell) == count_primitive_brute(f, 5, ell));
    // p = 5, r = 3: plain mod-p count has the p^{r-1} + O(p^{r/2}) shape
    double N1 = hensel_count(f, 5, 1).get_d();
    CHECK(std::abs(N1 - 25.0) <= 3.0 * std::sqrt(125.0));
}

TEST_CASE("alpha search reports degenerate forms instead of looping") {
    // (x + y + z)^2 has vanishing discriminant: every level keeps singular
    // primitive solutions, so the search must hit its cap and say so
    IntPoly l(XYZ);
    l.add_term({1, 0, 0}, 1);
    l.add_term({0, 1, 0}, 1);
    l.add_term({0, 0, 1}, 1);
    CHECK_THROWS(hensel_alpha(l * l, 3, 4));
}

TEST_CASE("kernel counts match brute force") {
    // all a mod 3 on the k=10 system, plus invertible spot checks
    for (i64 a1 = 0; a1 < 3; ++a1)
        for (i64 a2 = 0; a2 < 3; ++a2)
            for (i64 a3 = 0; a3 < 3; ++a3) {
                std::array<i64, 3> a{a1, a2, a3};
                CHECK(Z_count(sysA(), a, 3) == Z_count_brute(sysA(), a, 3));
            }
    CHECK(Z_count(sysA(), {1, 0, 0}, 3) == 1);   // identity block is invertible
    CHECK(Z_count(k4(), {1, 0, 0}, 2) == 16);    // factor 2 kills every constraint
    for (i64 a1 = 0; a1 < 2; ++a1)
        for (i64 a2 = 0; a2 < 2; ++a2) CHECK(Z_count(k4(), {a1, a2, 1}, 2) == 16);
}

TEST_CASE("kernel-to-gcd ratio is exactly one on the k=10 system") {
    CHECK(Z_gcd_max_ratio(sysA(), 3, 1) == 1);
    CHECK(Z_gcd_max_ratio(sysA(), 3, 2) == 1);
    CHECK(Z_gcd_max_ratio(sysA(), 5, 1) == 1);
}

TEST_CASE("sublevel counts") {
    // P = x in two variables: p^{f(s-1)}
    std::vector<std::string> XY{"x", "y"};
    IntPoly P = IntPoly::variable(XY, "x");
    for (u64 p : {3, 5})
        for (int f : {0, 1, 2}) {
            mpz_class want, pz((unsigned long)p);
            mpz_pow_ui(want.get_mpz_t(), pz.get_mpz_t(), (unsigned long)f);
            CHECK(sublevel_count(P, p, f) == want);
        }
    // x^2 + y^2 mod 3^2 against an 81-point enumeration
    IntPoly C = IntPoly::variable(XY, "x") * IntPoly::variable(XY, "x") +
                IntPoly::variable(XY, "y") * IntPoly::variable(XY, "y");
    mpz_class direct = 0;
    for (i64 x = 0; x < 9; ++x)
        for (i64 y = 0; y < 9; ++y)
            if ((x * x + y * y) % 9 == 0) ++direct;
    CHECK(sublevel_count(C, 3, 2) == direct);
    // full count = primitive stratum + the single imprimitive point at level 1
    CHECK(sublevel_count(sysA().F, 3, 1) == count_F_sublevel(sysA(), 3, 1) + 1);
}

TEST_CASE("sublevel scaling stays bounded") {
    std::vector<std::string> XY{"x", "y"};
    IntPoly C = IntPoly::variable(XY, "x") * IntPoly::variable(XY, "x") +
                IntPoly::variable(XY, "y") * IntPoly::variable(XY, "y");
    for (u64 p : {3, 7}) {
        for (int f : {1, 2, 3}) {
            double r = sublevel_count(C, p, f).get_d();
            double ratio = r * std::pow(double(p), f / 2.0) / std::pow(double(p), 2.0 * f);
            CHECK(ratio <= 1.0);
        }
    }
}

TEST_CASE("lift certification finds smooth points and rejects empty fibers") {
    auto v = k4().eval({1, 0, 0, 0});
    std::array<i64, 3> n{v[0], v[1], v[2]};
    CHECK(lift_certified(k4(), n, 3, 1));
    // an n that is not hit mod 3 cannot be certified
    std::array<i64, 3> miss{0, 0, 0};
    bool found_miss = false;
    for (i64 a = 0; a < 3 && !found_miss; ++a)
        for (i64 b = 0; b < 3 && !found_miss; ++b)
            for (i64 c = 0; c < 3 && !found_miss; ++c)
                if (count_N_brute(k4(), {a, b, c}, 3) == 0) {
                    miss = {a, b, c};
                    found_miss = true;
                }
    if (found_miss) CHECK_FALSE(lift_certified(k4(), miss, 3, 1));
}
