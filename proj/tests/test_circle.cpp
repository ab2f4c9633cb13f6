#include <cmath>
#include <complex>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "triquad/circle.hpp"
#include "triquad/expsum.hpp"
#include "triquad/modcount.hpp"

using namespace triquad;
using testfix::k4;
using testfix::sysA;
using testfix::sysB;

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// reference sweep over the support cube, |x_i| <= C B
cplx gen_sum_brute(const TripleSystem& sys, const std::array<double, 3>& alpha, double B,
                   const Weight& wgt) {
    int R = (int)std::floor(wgt.C * B);
    std::vector<i64> x(sys.k, -R);
    std::vector<double> xd(sys.k);
    KahanC acc;
    while (true) {
        for (int i = 0; i < sys.k; ++i) xd[i] = double(x[i]) / B;
        double w = wgt(xd);
        if (w != 0.0) {
            auto n = sys.eval(x);
            acc.add(w * e2pi(alpha[0] * double(n[0]) + alpha[1] * double(n[1]) +
                             alpha[2] * double(n[2])));
        }
        int i = 0;
        while (i < sys.k && ++x[i] > R) x[i++] = -R;
        if (i == sys.k) break;
    }
    return acc.value();
}

std::map<NKey, double> census_brute(const TripleSystem& sys, double B, const Weight& wgt) {
    int R = (int)std::floor(wgt.C * B);
    std::vector<i64> x(sys.k, -R);
    std::vector<double> xd(sys.k);
    std::map<NKey, double> out;
    while (true) {
        for (int i = 0; i < sys.k; ++i) xd[i] = double(x[i]) / B;
        double w = wgt(xd);
        if (w != 0.0) {
            auto n = sys.eval(x);
            out[NKey{n[0], n[1], n[2]}] += w;
        }
        int i = 0;
        while (i < sys.k && ++x[i] > R) x[i++] = -R;
        if (i == sys.k) break;
    }
    return out;
}

}  // namespace

TEST_CASE("generating sum: positivity, periodicity, brute oracle") {
    Weight wr = Weight::radial(1.0);
    TripleSystem sys = k4();
    double B = 3.0;
    cplx s0 = gen_sum(sys, {0, 0, 0}, B, wr);
    CHECK(s0.real() > 0.0);
    CHECK(std::abs(s0.imag()) < 1e-12 * s0.real());
    for (const std::array<double, 3>& a :
         {std::array<double, 3>{0.3, 0.1, -0.2}, {1.0 / 3, 0.25, 0.7}}) {
        cplx v = gen_sum(sys, a, B, wr);
        CHECK(std::abs(v - gen_sum_brute(sys, a, B, wr)) < 1e-9 * s0.real());
        cplx shifted = gen_sum(sys, {a[0] + 1.0, a[1], a[2]}, B, wr);
        CHECK(std::abs(v - shifted) < 1e-9 * s0.real());
    }
}

TEST_CASE("census: brute agreement, symmetry, key bounds, totals") {
    Weight wr = Weight::radial(1.0);
    TripleSystem sys = k4();
    double B = 3.0;
    RepTable t = count_reps(sys, B, wr);
    std::map<NKey, double> ref = census_brute(sys, B, wr);
    CHECK(t.weighted.size() == ref.size());
    for (auto& [n, w] : ref) {
        auto it = t.weighted.find(n);
        REQUIRE(it != t.weighted.end());
        CHECK(it->second == doctest::Approx(w).epsilon(1e-12));
    }
    i64 bound = 0;
    for (int m = 0; m < 3; ++m) bound = std::max(bound, (i64)std::llround(sys.norm() * B * B));
    for (auto& [n, w] : t.weighted) {
        CHECK(w >= 0.0);
        for (int m = 0; m < 3; ++m) CHECK(std::llabs(n[m]) <= sys.k * bound);
    }
    CHECK(t.total() == doctest::Approx(gen_sum(sys, {0, 0, 0}, B, wr).real()).epsilon(1e-12));
    // selected targets follow the request order; absent triples give zero
    NKey present = t.weighted.begin()->first;
    std::vector<double> picked = count_targets(sys, B, wr, {present, NKey{9999, 0, 0}});
    REQUIRE(picked.size() == 2);
    CHECK(picked[0] == doctest::Approx(t.weighted[present]).epsilon(1e-12));
    CHECK(picked[1] == 0.0);
    CHECK_THROWS_AS(count_reps(sys, 200.0, wr), budget_error);
}

TEST_CASE("frequency-grid inversion reproduces the census") {
    Weight wr = Weight::radial(1.0);
    for (const TripleSystem& sys : {sysB(), k4()}) {
        DftReport rep;
        RepTable rec = dft_recover(sys, 3.0, wr, {}, &rep);
        RepTable direct = count_reps(sys, 3.0, wr);
        for (int i = 0; i < 3; ++i) CHECK(power_of_two(rep.grid[i]));
        CHECK(rep.bins == direct.weighted.size());
        CHECK(rep.recover_err <= 1e-6);
        CHECK(rep.spot_err <= 1e-6);
        CHECK(rep.parseval_rel <= 1e-6);
        for (auto& [n, w] : direct.weighted) {
            if (w < 1e-9) continue;
            auto it = rec.weighted.find(n);
            REQUIRE(it != rec.weighted.end());
            CHECK(std::abs(it->second - w) <= 1e-6);
        }
        double tot = 0;
        for (auto& [n, w] : rec.weighted) tot += w;
        CHECK(tot == doctest::Approx(gen_sum(sys, {0, 0, 0}, 3.0, wr).real()).epsilon(1e-6));
    }
}

TEST_CASE("major boxes: counts, disjointness, measure scale") {
    ArcSet tiny = arcs(0.1, 100.0);
    CHECK(tiny.P == 1);
    CHECK(tiny.boxes == 1);
    CHECK(tiny.disjoint);
    ArcSet a = arcs(0.4, 100.0);
    CHECK(a.P == 6);
    // sum over q <= 6 of the primitive-triple counts q^3 prod_{p|q}(1-p^-3)
    CHECK(a.boxes == 1 + 7 + 26 + 56 + 124 + 182);
    CHECK(a.disjoint);
    CHECK(a.width == doctest::Approx(std::pow(100.0, 0.4 - 2.0)));
    double cube = std::pow(2.0 * a.width, 3.0);
    CHECK(a.measure == doctest::Approx(double(a.boxes) * cube).epsilon(1e-12));
    CHECK(a.envelope == doctest::Approx(std::pow(100.0, 7.0 * 0.4 - 6.0)));
    double ratio = a.measure / a.envelope;
    CHECK(ratio > 1e-3);
    CHECK(ratio < 1e3);
    CHECK_THROWS_AS(arcs(0.0, 100.0), input_error);
    CHECK_THROWS_AS(arcs(2.0 / 3.0, 100.0), input_error);
    CHECK_THROWS_AS(arcs(-0.2, 100.0), input_error);
    nlohmann::json j = nlohmann::json::parse(a.to_json());
    CHECK(j["boxes"].get<u64>() == a.boxes);
}

TEST_CASE("minor-window probe: dual routes, degenerate and scaling behaviour") {
    Weight wr = Weight::radial(1.0);
    TripleSystem sys = k4();
    ArcProbe zero = minor_arc_probe(sys, 4.0, 1, {0, 0, 0}, wr);
    CHECK(zero.direct == 0.0);
    CHECK(zero.poisson == 0.0);
    ArcProbe p1 = minor_arc_probe(sys, 4.0, 1, {0.01, 0.01, 0.01}, wr);
    CHECK(p1.direct > 0.0);
    CHECK(p1.rel_gap <= 0.05);
    CHECK(std::abs(p1.direct - p1.poisson) <= 0.05 * p1.direct);
    CHECK_FALSE(p1.ledger.empty());
    CHECK(p1.shell_ratio < 0.5);
    ArcProbe p2 = minor_arc_probe(sys, 4.0, 1, {0.02, 0.02, 0.02}, wr);
    CHECK(p2.direct >= p1.direct - 1e-12);
    // preconditions: tiny parameters and a radial weight only
    CHECK_THROWS_AS(minor_arc_probe(sys, 8.0, 1, {0.01, 0.01, 0.01}, wr), input_error);
    CHECK_THROWS_AS(minor_arc_probe(sys, 4.0, 0, {0.01, 0.01, 0.01}, wr), input_error);
    CHECK_THROWS_AS(minor_arc_probe(sys, 4.0, 4, {0.01, 0.01, 0.01}, wr), input_error);
    CHECK_THROWS_AS(minor_arc_probe(sys, 4.0, 1, {0.01, 0.01, 0.01}, Weight{}), input_error);
    CHECK_THROWS_AS(minor_arc_probe(sysA(), 4.0, 1, {0.01, 0.01, 0.01}, wr), input_error);
    // the q in [2,4) shell honestly exceeds the default budget
    CHECK_THROWS_AS(minor_arc_probe(sys, 4.0, 2, {0.01, 0.01, 0.01}, wr), budget_error);
}

TEST_CASE("local-density product: trivial, soluble and insoluble inputs") {
    SeriesResult one = singular_series(sysA(), {1, 1, 1}, 1);
    CHECK(one.value == 1.0);
    CHECK(one.sigma.empty());
    SeriesResult s = singular_series(sysA(), {1, 1, 1}, 60);
    CHECK(s.value > 0.0);
    CHECK(s.soluble);
    CHECK(s.lift_verified);
    CHECK(s.tail >= 0.0);
    REQUIRE_FALSE(s.sigma.empty());
    CHECK(s.sigma.front().first == 2);
    // small k is allowed but annotated
    SeriesResult warn = singular_series(k4(), {1, 1, 1}, 4);
    CHECK_FALSE(warn.note.empty());
    // hunt a residue class with an empty fiber; such a class certifies
    // insolubility and must zero the product
    bool found = false;
    for (u64 q : {3, 4, 5, 7, 8, 9}) {
        for (i64 a = 0; a < (i64)q && !found; ++a)
            for (i64 b = 0; b < (i64)q && !found; ++b)
                for (i64 c = 0; c < (i64)q && !found; ++c)
                    if (count_N(k4(), {a, b, c}, q) == 0) {
                        SeriesResult dead = singular_series(k4(), {a, b, c}, 16);
                        CHECK(dead.value == 0.0);
                        CHECK_FALSE(dead.soluble);
                        found = true;
                    }
        if (found) break;
    }
    CHECK(found);
}

TEST_CASE("forecast: consistency, solubility gates, real-image decay") {
    Weight wr = Weight::radial(1.0);
    CHECK_THROWS_AS(predict(k4(), {1, 1, 1}, 6.0, 8, 4.0, wr), input_error);
    Prediction p = predict(sysA(), {1, 1, 1}, 6.0, 20, 8.0, wr);
    CHECK(p.locally_soluble);
    CHECK(p.value > 0.0);
    CHECK(p.value ==
          doctest::Approx(p.sseries * p.sintegral * std::pow(6.0, 4.0)).epsilon(1e-12));
    CHECK_FALSE(p.sigma.empty());
    nlohmann::json j = nlohmann::json::parse(p.to_json());
    CHECK(j["n"].size() == 3);
    CHECK(j["value"].get<double>() == doctest::Approx(p.value));
    // Q2 is positive definite, so n2 < 0 lies outside the real image and the
    // fiber integral collapses even though every local fiber is full
    Prediction out = predict(sysA(), {36, -36, 36}, 6.0, 20, 8.0, wr);
    CHECK(std::abs(out.sintegral) < 5e-3);
    CHECK(std::abs(out.value) < 5e-3 * std::max(1.0, out.sseries) * std::pow(6.0, 4.0));
}

TEST_CASE("exception scan: empty window, serialization, sharpening with B") {
    Weight wr = Weight::radial(1.0);
    TripleSystem sys = random_certified_system(7, 5);
    ScanReport empty = exception_scan(sys, 6.0, {2, 2, 2}, {1, 1, 1}, 0.5, 8, 8.0, wr);
    CHECK(empty.rows.empty());
    CHECK(empty.predicted == 0);
    std::vector<double> x0(7, 0.0);
    x0[0] = 1.0;
    auto n0 = sys.eval(std::vector<i64>{1, 0, 0, 0, 0, 0, 0});
    NKey lo{n0[0] - 1, n0[1], n0[2]};
    NKey hi{n0[0] + 1, n0[1], n0[2]};
    ScanReport r6 = exception_scan(sys, 6.0, lo, hi, 0.5, 13, 16.0, wr);
    ScanReport r8 = exception_scan(sys, 8.0, lo, hi, 0.5, 13, 16.0, wr);
    REQUIRE(r6.rows.size() == 3);
    REQUIRE(r8.rows.size() == 3);
    CHECK(r6.predicted >= 1);
    for (auto& row : r6.rows) CHECK(row.R_B >= 0.0);
    CHECK(r8.mean_square < r6.mean_square);
    nlohmann::json j = nlohmann::json::parse(r8.to_json());
    CHECK(j["rows"].size() == 3);
    CHECK(j["B"].get<double>() == 8.0);
}

TEST_CASE("random certified systems pass the fast certificate") {
    TripleSystem sys = random_certified_system(5, 11);
    CHECK(sys.k == 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) CHECK(sys.Q[0].M[i][j] == (i == j ? 1 : 0));
    Cond2Certificate cert = certify_cond2(sys, CertifyMode::FastModular);
    CHECK(cert.status == CertStatus::CertifiedNonsingular);
}

TEST_CASE("observatory: self-consistent, regression-sensitive") {
    std::string cur = observatory_run();
    nlohmann::json j = nlohmann::json::parse(cur);
    CHECK(j["fixture"].get<std::string>() == "k4-pinned");
    REQUIRE(j["records"].size() > 0);
    for (auto& rec : j["records"]) {
        CHECK(std::isfinite(rec["value"].get<double>()));
        CHECK(rec["value"].get<double>() >= 0.0);
    }
    std::string detail;
    CHECK(observatory_check(cur, cur, 1.0 + 1e-12, &detail));
    nlohmann::json worse = j;
    worse["records"][0]["value"] = j["records"][0]["value"].get<double>() * 0.5;
    CHECK_FALSE(observatory_check(cur, worse.dump(), 1.0 + 1e-12, &detail));
    CHECK_FALSE(detail.empty());
}
