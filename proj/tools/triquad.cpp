#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "triquad/arch.hpp"
#include "triquad/circle.hpp"
#include "triquad/expsum.hpp"
#include "triquad/modcount.hpp"
#include "triquad/poly.hpp"
#include "triquad/quadsys.hpp"

using nlohmann::json;
using namespace triquad;

namespace {

// JSON lines canonically; CSV as a flat projection for spreadsheet use.
struct Reporter {
    std::ofstream file;
    bool to_file = false;
    bool csv = false;
    bool wrote_header = false;

    std::ostream& os() { return to_file ? file : std::cout; }

    static std::string cell(const json& v) {
        std::string s = v.is_string() ? v.get<std::string>() : v.dump();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += "\"\"";
            else q += c;
        }
        return q + "\"";
    }

    void line(const json& j) {
        if (!csv) {
            os() << j.dump() << "\n";
            return;
        }
        if (!wrote_header) {
            bool first = true;
            for (auto& kv : j.items()) {
                os() << (first ? "" : ",") << kv.key();
                first = false;
            }
            os() << "\n";
            wrote_header = true;
        }
        bool first = true;
        for (auto& kv : j.items()) {
            os() << (first ? "" : ",") << cell(kv.value());
            first = false;
        }
        os() << "\n";
    }
};

struct Common {
    std::string system_path;
    u64 budget = 0;
    int workers = 1;
    u64 seed = 0;
    bool force = false;
    std::string out_path;
    std::string format = "json";
};

void add_common(CLI::App* cmd, Common& c, bool need_system) {
    auto* s = cmd->add_option("--system", c.system_path, "system JSON file {\"k\":..,\"Q\":[..]}");
    if (need_system) s->required()->check(CLI::ExistingFile);
    cmd->add_option("--budget", c.budget, "point-visit budget (default env TRIQUAD_BUDGET or 2^33)");
    cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", c.seed, "RNG seed (default 0, reproducible)");
    cmd->add_flag("--force", c.force, "run past the budget check");
    cmd->add_option("--out", c.out_path, "write the report here instead of stdout");
    cmd->add_option("--format", c.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

RunLimits limits_of(const Common& c) {
    if (c.budget) Budget::set_limit(c.budget);
    return RunLimits{c.workers, c.seed, c.force};
}

Reporter reporter_of(const Common& c) {
    Reporter r;
    r.csv = c.format == "csv";
    if (!c.out_path.empty()) {
        r.file.open(c.out_path);
        if (!r.file) throw input_error("cannot open output file " + c.out_path);
        r.to_file = true;
    }
    return r;
}

NKey to_nkey(const std::vector<i64>& v) {
    if (v.size() != 3) throw input_error("expected three comma-separated integers");
    return NKey{v[0], v[1], v[2]};
}

std::array<double, 3> to_d3(const std::vector<double>& v) {
    if (v.size() != 3) throw input_error("expected three comma-separated numbers");
    return {v[0], v[1], v[2]};
}

std::pair<i64, i64> parse_window(const std::string& w) {
    auto pos = w.find("..");
    if (pos == std::string::npos) throw input_error("window must be lo..hi");
    try {
        i64 lo = std::stoll(w.substr(0, pos));
        i64 hi = std::stoll(w.substr(pos + 2));
        return {lo, hi};
    } catch (const std::exception&) {
        throw input_error("window must be lo..hi with integer bounds");
    }
}

json family_json(const JFamily& fam) {
    json j;
    j["R"] = fam.R;
    j["J"] = fam.J;
    j["increments"] = fam.increment;
    j["imag_max"] = fam.imag_max;
    return j;
}

// ---- verify: cross-module invariant sweep ---------------------------------

TripleSystem fixture_diag() {
    std::array<std::vector<std::vector<i64>>, 3> M;
    M[0] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    M[1] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}};
    M[2] = {{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    return TripleSystem::from_matrices(4, M);
}

TripleSystem fixture_k4() {
    std::array<std::vector<std::vector<i64>>, 3> M;
    M[0] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    M[1] = {{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 4}};
    M[2] = {{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}};
    return TripleSystem::from_matrices(4, M);
}

int run_verify(const Common& c) {
    RunLimits lim = limits_of(c);
    Reporter rep = reporter_of(c);
    int failures = 0;
    auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        json j;
        j["check"] = name;
        j["ok"] = ok;
        j["detail"] = detail;
        rep.line(j);
        if (!ok) ++failures;
    };
    auto guard = [&](const std::string& name, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            check(name, false, std::string("exception: ") + e.what());
        }
    };

    guard("determinant_factors", [&] {
        TripleSystem d = fixture_diag();
        std::vector<std::string> V{"x", "y", "z"};
        auto L = [&](long a, long b, long cc) {
            IntPoly t(V);
            t.add_term({1, 0, 0}, a);
            t.add_term({0, 1, 0}, b);
            t.add_term({0, 0, 1}, cc);
            return t;
        };
        IntPoly want = L(0, 1, 1) * L(0, 1, 2) * L(1, 1, 1) * L(1, 0, 1);
        check("determinant_factors", d.F == want, "diagonal pencil determinant splits into linear forms");
    });

    guard("certify_singular_witness", [&] {
        auto cert = certify_cond2(fixture_diag(), CertifyMode::FastModular, lim);
        check("certify_singular_witness",
              cert.status == CertStatus::SingularWithWitness && cert.witness.has_value(),
              cert.note);
    });

    guard("fullsum_identity", [&] {
        TripleSystem s = fixture_k4();
        bool ok = true;
        std::string d;
        auto rng = seeded_rng(lim.seed, 5);
        for (u64 q = 2; q <= 6 && ok; ++q)
            for (int t = 0; t < 3 && ok; ++t) {
                NKey n{i64(rng() % (2 * q)) - i64(q), i64(rng() % (2 * q)) - i64(q),
                       i64(rng() % (2 * q)) - i64(q)};
                mpz_class lhs = sum_all_Sq(s, n, q, lim);
                mpz_class q3 = mpz_class((unsigned long)q);
                q3 = q3 * q3 * q3;
                mpz_class rhs = count_N(s, n, q, lim) * q3;
                if (lhs != rhs) {
                    ok = false;
                    d = "q=" + std::to_string(q);
                }
            }
        check("fullsum_identity", ok, ok ? "sum over all a equals q^3 N for q <= 6" : d);
    });

    guard("tsum_multiplicative", [&] {
        TripleSystem s = fixture_k4();
        NKey n{1, 2, 0};
        mpz_class t6 = T_from_counts(s, n, 6, lim);
        mpz_class t2 = T_from_counts(s, n, 2, lim);
        mpz_class t3 = T_from_counts(s, n, 3, lim);
        check("tsum_multiplicative", t6 == t2 * t3, "T(n;6) = T(n;2) T(n;3)");
    });

    guard("gauss_backend", [&] {
        TripleSystem s = fixture_k4();
        NKey n{0, 1, 2};
        double worst = 0;
        for (i64 a0 = 0; a0 < 5; ++a0)
            for (i64 a1 = 0; a1 < 5; ++a1)
                for (i64 a2 = 0; a2 < 5; ++a2) {
                    std::array<i64, 3> a{a0, a1, a2};
                    worst = std::max(worst,
                                     std::abs(S_p_gauss(s, a, n, 5) - S_q_brute(s, a, n, 5, lim)));
                }
        check("gauss_backend", worst <= 1e-8 * std::pow(5.0, 2.0),
              "max gap " + std::to_string(worst));
    });

    guard("hensel_vs_brute", [&] {
        std::vector<std::string> V{"x", "y", "z"};
        IntPoly f(V);
        f.add_term({2, 0, 0}, 1);
        f.add_term({0, 2, 0}, 1);
        f.add_term({0, 0, 2}, 1);
        bool ok = hensel_count(f, 3, 2, lim) == count_primitive_brute(f, 3, 2, lim);
        check("hensel_vs_brute", ok, "primitive solution counts mod 3^2");
    });

    guard("pencil_eigs_det_guard", [&] {
        TripleSystem s = fixture_k4();
        for (double a : {1.0, 0.3, -0.7})
            for (double b : {0.0, 0.5, -1.1}) pencil_eigs(s, {a, b, 1.0});
        check("pencil_eigs_det_guard", true, "eigenvalue product matches |det| on the grid");
    });

    guard("fejer_transform", [&] {
        double eps = 0.5;
        bool ok = true;
        for (double lam : {0.0, 0.2, 0.45}) {
            KahanC acc;
            double h = 1e-3;
            for (double th = -4000 * h; th <= 4000 * h; th += h) {
                double s = th == 0 ? 1.0 : std::sin(M_PI * eps * th) / (M_PI * eps * th);
                acc.add(h * s * s * e2pi(-lam * th));
            }
            double want = std::max(0.0, 1.0 - std::abs(lam) / eps) / eps;
            if (std::abs(acc.value().real() - want) > 2e-2 * (1 + want)) ok = false;
        }
        check("fejer_transform", ok, "kernel transform matches the tent profile");
    });

    guard("gen_sum_periodicity", [&] {
        TripleSystem s = fixture_k4();
        Weight w = Weight::radial(1.0);
        cplx s0 = gen_sum(s, {0, 0, 0}, 3.0, w, lim);
        cplx sa = gen_sum(s, {0.37, 0.21, -0.4}, 3.0, w, lim);
        cplx sb = gen_sum(s, {1.37, 0.21, -0.4}, 3.0, w, lim);
        bool ok = s0.real() > 0 && std::abs(sa - sb) <= 1e-9 * std::abs(s0);
        check("gen_sum_periodicity", ok, "S(alpha + e_1) = S(alpha)");
    });

    guard("dft_roundtrip", [&] {
        DftReport r;
        dft_recover(fixture_diag(), 3.0, Weight::radial(1.0), lim, &r);
        bool ok = r.recover_err <= 1e-6 && r.parseval_rel <= 1e-6 && r.spot_err <= 1e-6;
        check("dft_roundtrip",
              ok, "recover " + std::to_string(r.recover_err) + ", parseval " +
                      std::to_string(r.parseval_rel));
    });

    guard("arcs_disjoint", [&] {
        ArcSet a = arcs(0.1, 100.0, lim);
        check("arcs_disjoint", a.disjoint && a.boxes == 1,
              "P=" + std::to_string(a.P) + " boxes=" + std::to_string(a.boxes));
    });

    guard("jint_cross_route", [&] {
        TripleSystem s = random_certified_system(7, 1, 64, lim);
        const WeightTransform& wt = transform_cache(1.0);
        double fast = jint(s, wt, {0.2, 0.1, -0.1}, 1.0, lim);
        cplx direct = jint_direct(s, wt, {0.2, 0.1, -0.1}, 1.0, 2, lim);
        bool ok = std::abs(fast - direct.real()) <= 2e-2 * std::max(1.0, std::abs(fast));
        check("jint_cross_route", ok,
              "fast " + std::to_string(fast) + " direct " + std::to_string(direct.real()));
    });

    guard("observatory_baseline", [&] {
        std::string path = std::string(TRIQUAD_DATA_DIR) + "/observatory_baseline.json";
        std::ifstream in(path);
        if (!in) {
            check("observatory_baseline", true, "no baseline on disk, comparison skipped");
            return;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        std::string detail;
        bool ok = observatory_check(observatory_run(lim), ss.str(), 1.15, &detail);
        check("observatory_baseline", ok, ok ? "within 15% of baseline" : detail);
    });

    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"representations of integer triples by systems of three quadratic forms"};
    app.require_subcommand(1);

    Common c;
    int rc = 0;

    // certify
    auto* cmd_certify = app.add_subcommand("certify", "nonsingularity certificate for det pencil");
    std::string mode = "fast";
    add_common(cmd_certify, c, true);
    cmd_certify->add_option("--mode", mode, "fast | exact")->check(CLI::IsMember({"fast", "exact"}));
    cmd_certify->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        auto cert = certify_cond2(
            sys, mode == "exact" ? CertifyMode::ExactLong : CertifyMode::FastModular, lim);
        reporter_of(c).line(json::parse(cert.to_json()));
    });

    // classify
    auto* cmd_classify = app.add_subcommand("classify", "prime type (bad / Type I / Type II)");
    std::vector<i64> cl_n{0, 0, 0};
    u64 cl_p = 0;
    int cl_ext = 2;
    add_common(cmd_classify, c, true);
    cmd_classify->add_option("--p", cl_p, "prime")->required();
    cmd_classify->add_option("--n", cl_n, "target triple")->delimiter(',')->expected(3);
    cmd_classify->add_option("--ext", cl_ext, "field extension degree for the fiber scan");
    cmd_classify->callback([&] {
        RunLimits lim = limits_of(c);
        if (!is_prime_u64(cl_p)) throw input_error("--p must be prime");
        auto sys = TripleSystem::load_file(c.system_path);
        auto pc = classify_prime(sys, cl_p, to_nkey(cl_n), cl_ext, lim);
        reporter_of(c).line(json::parse(pc.to_json()));
    });

    // count
    auto* cmd_count = app.add_subcommand("count", "N(n; q) = solutions of Q(x) = n mod q");
    std::vector<i64> ct_n{0, 0, 0};
    u64 ct_q = 0;
    bool ct_brute = false;
    add_common(cmd_count, c, true);
    cmd_count->add_option("--q", ct_q, "modulus >= 1")->required();
    cmd_count->add_option("--n", ct_n, "target triple")->delimiter(',')->expected(3);
    cmd_count->add_flag("--brute", ct_brute, "force the direct q^k sweep");
    cmd_count->callback([&] {
        RunLimits lim = limits_of(c);
        if (ct_q == 0) throw input_error("--q must be at least 1");
        auto sys = TripleSystem::load_file(c.system_path);
        NKey n = to_nkey(ct_n);
        auto t0 = std::chrono::steady_clock::now();
        mpz_class N = ct_brute ? count_N_brute(sys, n, ct_q, lim) : count_N(sys, n, ct_q, lim);
        auto t1 = std::chrono::steady_clock::now();
        json j;
        j["q"] = ct_q;
        j["n"] = ct_n;
        j["value"] = N.get_str();
        j["method"] = ct_brute ? "enumerate" : "crt";
        // wall-clock field: excluded from the byte-identity contract
        j["elapsed_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        reporter_of(c).line(j);
    });

    // tsum
    auto* cmd_tsum = app.add_subcommand("tsum", "primitive character sum T(n; q)");
    std::vector<i64> ts_n{0, 0, 0};
    u64 ts_q = 0;
    std::string ts_route = "counting";
    add_common(cmd_tsum, c, true);
    cmd_tsum->add_option("--q", ts_q, "modulus >= 1")->required();
    cmd_tsum->add_option("--n", ts_n, "target triple")->delimiter(',')->expected(3);
    cmd_tsum->add_option("--route", ts_route, "counting | direct")
        ->check(CLI::IsMember({"counting", "direct"}));
    cmd_tsum->callback([&] {
        RunLimits lim = limits_of(c);
        if (ts_q == 0) throw input_error("--q must be at least 1");
        auto sys = TripleSystem::load_file(c.system_path);
        NKey n = to_nkey(ts_n);
        json j;
        j["q"] = ts_q;
        j["n"] = ts_n;
        j["route"] = ts_route;
        if (ts_route == "counting") {
            j["T"] = T_from_counts(sys, n, ts_q, lim).get_str();
        } else {
            cplx t = T_direct(sys, n, ts_q, lim);
            j["T_re"] = t.real();
            j["T_im"] = t.imag();
        }
        reporter_of(c).line(j);
    });

    // series
    auto* cmd_series = app.add_subcommand("series", "truncated singular series");
    std::vector<i64> se_n{0, 0, 0};
    u64 se_qmax = 60;
    add_common(cmd_series, c, true);
    cmd_series->add_option("--n", se_n, "target triple")->delimiter(',')->expected(3)->required();
    cmd_series->add_option("--qmax", se_qmax, "include primes up to qmax");
    cmd_series->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        SeriesResult sr = singular_series(sys, to_nkey(se_n), se_qmax, lim);
        json j;
        j["n"] = se_n;
        j["qmax"] = se_qmax;
        j["value"] = sr.value;
        j["tail"] = sr.tail;
        j["soluble"] = sr.soluble;
        j["lift_verified"] = sr.lift_verified;
        json sig = json::array();
        for (auto& pv : sr.sigma) sig.push_back(json::array({pv.first, pv.second}));
        j["sigma"] = std::move(sig);
        if (!sr.note.empty()) j["note"] = sr.note;
        reporter_of(c).line(j);
    });

    // jint
    auto* cmd_jint = app.add_subcommand("jint", "singular integral J_w(mu; R)");
    std::vector<double> ji_mu;
    double ji_R = 64.0, ji_eps = 1e-2, ji_C = 1.0;
    u64 ji_ndirs = 200000;
    bool ji_oracle = false;
    add_common(cmd_jint, c, true);
    cmd_jint->add_option("--mu", ji_mu, "target point")->delimiter(',')->expected(3)->required();
    cmd_jint->add_option("--R", ji_R, "truncation radius (dyadic family up to R)");
    cmd_jint->add_flag("--oracle", ji_oracle, "use the fiber-slice oracle instead");
    cmd_jint->add_option("--eps", ji_eps, "oracle window half-width");
    cmd_jint->add_option("--ndirs", ji_ndirs, "oracle direction count");
    cmd_jint->add_option("--C", ji_C, "weight support scale");
    cmd_jint->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        Weight w = Weight::radial(ji_C);
        json j;
        j["mu"] = ji_mu;
        if (ji_oracle) {
            QuadratureResult r =
                singular_integral_oracle(sys, to_d3(ji_mu), ji_eps, w, ji_ndirs, lim);
            j["eps"] = ji_eps;
            j["value"] = r.value.real();
            j["est_error"] = r.est_error;
            j["evaluations"] = r.evaluations;
            j["flagged"] = r.flagged;
        } else {
            SingularIntegral si = singular_integral(sys, to_d3(ji_mu), ji_R, w, lim);
            j["R"] = ji_R;
            j["value"] = si.result.value.real();
            j["est_error"] = si.result.est_error;
            j["flagged"] = si.result.flagged;
            j["family"] = family_json(si.family);
        }
        reporter_of(c).line(j);
    });

    // predict
    auto* cmd_predict = app.add_subcommand("predict", "main-term forecast for R_B(n)");
    std::vector<i64> pr_n;
    double pr_B = 0, pr_R = 32.0, pr_C = 1.0;
    u64 pr_qmax = 60;
    add_common(cmd_predict, c, true);
    cmd_predict->add_option("--n", pr_n, "target triple")->delimiter(',')->expected(3)->required();
    cmd_predict->add_option("--B", pr_B, "box scale")->required()->check(CLI::PositiveNumber);
    cmd_predict->add_option("--qmax", pr_qmax, "singular series cutoff");
    cmd_predict->add_option("--R", pr_R, "singular integral radius");
    cmd_predict->add_option("--C", pr_C, "weight support scale");
    cmd_predict->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        Prediction p = predict(sys, to_nkey(pr_n), pr_B, pr_qmax, pr_R, Weight::radial(pr_C), lim);
        reporter_of(c).line(json::parse(p.to_json()));
    });

    // scan
    auto* cmd_scan = app.add_subcommand("scan", "window census vs predictions");
    std::string sc_window;
    std::vector<i64> sc_lo, sc_hi;
    double sc_B = 0, sc_R = 16.0, sc_thresh = 0.5, sc_C = 1.0;
    u64 sc_qmax = 13;
    add_common(cmd_scan, c, true);
    cmd_scan->add_option("--window", sc_window, "lo..hi applied to every coordinate");
    cmd_scan->add_option("--lo", sc_lo, "window lower corner")->delimiter(',')->expected(3);
    cmd_scan->add_option("--hi", sc_hi, "window upper corner")->delimiter(',')->expected(3);
    cmd_scan->add_option("--B", sc_B, "box scale")->required()->check(CLI::PositiveNumber);
    cmd_scan->add_option("--qmax", sc_qmax, "singular series cutoff");
    cmd_scan->add_option("--R", sc_R, "singular integral radius");
    cmd_scan->add_option("--threshold", sc_thresh, "relative discrepancy flag level");
    cmd_scan->add_option("--C", sc_C, "weight support scale");
    cmd_scan->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        NKey lo, hi;
        if (!sc_window.empty()) {
            auto [l, h] = parse_window(sc_window);
            lo = {l, l, l};
            hi = {h, h, h};
        } else if (!sc_lo.empty() && !sc_hi.empty()) {
            lo = to_nkey(sc_lo);
            hi = to_nkey(sc_hi);
        } else {
            throw input_error("scan needs --window or --lo/--hi");
        }
        ScanReport r =
            exception_scan(sys, sc_B, lo, hi, sc_thresh, sc_qmax, sc_R, Weight::radial(sc_C), lim);
        Reporter rep = reporter_of(c);
        for (const auto& row : r.rows) rep.line(json::parse(row.to_json()));
        rep.line(json::parse(r.to_json()));
    });

    // probe
    auto* cmd_probe = app.add_subcommand("probe", "dual minor-arc probe (direct vs Poisson)");
    std::vector<double> pb_phi;
    double pb_B = 4.0, pb_phistar = 0.01, pb_C = 1.0;
    int pb_L = 1;
    add_common(cmd_probe, c, true);
    cmd_probe->add_option("--B", pb_B, "box scale");
    cmd_probe->add_option("--L", pb_L, "modulus range L <= q < 2L");
    cmd_probe->add_option("--phi", pb_phi, "per-axis phi")->delimiter(',')->expected(3);
    cmd_probe->add_option("--phistar", pb_phistar, "common phi for all axes");
    cmd_probe->add_option("--C", pb_C, "weight support scale");
    cmd_probe->callback([&] {
        RunLimits lim = limits_of(c);
        auto sys = TripleSystem::load_file(c.system_path);
        std::array<double, 3> phi =
            pb_phi.empty() ? std::array<double, 3>{pb_phistar, pb_phistar, pb_phistar}
                           : to_d3(pb_phi);
        ArcProbe p = minor_arc_probe(sys, pb_B, pb_L, phi, Weight::radial(pb_C), lim);
        reporter_of(c).line(json::parse(p.to_json()));
    });

    // verify
    auto* cmd_verify = app.add_subcommand("verify", "run the cross-module invariant suite");
    add_common(cmd_verify, c, false);
    cmd_verify->callback([&] { rc = run_verify(c); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const budget_error& e) {
        std::cerr << "budget exceeded: " << e.what()
                  << " (raise TRIQUAD_BUDGET / --budget or pass --force)\n";
        return 3;
    } catch (const input_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
