#include "triquad/circle.hpp"

#include "triquad/expsum.hpp"
#include "triquad/modcount.hpp"
#include "triquad/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <unordered_map>

#include <fftw3.h>
#include <gmpxx.h>

#include "json.hpp"

namespace triquad {

namespace {

using nlohmann::json;

// Largest |x_i| with w(x/B) possibly nonzero: the weight vanishes at |t| >= C.
i64 support_radius(const Weight& wgt, double B) {
    i64 X = (i64)std::ceil(wgt.C * B) - 1;
    return std::max<i64>(X, 0);
}

// Interval bound max |Q_m(x)| over the cube |x|_inf <= X.
i64 value_bound(const QuadForm& Q, i64 X) {
    i64 s = 0;
    for (const auto& row : Q.M)
        for (i64 e : row) s += std::llabs(e);
    return s * X * X;
}

constexpr i64 kPackOff = i64(1) << 20;

u64 pack_key(const NKey& n) {
    return ((u64)(n[0] + kPackOff) << 42) | ((u64)(n[1] + kPackOff) << 21) |
           (u64)(n[2] + kPackOff);
}

// Serpentine sweep of the support cube [-X, X]^k with incremental value and
// weight tracking.  One chunk per leading coordinate; chunk count is fixed by
// X, so reductions merged in chunk order do not depend on the worker count.
template <class PerPoint>
void box_sweep(const TripleSystem& sys, i64 X, const Weight& wgt, double B,
               const RunLimits& lim, bool serial, PerPoint&& per_point) {
    const int k = sys.k;
    if (k > 64) throw input_error("box_sweep: k too large");
    const i64 side = 2 * X + 1;
    Budget::charge(checked_pow_u64((u64)side, k), lim.force);

    const bool radial = wgt.kind == WeightKind::RadialBump;
    std::vector<double> rlut;
    std::vector<double> plut;  // shared per-axis table (same for every axis)
    if (radial) {
        rlut.resize((size_t)(k * X * X) + 1);
        for (size_t s = 0; s < rlut.size(); ++s)
            rlut[s] = wgt.radial_phi(double(s) / (B * B));
    } else {
        plut.resize((size_t)side);
        for (i64 x = -X; x <= X; ++x) plut[(size_t)(x + X)] = wgt.bump(double(x) / B);
    }

    auto run_slice = [&](int c) {
        std::vector<i64> x((size_t)k, -X);
        x[(size_t)(k - 1)] = c - X;
        i64 g[3][64];
        i64 v[3];
        for (int m = 0; m < 3; ++m) {
            const auto& M = sys.Q[m].M;
            for (int i = 0; i < k; ++i) {
                i64 acc = 0;
                for (int j = 0; j < k; ++j) acc += M[i][j] * x[(size_t)j];
                g[m][i] = acc;
            }
            v[m] = sys.Q[m].eval(x);
        }
        i64 s2 = 0;
        for (int i = 0; i < k; ++i) s2 += x[(size_t)i] * x[(size_t)i];
        std::vector<int> dir((size_t)std::max(0, k - 1), 1);
        for (;;) {
            double w;
            if (radial) {
                w = rlut[(size_t)s2];
            } else {
                w = 1.0;
                for (int i = 0; i < k; ++i) w *= plut[(size_t)(x[(size_t)i] + X)];
            }
            per_point(c, v, w);
            int d = 0;
            for (; d < k - 1; ++d) {
                i64 nd = x[(size_t)d] + dir[(size_t)d];
                if (nd > X || nd < -X) {
                    dir[(size_t)d] = -dir[(size_t)d];
                    continue;
                }
                i64 del = dir[(size_t)d];
                for (int m = 0; m < 3; ++m) {
                    const auto& M = sys.Q[m].M;
                    v[m] += 2 * del * g[m][d] + M[d][d];
                    for (int j = 0; j < k; ++j) g[m][j] += del * M[j][d];
                }
                s2 += 2 * del * x[(size_t)d] + 1;
                x[(size_t)d] = nd;
                break;
            }
            if (d == k - 1) break;
        }
    };
    parallel_chunks((int)side, serial ? 1 : lim.workers, run_slice);
}

std::string weight_id(const Weight& wgt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s:%g",
                  wgt.kind == WeightKind::RadialBump ? "radial" : "product", wgt.C);
    return buf;
}

json nkey_json(const NKey& n) { return json::array({n[0], n[1], n[2]}); }

}  // namespace

double RepTable::total() const {
    double t = 0;
    for (const auto& kv : weighted) t += kv.second;
    return t;
}

std::string RepTable::to_json() const {
    json j;
    j["B"] = B;
    j["weight"] = weight;
    json ent = json::array();
    for (const auto& kv : weighted) {
        json e;
        e["n"] = nkey_json(kv.first);
        e["w"] = kv.second;
        auto it = counts.find(kv.first);
        e["count"] = it == counts.end() ? 0 : it->second;
        ent.push_back(e);
    }
    j["entries"] = std::move(ent);
    return j.dump();
}

cplx gen_sum(const TripleSystem& sys, const std::array<double, 3>& alpha, double B,
             const Weight& wgt, const RunLimits& lim) {
    const i64 X = support_radius(wgt, B);
    std::vector<KahanC> acc((size_t)(2 * X + 1));
    box_sweep(sys, X, wgt, B, lim, false, [&](int c, const i64* v, double w) {
        if (w == 0.0) return;
        acc[(size_t)c].add(w * e2pi(alpha[0] * double(v[0]) + alpha[1] * double(v[1]) +
                                    alpha[2] * double(v[2])));
    });
    KahanC tot;
    for (const auto& a : acc) tot.add(a.value());
    return tot.value();
}

RepTable count_reps(const TripleSystem& sys, double B, const Weight& wgt,
                    const RunLimits& lim) {
    const i64 X = support_radius(wgt, B);
    const size_t nch = (size_t)(2 * X + 1);
    std::vector<std::map<NKey, double>> wmap(nch);
    std::vector<std::map<NKey, u64>> cmap(nch);
    box_sweep(sys, X, wgt, B, lim, false, [&](int c, const i64* v, double w) {
        if (w == 0.0) return;
        NKey n{v[0], v[1], v[2]};
        wmap[(size_t)c][n] += w;
        ++cmap[(size_t)c][n];
    });
    RepTable tab;
    tab.B = B;
    tab.weight = weight_id(wgt);
    for (size_t c = 0; c < nch; ++c) {
        for (const auto& kv : wmap[c]) tab.weighted[kv.first] += kv.second;
        for (const auto& kv : cmap[c]) tab.counts[kv.first] += kv.second;
    }
    return tab;
}

std::vector<double> count_targets(const TripleSystem& sys, double B, const Weight& wgt,
                                  const std::vector<NKey>& ns, const RunLimits& lim) {
    const i64 X = support_radius(wgt, B);
    for (int m = 0; m < 3; ++m)
        if (value_bound(sys.Q[m], X) >= kPackOff)
            throw input_error("count_targets: value range too wide to pack");
    std::unordered_map<u64, int> which;
    for (size_t i = 0; i < ns.size(); ++i) which.emplace(pack_key(ns[i]), (int)i);
    const size_t nch = (size_t)(2 * X + 1);
    std::vector<std::vector<double>> sum(nch, std::vector<double>(ns.size(), 0.0));
    std::vector<std::vector<double>> cmp(nch, std::vector<double>(ns.size(), 0.0));
    box_sweep(sys, X, wgt, B, lim, false, [&](int c, const i64* v, double w) {
        auto it = which.find(pack_key(NKey{v[0], v[1], v[2]}));
        if (it == which.end()) return;
        double& s = sum[(size_t)c][(size_t)it->second];
        double& e = cmp[(size_t)c][(size_t)it->second];
        double y = w - e, t = s + y;
        e = (t - s) - y;
        s = t;
    });
    std::vector<double> out(ns.size(), 0.0);
    for (size_t c = 0; c < nch; ++c)
        for (size_t i = 0; i < ns.size(); ++i) out[i] += sum[c][i];
    return out;
}

RepTable dft_recover(const TripleSystem& sys, double B, const Weight& wgt,
                     const RunLimits& lim, DftReport* report) {
    RepTable tab = count_reps(sys, B, wgt, lim);
    const i64 X = support_radius(wgt, B);
    i64 bnd[3];
    int G[3];
    u64 total = 1;
    for (int m = 0; m < 3; ++m) {
        bnd[m] = value_bound(sys.Q[m], X);
        G[m] = 2;
        while (G[m] < 2 * bnd[m] + 2) G[m] <<= 1;  // alias-free power-of-two grid
        total *= (u64)G[m];
    }
    if (total > (u64(1) << 25))
        throw input_error("dft_recover: frequency grid exceeds the in-memory cap");
    Budget::charge(2 * total, lim.force);

    fftw_complex* buf = fftw_alloc_complex(total);
    fftw_complex* freq = fftw_alloc_complex(total);
    if (!buf || !freq) {
        fftw_free(buf);
        fftw_free(freq);
        throw std::runtime_error("dft_recover: allocation failed");
    }
    std::memset(buf, 0, total * sizeof(fftw_complex));
    auto bin_of = [&](const NKey& n) {
        return ((u64)(n[0] + bnd[0]) * (u64)G[1] + (u64)(n[1] + bnd[1])) * (u64)G[2] +
               (u64)(n[2] + bnd[2]);
    };
    for (const auto& kv : tab.weighted) buf[bin_of(kv.first)][0] = kv.second;

    // freq[a] * e(-sum a_m b_m / G_m) = S(a_0/G_0, a_1/G_1, a_2/G_2)
    fftw_plan fwd = fftw_plan_dft_3d(G[0], G[1], G[2], buf, freq, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_execute(fwd);
    fftw_destroy_plan(fwd);

    DftReport rep;
    rep.grid = {G[0], G[1], G[2]};
    auto rng = seeded_rng(lim.seed, 17);
    for (int t = 0; t < 20; ++t) {
        u64 a0 = rng() % (u64)G[0], a1 = rng() % (u64)G[1], a2 = rng() % (u64)G[2];
        u64 idx = (a0 * (u64)G[1] + a1) * (u64)G[2] + a2;
        cplx samp = cplx(freq[idx][0], freq[idx][1]) *
                    e2pi(-(double(a0) * double(bnd[0]) / G[0] +
                           double(a1) * double(bnd[1]) / G[1] +
                           double(a2) * double(bnd[2]) / G[2]));
        cplx direct = gen_sum(
            sys, {double(a0) / G[0], double(a1) / G[1], double(a2) / G[2]}, B, wgt, lim);
        rep.spot_err = std::max(rep.spot_err, std::abs(samp - direct));
    }
    {
        KahanC lhs;
        for (u64 i = 0; i < total; ++i)
            lhs.add(freq[i][0] * freq[i][0] + freq[i][1] * freq[i][1], 0.0);
        double rhs = 0;
        for (const auto& kv : tab.weighted) rhs += kv.second * kv.second;
        double l = lhs.value().real() / double(total);
        rep.parseval_rel = std::abs(l - rhs) / std::max(rhs, 1e-300);
    }

    fftw_plan bwd = fftw_plan_dft_3d(G[0], G[1], G[2], freq, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(bwd);
    fftw_destroy_plan(bwd);

    RepTable rec;
    rec.B = B;
    rec.weight = tab.weight;
    rec.counts = tab.counts;
    const double scale = 1.0 / double(total);
    for (u64 i = 0; i < total; ++i) {
        double re = buf[i][0] * scale, im = buf[i][1] * scale;
        if (std::abs(re) + std::abs(im) <= 1e-9) continue;
        u64 r = i;
        i64 t2 = (i64)(r % (u64)G[2]);
        r /= (u64)G[2];
        i64 t1 = (i64)(r % (u64)G[1]);
        i64 t0 = (i64)(r / (u64)G[1]);
        rec.weighted[NKey{t0 - bnd[0], t1 - bnd[1], t2 - bnd[2]}] = re;
    }
    fftw_free(buf);
    fftw_free(freq);

    rep.bins = rec.weighted.size();
    for (const auto& kv : tab.weighted) {
        auto it = rec.weighted.find(kv.first);
        double rv = it == rec.weighted.end() ? 0.0 : it->second;
        rep.recover_err = std::max(rep.recover_err, std::abs(rv - kv.second));
    }
    for (const auto& kv : rec.weighted) {
        if (tab.weighted.count(kv.first)) continue;
        rep.recover_err = std::max(rep.recover_err, std::abs(kv.second));
    }
    if (report) *report = rep;
    return rec;
}

std::string ArcSet::to_json() const {
    json j;
    j["Delta"] = Delta;
    j["B"] = B;
    j["P"] = P;
    j["boxes"] = boxes;
    j["width"] = width;
    j["disjoint"] = disjoint;
    j["measure"] = measure;
    j["envelope"] = envelope;
    return j.dump();
}

ArcSet arcs(double Delta, double B, const RunLimits& lim) {
    (void)lim;
    if (!(Delta > 0.0) || !(Delta < 2.0 / 3.0))
        throw input_error("arcs: Delta must lie in (0, 2/3)");
    if (B < 2.0) throw input_error("arcs: B too small");
    ArcSet out;
    out.Delta = Delta;
    out.B = B;
    out.P = (u64)std::floor(std::pow(B, Delta));
    out.width = std::pow(B, Delta - 2.0);
    struct Center {
        double c[3];
    };
    std::vector<Center> cs;
    for (u64 q = 1; q <= out.P; ++q)
        for (u64 a0 = 0; a0 < q; ++a0)
            for (u64 a1 = 0; a1 < q; ++a1)
                for (u64 a2 = 0; a2 < q; ++a2) {
                    u64 g = std::gcd(std::gcd(a0, a1), std::gcd(a2, q));
                    if (g != 1) continue;
                    cs.push_back({{double(a0) / q, double(a1) / q, double(a2) / q}});
                    if (cs.size() > 5000)
                        throw input_error("arcs: too many boxes for the pairwise check");
                }
    out.boxes = cs.size();
    out.disjoint = true;
    const double sep = 2.0 * out.width;
    for (size_t i = 0; i < cs.size() && out.disjoint; ++i)
        for (size_t j = i + 1; j < cs.size(); ++j) {
            bool apart = false;
            for (int m = 0; m < 3; ++m) {
                double d = std::abs(cs[i].c[m] - cs[j].c[m]);
                d = std::min(d, 1.0 - d);
                if (d > sep - 1e-15) {
                    apart = true;
                    break;
                }
            }
            if (!apart) {
                out.disjoint = false;
                break;
            }
        }
    out.measure = double(out.boxes) * sep * sep * sep;
    out.envelope = std::pow(B, 7.0 * Delta - 6.0);
    return out;
}

std::string ArcProbe::to_json() const {
    json j;
    j["L"] = L;
    j["phi"] = json::array({phi[0], phi[1], phi[2]});
    j["direct"] = direct;
    j["poisson"] = poisson;
    j["rel_gap"] = rel_gap;
    j["shell_ratio"] = shell_ratio;
    json led = json::array();
    for (const auto& e : ledger) {
        json r;
        r["l"] = e.first;
        r["mass"] = e.second;
        led.push_back(r);
    }
    j["ledger"] = std::move(led);
    return j.dump();
}

ArcProbe minor_arc_probe(const TripleSystem& sys, double B, int L,
                         const std::array<double, 3>& phi, const Weight& wgt,
                         const RunLimits& lim) {
    const int k = sys.k;
    if (k > 5 || B > 6.0 || L < 1 || L > 3)
        throw input_error("minor_arc_probe is sized for k <= 5, B <= 6, L <= 3");
    if (wgt.kind != WeightKind::RadialBump)
        throw input_error("minor_arc_probe: Poisson side needs the radial weight kind");
    ArcProbe out;
    out.L = L;
    out.phi = phi;
    if (phi[0] <= 0 || phi[1] <= 0 || phi[2] <= 0) return out;

    const WeightTransform& wt = transform_cache(wgt.C);
    const i64 X = support_radius(wgt, B);
    int nG[3];
    for (int m = 0; m < 3; ++m) {
        double cycles = phi[m] * double(value_bound(sys.Q[m], X));
        nG[m] = std::min(24, 8 + 2 * (int)std::ceil(4.0 * cycles));
    }
    RunLimits inner = lim;
    inner.workers = 1;

    // centers a/q with (a, q) = 1, and the per-center lattice-shift tables
    struct Term {
        u64 q;
        std::array<i64, 3> a;
        std::vector<std::vector<i64>> ls;  // shifts l in Z^k
        std::vector<cplx> Sq;              // complete sums S_q(a, l)
        std::vector<std::vector<double>> lam;
    };
    std::vector<Term> terms;
    u64 work_direct = 0, work_poisson = 0;
    const u64 nodes_total = 8ull * (u64)nG[0] * nG[1] * nG[2];
    for (u64 q = (u64)L; q < 2ull * (u64)L; ++q) {
        // all shifts with |B l_i / q| below the oscillatory decay cutoff
        i64 lmax = (i64)std::floor(1.25 * double(q));
        std::vector<std::vector<i64>> ls;
        std::vector<i64> cur((size_t)k, -lmax);
        for (;;) {
            ls.push_back(cur);
            int d = 0;
            while (d < k && ++cur[(size_t)d] > lmax) cur[(size_t)d++] = -lmax;
            if (d == k) break;
        }
        for (i64 a0 = 0; a0 < (i64)q; ++a0)
            for (i64 a1 = 0; a1 < (i64)q; ++a1)
                for (i64 a2 = 0; a2 < (i64)q; ++a2) {
                    u64 g = std::gcd(std::gcd((u64)a0, (u64)a1), std::gcd((u64)a2, q));
                    if (g != 1) continue;
                    Term t;
                    t.q = q;
                    t.a = {a0, a1, a2};
                    t.ls = ls;
                    terms.push_back(std::move(t));
                    work_direct += nodes_total * checked_pow_u64((u64)(2 * X + 1), k);
                    work_poisson += nodes_total * (u64)ls.size() * 600;
                }
    }
    Budget::charge(work_direct + work_poisson, lim.force);

    // complete sums S_q(a, l) = sum_{r mod q} e((a.Q(r) + l.r) / q)
    for (auto& t : terms) {
        const u64 q = t.q;
        std::vector<std::vector<i64>> rs;
        std::vector<i64> r((size_t)k, 0);
        for (;;) {
            rs.push_back(r);
            int d = 0;
            while (d < k && ++r[(size_t)d] >= (i64)q) r[(size_t)d++] = 0;
            if (d == k) break;
        }
        std::vector<i64> base(rs.size());
        for (size_t i = 0; i < rs.size(); ++i) {
            auto v = sys.eval(rs[i]);
            i64 c = t.a[0] * v[0] + t.a[1] * v[1] + t.a[2] * v[2];
            base[i] = ((c % (i64)q) + (i64)q) % (i64)q;
        }
        t.Sq.resize(t.ls.size());
        t.lam.resize(t.ls.size());
        for (size_t li = 0; li < t.ls.size(); ++li) {
            KahanC acc;
            for (size_t i = 0; i < rs.size(); ++i) {
                i64 dot = base[i];
                for (int d = 0; d < k; ++d) dot += t.ls[li][(size_t)d] * rs[i][(size_t)d];
                acc.add(e2pi(double(((dot % (i64)q) + (i64)q) % (i64)q) / double(q)));
            }
            t.Sq[li] = acc.value();
            t.lam[li].resize((size_t)k);
            for (int d = 0; d < k; ++d)
                t.lam[li][(size_t)d] = B * double(t.ls[li][(size_t)d]) / double(q);
        }
    }

    // GL-12 panels per axis per sign box
    static const double kGl12X[12] = {
        -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
        -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
        0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
        0.7699026741943047,  0.9041172563704749,  0.9815606342467192};
    static const double kGl12W[12] = {
        0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
        0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
        0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
        0.1600783285433462, 0.1069393259953184, 0.0471753363865118};
    auto nodes_for = [&](int m, int sign, std::vector<double>& xs, std::vector<double>& ws) {
        double a = phi[m], b = 2.0 * phi[m];
        xs.clear();
        ws.clear();
        int pan = (nG[m] + 11) / 12;
        for (int p = 0; p < pan; ++p) {
            double pa = a + (b - a) * p / pan, pb = a + (b - a) * (p + 1) / pan;
            for (int i = 0; i < 12; ++i) {
                double t = 0.5 * (pa + pb) + 0.5 * (pb - pa) * kGl12X[i];
                xs.push_back(sign > 0 ? t : -t);
                ws.push_back(0.5 * (pb - pa) * kGl12W[i]);
            }
        }
    };

    std::vector<double> dsum(8, 0.0), psum(8, 0.0);
    std::vector<std::unordered_map<u64, double>> lmass(8);
    auto do_box = [&](int bx) {
        int s0 = (bx & 1) ? 1 : -1, s1 = (bx & 2) ? 1 : -1, s2 = (bx & 4) ? 1 : -1;
        std::vector<double> x0, w0, x1, w1, x2, w2;
        nodes_for(0, s0, x0, w0);
        nodes_for(1, s1, x1, w1);
        nodes_for(2, s2, x2, w2);
        KahanC dacc, pacc;
        for (size_t i0 = 0; i0 < x0.size(); ++i0)
            for (size_t i1 = 0; i1 < x1.size(); ++i1)
                for (size_t i2 = 0; i2 < x2.size(); ++i2) {
                    std::array<double, 3> th{x0[i0], x1[i1], x2[i2]};
                    double wq = w0[i0] * w1[i1] * w2[i2];
                    std::array<double, 3> nu{B * B * th[0], B * B * th[1], B * B * th[2]};
                    for (size_t ti = 0; ti < terms.size(); ++ti) {
                        const Term& t = terms[ti];
                        std::array<double, 3> al{double(t.a[0]) / t.q + th[0],
                                                 double(t.a[1]) / t.q + th[1],
                                                 double(t.a[2]) / t.q + th[2]};
                        cplx S = gen_sum(sys, al, B, wgt, inner);
                        dacc.add(wq * std::norm(S), 0.0);
                        std::vector<cplx> Iv = osc_I_many(sys, wt, nu, t.lam);
                        double fac = std::pow(B / double(t.q), k);
                        KahanC tsum;
                        for (size_t li = 0; li < t.lam.size(); ++li) {
                            cplx term = t.Sq[li] * Iv[li];
                            tsum.add(term);
                            double m = fac * wq * std::abs(term);
                            if (m > 0) {
                                u64 lk = 0;
                                for (int d = 0; d < k; ++d)
                                    lk = lk * 31 + (u64)(t.ls[li][(size_t)d] + 15);
                                lmass[(size_t)bx][lk] += m;
                            }
                        }
                        pacc.add(wq * std::norm(fac * tsum.value()), 0.0);
                    }
                }
        dsum[(size_t)bx] = dacc.value().real();
        psum[(size_t)bx] = pacc.value().real();
    };
    parallel_chunks(8, lim.workers, do_box);
    for (int b = 0; b < 8; ++b) {
        out.direct += dsum[(size_t)b];
        out.poisson += psum[(size_t)b];
    }
    out.rel_gap = std::abs(out.direct - out.poisson) / std::max(out.direct, 1e-300);

    // fold the per-box shift masses back onto the shift vectors
    std::map<std::vector<i64>, double> mass;
    {
        std::unordered_map<u64, std::vector<i64>> label;
        for (const auto& t : terms)
            for (const auto& l : t.ls) {
                u64 lk = 0;
                for (int d = 0; d < k; ++d) lk = lk * 31 + (u64)(l[(size_t)d] + 15);
                label[lk] = l;
            }
        for (int b = 0; b < 8; ++b)
            for (const auto& kv : lmass[(size_t)b]) {
                auto it = label.find(kv.first);
                if (it != label.end()) mass[it->second] += kv.second;
            }
    }
    double tot = 0, outer = 0;
    i64 lsup = 0;
    for (const auto& kv : mass) {
        tot += kv.second;
        i64 s = 0;
        for (i64 e : kv.first) s = std::max(s, std::llabs(e));
        lsup = std::max(lsup, s);
    }
    for (const auto& kv : mass) {
        i64 s = 0;
        for (i64 e : kv.first) s = std::max(s, std::llabs(e));
        if (s == lsup) outer += kv.second;
    }
    out.shell_ratio = tot > 0 ? outer / tot : 0.0;
    std::vector<std::pair<std::vector<i64>, double>> led(mass.begin(), mass.end());
    std::sort(led.begin(), led.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    if (led.size() > 64) led.resize(64);
    out.ledger = std::move(led);
    return out;
}

SeriesResult singular_series(const TripleSystem& sys, const NKey& n, u64 qmax,
                             const RunLimits& lim) {
    const int k = sys.k;
    SeriesResult res;
    for (u64 p = 2; p <= qmax; ++p) {
        if (!is_prime_u64(p)) continue;
        int E = std::max(1, (int)std::floor(std::log(2e7) / (k * std::log(double(p)))));
        double sp;
        if (p == 2 || E >= 2) {
            sp = sigma_p_truncated(sys, n, p, E, lim).get_d();
        } else {
            sp = count_N_char(sys, n, p).get_d() * std::pow(double(p), 3.0 - k);
        }
        res.sigma.emplace_back(p, sp);
        if (sp == 0.0) {
            res.soluble = false;
            res.note += "empty fiber at p=" + std::to_string(p) + "; ";
        }
        res.value *= sp;
        if (p <= 20 && res.soluble) {
            if (!lift_certified(sys, n, p, E, lim)) {
                res.lift_verified = false;
                res.note += "uncertified lift at p=" + std::to_string(p) + "; ";
            }
        }
    }
    if (!res.soluble) res.value = 0.0;
    res.tail = 8.0 * std::pow(double(qmax) + 1.0, 2.0 - 0.5 * k);
    return res;
}

std::string Prediction::to_json() const {
    json j;
    j["n"] = nkey_json(n);
    j["sseries"] = sseries;
    j["sseries_tail"] = sseries_tail;
    j["sintegral"] = sintegral;
    j["sintegral_err"] = sintegral_err;
    j["prediction"] = value;
    j["locally_soluble"] = locally_soluble;
    j["lift_verified"] = lift_verified;
    json sig = json::array();
    for (const auto& pv : sigma) sig.push_back(json::array({pv.first, pv.second}));
    j["sigma"] = std::move(sig);
    if (!note.empty()) j["note"] = note;
    return j.dump();
}

Prediction predict(const TripleSystem& sys, const NKey& n, double B, u64 qmax, double R,
                   const Weight& wgt, const RunLimits& lim) {
    if (sys.k <= 6) throw input_error("predict: main term needs k > 6");
    if (B <= 0) throw input_error("predict: B must be positive");
    Prediction out;
    out.n = n;
    SeriesResult sr = singular_series(sys, n, qmax, lim);
    out.sseries = sr.value;
    out.sseries_tail = sr.tail;
    out.locally_soluble = sr.soluble;
    out.lift_verified = sr.lift_verified;
    out.sigma = std::move(sr.sigma);
    out.note = sr.note;
    std::array<double, 3> mu{double(n[0]) / (B * B), double(n[1]) / (B * B),
                             double(n[2]) / (B * B)};
    SingularIntegral si = singular_integral(sys, mu, R, wgt, lim);
    out.sintegral = si.result.value.real();
    out.sintegral_err = si.result.est_error;
    out.value = out.sseries * out.sintegral * std::pow(B, double(sys.k) - 6.0);
    return out;
}

std::string ScanRow::to_json() const {
    json j;
    j["n"] = nkey_json(n);
    j["R_B"] = R_B;
    j["prediction"] = prediction;
    j["sseries"] = sseries;
    j["sintegral"] = sintegral;
    j["discrepancy"] = discrepancy;
    j["flags"] = json{{"soluble", soluble}};
    return j.dump();
}

std::string ScanReport::to_json() const {
    json j;
    j["B"] = B;
    j["threshold"] = threshold;
    j["rows"] = rows.size();
    j["predicted"] = predicted;
    j["mean_square"] = mean_square;
    j["frac_exceeding"] = frac_exceeding;
    return j.dump();
}

ScanReport exception_scan(const TripleSystem& sys, double B, const NKey& lo, const NKey& hi,
                          double threshold, u64 qmax, double R, const Weight& wgt,
                          const RunLimits& lim) {
    for (int m = 0; m < 3; ++m)
        if (lo[m] > hi[m]) throw input_error("exception_scan: empty window");
    u64 npts = 1;
    for (int m = 0; m < 3; ++m) npts *= (u64)(hi[m] - lo[m] + 1);
    if (npts > 512) throw input_error("exception_scan: window too large (cap 512)");

    std::vector<NKey> ns;
    for (i64 a = lo[0]; a <= hi[0]; ++a)
        for (i64 b = lo[1]; b <= hi[1]; ++b)
            for (i64 c = lo[2]; c <= hi[2]; ++c) ns.push_back(NKey{a, b, c});
    std::vector<double> truth = count_targets(sys, B, wgt, ns, lim);

    ScanReport rep;
    rep.B = B;
    rep.threshold = threshold;
    const double norm = std::pow(B, double(sys.k) - 6.0);
    double sq = 0;
    u64 exceed = 0;
    for (size_t i = 0; i < ns.size(); ++i) {
        Prediction pr = predict(sys, ns[i], B, qmax, R, wgt, lim);
        ScanRow row;
        row.n = ns[i];
        row.R_B = truth[i];
        row.prediction = pr.value;
        row.sseries = pr.sseries;
        row.sintegral = pr.sintegral;
        row.soluble = pr.locally_soluble;
        row.discrepancy = (truth[i] - pr.value) / norm;
        rep.rows.push_back(row);
        if (pr.locally_soluble && pr.value > 0) {
            ++rep.predicted;
            sq += row.discrepancy * row.discrepancy;
            if (std::abs(truth[i] - pr.value) > threshold * pr.value) ++exceed;
        }
    }
    if (rep.predicted) {
        rep.mean_square = sq / double(rep.predicted);
        rep.frac_exceeding = double(exceed) / double(rep.predicted);
    }
    return rep;
}

TripleSystem random_certified_system(int k, u64 seed, int tries, const RunLimits& lim) {
    auto rng = seeded_rng(seed, 99);
    std::uniform_int_distribution<int> d(-2, 2);
    for (int t = 0; t < tries; ++t) {
        std::array<std::vector<std::vector<i64>>, 3> M;
        for (int m = 0; m < 3; ++m)
            M[(size_t)m].assign((size_t)k, std::vector<i64>((size_t)k, 0));
        for (int i = 0; i < k; ++i) M[0][(size_t)i][(size_t)i] = 1;
        for (int m = 1; m < 3; ++m)
            for (int i = 0; i < k; ++i)
                for (int j = i; j < k; ++j) {
                    i64 e = d(rng);
                    M[(size_t)m][(size_t)i][(size_t)j] = e;
                    M[(size_t)m][(size_t)j][(size_t)i] = e;
                }
        TripleSystem sys = TripleSystem::from_matrices(k, M);
        Cond2Certificate cert = certify_cond2(sys, CertifyMode::FastModular, lim);
        if (cert.status == CertStatus::CertifiedNonsingular) return sys;
    }
    throw std::runtime_error("random_certified_system: no certified draw within budget");
}

namespace {

TripleSystem observatory_fixture() {
    std::array<std::vector<std::vector<i64>>, 3> M;
    M[0] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    M[1] = {{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 4}};
    M[2] = {{0, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}, {0, 0, 1, 0}};
    return TripleSystem::from_matrices(4, M);
}

}  // namespace

std::string observatory_run(const RunLimits& lim) {
    TripleSystem sys = observatory_fixture();
    json recs = json::array();
    auto push = [&](const ObsRecord& r) {
        json j;
        j["name"] = r.name;
        j["value"] = r.value;
        j["samples"] = r.samples;
        j["argmax"] = r.argmax;
        recs.push_back(j);
    };
    auto named = [&](ObsRecord r, const std::string& name) {
        r.name = name;
        push(r);
    };
    named(observe_corr_plain(sys, 3, 1, 40, lim), "corr_plain_p3_e1");
    named(observe_corr_plain(sys, 5, 1, 40, lim), "corr_plain_p5_e1");
    named(observe_corr_plain(sys, 3, 2, 16, lim), "corr_plain_p3_e2");
    named(observe_corr_refined(sys, 3, 1, 40, lim), "corr_refined_p3_e1");
    named(observe_corr_refined(sys, 5, 1, 40, lim), "corr_refined_p5_e1");
    named(observe_T(sys, 3, 1, 64, lim), "T_p3_e1");
    named(observe_T(sys, 3, 2, 32, lim), "T_p3_e2");
    named(observe_T(sys, 5, 1, 64, lim), "T_p5_e1");
    named(observe_T(sys, 7, 1, 48, lim), "T_p7_e1");
    named(observe_SqZ(sys, 3, lim), "SqZ_q3");
    named(observe_SqZ(sys, 4, lim), "SqZ_q4");
    named(observe_SqZ(sys, 5, lim), "SqZ_q5");
    for (u64 p : {3ull, 5ull})
        for (int e = 1; e <= 2; ++e) {
            ObsRecord r;
            r.name = "Zgcd_p" + std::to_string(p) + "_e" + std::to_string(e);
            std::array<i64, 3> am{};
            r.value = Z_gcd_max_ratio(sys, p, e, &am, lim).get_d();
            r.samples = checked_pow_u64(p, (u64)(3 * e));
            r.argmax = "a=(" + std::to_string(am[0]) + "," + std::to_string(am[1]) + "," +
                       std::to_string(am[2]) + ")";
            push(r);
        }
    json j;
    j["fixture"] = "k4-pinned";
    j["records"] = std::move(recs);
    return j.dump(2);
}

bool observatory_check(const std::string& current_json, const std::string& baseline_json,
                       double slack, std::string* detail) {
    json cur = json::parse(current_json);
    json base = json::parse(baseline_json);
    std::map<std::string, double> cv;
    for (const auto& r : cur["records"]) cv[r["name"]] = r["value"];
    bool ok = true;
    std::string why;
    for (const auto& r : base["records"]) {
        std::string name = r["name"];
        double bv = r["value"];
        auto it = cv.find(name);
        if (it == cv.end()) {
            ok = false;
            why += name + ": missing; ";
            continue;
        }
        if (!std::isfinite(it->second) || it->second > bv * slack + 1e-9) {
            ok = false;
            why += name + ": " + std::to_string(it->second) + " vs baseline " +
                   std::to_string(bv) + "; ";
        }
    }
    if (detail) *detail = why;
    return ok;
}

}  // namespace triquad
