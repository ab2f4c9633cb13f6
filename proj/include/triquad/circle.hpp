#pragma once

#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "triquad/arch.hpp"
#include "triquad/common.hpp"
#include "triquad/quadsys.hpp"

namespace triquad {

using NKey = std::array<i64, 3>;

// Support-cube census of R_B(n) = sum_{Q(x)=n} w(x/B): weighted masses plus
// raw lattice counts, keyed by the value triple n.
struct RepTable {
    double B = 0;
    std::string weight;
    std::map<NKey, double> weighted;
    std::map<NKey, u64> counts;

    double total() const;  // = S(0)
    std::string to_json() const;
};

// S(alpha) = sum_x e(alpha . Q(x)) w(x/B) over the integer support cube.
cplx gen_sum(const TripleSystem& sys, const std::array<double, 3>& alpha, double B,
             const Weight& wgt, const RunLimits& lim = {});

RepTable count_reps(const TripleSystem& sys, double B, const Weight& wgt,
                    const RunLimits& lim = {});

// R_B(n) for selected targets only, in one sweep; order follows `ns`.
std::vector<double> count_targets(const TripleSystem& sys, double B, const Weight& wgt,
                                  const std::vector<NKey>& ns, const RunLimits& lim = {});

struct DftReport {
    std::array<int, 3> grid{};
    double spot_err = 0;      // max |grid sample - direct gen_sum| over random probes
    double parseval_rel = 0;  // relative gap of the discrete Parseval identity
    double recover_err = 0;   // max |inverse-transform bin - swept value|
    u64 bins = 0;
};

// Scatters the census onto the integer frequency box, transforms to uniform
// samples of S, and inverts; grids are the smallest powers of two covering
// the frequency support alias-free.  Grids beyond the memory cap are refused.
RepTable dft_recover(const TripleSystem& sys, double B, const Weight& wgt,
                     const RunLimits& lim = {}, DftReport* report = nullptr);

struct ArcSet {
    double Delta = 0, B = 0;
    u64 P = 0;           // moduli q = 1..P
    u64 boxes = 0;       // primitive centers a/q
    double width = 0;    // half-width B^(Delta-2)
    bool disjoint = false;
    double measure = 0;  // total volume, exact when disjoint
    double envelope = 0; // B^(7 Delta - 6) comparison scale
    std::string to_json() const;
};

// Major boxes around rationals a/q, q <= B^Delta, with pairwise-disjointness
// verified on the torus.  Requires 0 < Delta < 2/3.
ArcSet arcs(double Delta, double B, const RunLimits& lim = {});

struct ArcProbe {
    int L = 0;
    std::array<double, 3> phi{};
    double direct = 0;
    double poisson = 0;
    double rel_gap = 0;
    // lattice shift l (first 3 coords shown; full vector serialized) -> mass
    std::vector<std::pair<std::vector<i64>, double>> ledger;
    double shell_ratio = 0;  // outermost kept |l| shell / total ledger mass
    std::string to_json() const;
};

// Dual evaluation of sum_{L<=q<2L} sum_{(a,q)=1} int_{phi-region} |S(a/q+th)|^2:
// direct quadrature of the generating sum vs the lattice-shift expansion
// (B/q)^k sum_l S_q(a,l) I(B^2 th; B l / q).  Tiny parameters only.
ArcProbe minor_arc_probe(const TripleSystem& sys, double B, int L,
                         const std::array<double, 3>& phi, const Weight& wgt,
                         const RunLimits& lim = {});

struct SeriesResult {
    double value = 1.0;  // truncated Euler product of local densities
    double tail = 0;     // crude bound on the omitted primes
    std::vector<std::pair<u64, double>> sigma;
    bool soluble = true;       // no tested prime has an empty fiber
    bool lift_verified = true; // every p <= 20 carries a certified lift
    std::string note;
};
SeriesResult singular_series(const TripleSystem& sys, const NKey& n, u64 qmax,
                             const RunLimits& lim = {});

struct Prediction {
    NKey n{};
    double sseries = 0;
    double sseries_tail = 0;
    double sintegral = 0;
    double sintegral_err = 0;
    double value = 0;  // sseries * sintegral * B^(k-6)
    bool locally_soluble = true;
    bool lift_verified = true;
    std::vector<std::pair<u64, double>> sigma;
    std::string note;
    std::string to_json() const;
};

// Main-term forecast for R_B(n); needs k > 6.
Prediction predict(const TripleSystem& sys, const NKey& n, double B, u64 qmax, double R,
                   const Weight& wgt, const RunLimits& lim = {});

struct ScanRow {
    NKey n{};
    double R_B = 0;
    double prediction = 0;
    double sseries = 0;
    double sintegral = 0;
    double discrepancy = 0;  // (R_B - prediction) / B^(k-6)
    bool soluble = false;
    std::string to_json() const;
};

struct ScanReport {
    double B = 0;
    double threshold = 0;
    std::vector<ScanRow> rows;
    u64 predicted = 0;       // rows with a usable (soluble, nonzero) prediction
    double mean_square = 0;  // mean of (R_B - pred)^2 / B^(2k-12) over those rows
    double frac_exceeding = 0;
    std::string to_json() const;
};

ScanReport exception_scan(const TripleSystem& sys, double B, const NKey& lo, const NKey& hi,
                          double threshold, u64 qmax, double R, const Weight& wgt,
                          const RunLimits& lim = {});

// Q1 = I plus random symmetric Q2, Q3 with entries in [-2, 2], resampled until
// the fast modular certificate reports nonsingular.
TripleSystem random_certified_system(int k, u64 seed, int tries = 64,
                                     const RunLimits& lim = {});

// Bound-observatory batch over pinned fixtures; the JSON is comparable across
// releases via observatory_check.
std::string observatory_run(const RunLimits& lim = {});
bool observatory_check(const std::string& current_json, const std::string& baseline_json,
                       double slack, std::string* detail = nullptr);

}  // namespace triquad
