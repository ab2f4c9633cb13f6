#pragma once

#include "triquad/quadsys.hpp"

namespace triquad {

inline u64 checked_pow_u64(u64 b, int e) {
    unsigned __int128 r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
        if (r > (unsigned __int128)1 << 62) return u64(1) << 62;  // saturate; trips the budget
    }
    return (u64)r;
}

// Visits every x in [0,q)^k in a reflected (serpentine) order so consecutive
// points differ in one coordinate by +-1; maintains the three form values
// incrementally. cb(v, x) gets the exact integer values v[m] = Q_m(x).
template <class CB>
void residue_sweep(const TripleSystem& sys, u64 q, CB&& cb, bool force = false) {
    const int k = sys.k;
    Budget::charge(checked_pow_u64(q, k), force);
    std::vector<i64> x(k, 0);
    std::vector<int> dir(k, +1);
    std::array<std::vector<i64>, 3> g;  // g[m] = M_m * x
    for (int m = 0; m < 3; ++m) g[m].assign(k, 0);
    i64 v[3] = {0, 0, 0};
    cb((const i64*)v, x.data());
    while (true) {
        int i = 0;
        while (i < k) {
            if (dir[i] > 0 ? x[i] + 1 < (i64)q : x[i] > 0) break;
            dir[i] = -dir[i];
            ++i;
        }
        if (i == k) return;
        i64 d = dir[i];
        for (int m = 0; m < 3; ++m)
            v[m] += d * 2 * g[m][i] + sys.Q[m].M[i][i];
        for (int m = 0; m < 3; ++m) {
            const auto& row = sys.Q[m].M[i];
            auto& gm = g[m];
            for (int j = 0; j < k; ++j) gm[j] += d * row[j];
        }
        x[i] += d;
        cb((const i64*)v, x.data());
    }
}

}  // namespace triquad
