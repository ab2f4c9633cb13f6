#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace triquad {

using i64 = long long;
using u64 = unsigned long long;
using cplx = std::complex<double>;

struct input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an enumeration would exceed the configured point-visit budget.
// CLI maps this to exit code 3.
struct budget_error : std::runtime_error {
    u64 estimate;
    explicit budget_error(u64 est)
        : std::runtime_error("enumeration of ~" + std::to_string(est) +
                             " points exceeds budget"),
          estimate(est) {}
};

class Budget {
  public:
    static constexpr u64 kDefault = u64(1) << 33;

    static u64 limit();
    static void set_limit(u64 v);
    // Call before a sweep of `est` point visits; throws budget_error unless forced.
    static void charge(u64 est, bool force = false);

  private:
    static std::atomic<u64>& limit_ref();
};

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return (u64)((unsigned __int128)a * b % m);
}

inline u64 powmod(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
        e >>= 1;
    }
    return r;
}

inline i64 egcd(i64 a, i64 b, i64& x, i64& y) {
    if (!b) { x = 1; y = 0; return a; }
    i64 x1, y1;
    i64 g = egcd(b, a % b, x1, y1);
    x = y1;
    y = x1 - (a / b) * y1;
    return g;
}

inline u64 invmod(u64 a, u64 m) {
    i64 x, y;
    i64 g = egcd(i64(a % m), i64(m), x, y);
    if (g != 1 && g != -1) throw input_error("invmod: not invertible");
    i64 r = x % i64(m);
    if (r < 0) r += i64(m);
    return u64(r);
}

inline bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while (!(d & 1)) { d >>= 1; ++s; }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool comp = true;
        for (int i = 1; i < s; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) { comp = false; break; }
        }
        if (comp) return false;
    }
    return true;
}

// Compensated complex accumulator; err tracks a crude absolute bound
// (terms * eps * max|term|) so integer-valued sums can be rounded safely.
struct KahanC {
    double re = 0, im = 0, cre = 0, cim = 0;
    double maxabs = 0;
    u64 terms = 0;

    void add(double x, double y) {
        double tr = x - cre, sr = re + tr;
        cre = (sr - re) - tr;
        re = sr;
        double ti = y - cim, si = im + ti;
        cim = (si - im) - ti;
        im = si;
        double a = std::abs(x) + std::abs(y);
        if (a > maxabs) maxabs = a;
        ++terms;
    }
    void add(cplx z) { add(z.real(), z.imag()); }
    cplx value() const { return {re, im}; }
    double err() const { return double(terms + 1) * 2.3e-16 * (maxabs + std::abs(re) + std::abs(im)); }
};

// e(t) = exp(2*pi*i*t)
inline cplx e2pi(double t) {
    double a = 6.283185307179586476925286766559 * t;
    return {std::cos(a), std::sin(a)};
}

struct RunLimits {
    int workers = 1;
    u64 seed = 0;
    bool force = false;
};

// Deterministic fan-out: results are combined in chunk index order regardless
// of scheduling, so outputs do not depend on the worker count.
void parallel_chunks(int nchunks, int workers, const std::function<void(int)>& fn);

std::mt19937_64 seeded_rng(u64 seed, u64 stream = 0);

}  // namespace triquad
