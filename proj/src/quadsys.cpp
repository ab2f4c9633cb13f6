#include "triquad/quadsys.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace triquad {

using nlohmann::json;

int fq_rank_nullvec(const FqCtx& C, std::vector<std::vector<Fq>> M, std::vector<Fq>* nullvec);

// ---------------------------------------------------------------------------
// F_q arithmetic

FqCtx FqCtx::make(u64 p, int ext) {
    if (p < 3 || !is_prime_u64(p)) throw input_error("field characteristic must be an odd prime");
    if (ext != 1 && ext != 2) throw input_error("field extension degree must be 1 or 2");
    FqCtx C;
    C.p = p;
    C.ext = ext;
    if (ext == 2) {
        for (u64 a = 2; a < p; ++a)
            if (powmod(a, (p - 1) / 2, p) == p - 1) {
                C.nu = a;
                break;
            }
    }
    return C;
}

Fq fq_add(const FqCtx& C, Fq x, Fq y) { return {(x.a + y.a) % C.p, (x.b + y.b) % C.p}; }

Fq fq_sub(const FqCtx& C, Fq x, Fq y) {
    return {(x.a + C.p - y.a) % C.p, (x.b + C.p - y.b) % C.p};
}

Fq fq_mul(const FqCtx& C, Fq x, Fq y) {
    if (C.ext == 1) return {mulmod(x.a, y.a, C.p), 0};
    u64 aa = mulmod(x.a, y.a, C.p);
    u64 bb = mulmod(x.b, y.b, C.p);
    u64 ab = mulmod(x.a, y.b, C.p);
    u64 ba = mulmod(x.b, y.a, C.p);
    return {(aa + mulmod(bb, C.nu, C.p)) % C.p, (ab + ba) % C.p};
}

bool fq_is_zero(Fq x) { return x.a == 0 && x.b == 0; }

Fq fq_pow(const FqCtx& C, Fq x, u64 e) {
    Fq r{1, 0};
    while (e) {
        if (e & 1) r = fq_mul(C, r, x);
        x = fq_mul(C, x, x);
        e >>= 1;
    }
    return r;
}

Fq fq_inv(const FqCtx& C, Fq x) {
    if (fq_is_zero(x)) throw input_error("division by zero in F_q");
    if (C.ext == 1) return {invmod(x.a, C.p), 0};
    // (a+bs)^-1 = (a-bs)/(a^2 - nu b^2)
    u64 nrm = (mulmod(x.a, x.a, C.p) + C.p - mulmod(mulmod(x.b, x.b, C.p), C.nu, C.p)) % C.p;
    u64 ninv = invmod(nrm, C.p);
    return {mulmod(x.a, ninv, C.p), mulmod((C.p - x.b) % C.p, ninv, C.p)};
}

bool fq_is_square(const FqCtx& C, Fq x) {
    if (fq_is_zero(x)) return true;
    Fq r = fq_pow(C, x, (C.q() - 1) / 2);
    return r == Fq{1, 0};
}

Fq fq_from_index(const FqCtx& C, u64 idx) { return {idx % C.p, idx / C.p}; }

std::optional<Fq> fq_sqrt(const FqCtx& C, Fq x) {
    if (fq_is_zero(x)) return Fq{0, 0};
    if (!fq_is_square(C, x)) return std::nullopt;
    u64 q = C.q();
    u64 m = q - 1;
    int e = 0;
    while (m % 2 == 0) {
        m /= 2;
        ++e;
    }
    // deterministic non-square: s itself when p = 1 mod 4 (ext 2), else scan
    Fq z{0, 0};
    if (C.ext == 2 && C.p % 4 == 1) {
        z = Fq{0, 1};
    } else {
        for (u64 idx = 2; idx < q; ++idx) {
            Fq cand = fq_from_index(C, idx);
            if (!fq_is_square(C, cand)) {
                z = cand;
                break;
            }
        }
    }
    // Tonelli-Shanks in the cyclic group F_q^*
    Fq c = fq_pow(C, z, m);
    Fq t = fq_pow(C, x, m);
    Fq r = fq_pow(C, x, (m + 1) / 2);
    int s = e;
    while (!(t == Fq{1, 0})) {
        Fq t2 = t;
        int i = 0;
        while (!(t2 == Fq{1, 0})) {
            t2 = fq_mul(C, t2, t2);
            ++i;
            if (i == s) return std::nullopt;
        }
        Fq b = c;
        for (int j = 0; j < s - i - 1; ++j) b = fq_mul(C, b, b);
        r = fq_mul(C, r, b);
        c = fq_mul(C, b, b);
        t = fq_mul(C, t, c);
        s = i;
    }
    if (!(fq_mul(C, r, r) == x)) return std::nullopt;
    return r;
}

// ---------------------------------------------------------------------------
// QuadForm / TripleSystem

i64 QuadForm::eval(const std::vector<i64>& x) const {
    i64 acc = 0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) acc += M[i][j] * x[i] * x[j];
    return acc;
}

std::vector<i64> QuadForm::grad(const std::vector<i64>& x) const {
    std::vector<i64> g(k, 0);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) g[i] += 2 * M[i][j] * x[j];
    return g;
}

double QuadForm::norm() const {
    Eigen::MatrixXd A(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) A(i, j) = double(M[i][j]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    double best = 0;
    for (int i = 0; i < k; ++i) best = std::max(best, std::abs(es.eigenvalues()[i]));
    return best;
}

namespace {

void validate_matrices(int k, const std::array<std::vector<std::vector<i64>>, 3>& mats) {
    if (k < 4) throw input_error("k: must be an integer >= 4");
    for (int m = 0; m < 3; ++m) {
        const auto& M = mats[m];
        std::string base = "Q[" + std::to_string(m) + "]";
        if ((int)M.size() != k) throw input_error(base + ": expected " + std::to_string(k) + " rows");
        for (int r = 0; r < k; ++r) {
            if ((int)M[r].size() != k)
                throw input_error(base + "[" + std::to_string(r) + "]: expected " +
                                  std::to_string(k) + " entries");
        }
        for (int r = 0; r < k; ++r)
            for (int c = 0; c < r; ++c)
                if (M[r][c] != M[c][r])
                    throw input_error(base + "[" + std::to_string(r) + "][" + std::to_string(c) +
                                      "]: matrix not symmetric");
    }
}

}  // namespace

TripleSystem TripleSystem::from_matrices(int k,
                                         std::array<std::vector<std::vector<i64>>, 3> mats) {
    validate_matrices(k, mats);
    TripleSystem sys;
    sys.k = k;
    for (int m = 0; m < 3; ++m) sys.Q[m] = QuadForm{k, mats[m]};
    sys.F = det_pencil({mats[0], mats[1], mats[2]}, {"x", "y", "z"});
    return sys;
}

TripleSystem TripleSystem::load(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw input_error(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw input_error("top level: expected an object");
    if (!j.contains("k") || !j["k"].is_number_integer())
        throw input_error("k: missing or not an integer");
    int k = j["k"].get<int>();
    if (!j.contains("Q") || !j["Q"].is_array() || j["Q"].size() != 3)
        throw input_error("Q: expected an array of 3 matrices");
    std::array<std::vector<std::vector<i64>>, 3> mats;
    for (int m = 0; m < 3; ++m) {
        const auto& jm = j["Q"][m];
        std::string base = "Q[" + std::to_string(m) + "]";
        if (!jm.is_array()) throw input_error(base + ": expected an array of rows");
        for (size_t r = 0; r < jm.size(); ++r) {
            const auto& jr = jm[r];
            std::string rbase = base + "[" + std::to_string(r) + "]";
            if (!jr.is_array()) throw input_error(rbase + ": expected an array");
            std::vector<i64> row;
            for (size_t c = 0; c < jr.size(); ++c) {
                if (!jr[c].is_number_integer())
                    throw input_error(rbase + "[" + std::to_string(c) + "]: expected an integer");
                row.push_back(jr[c].get<i64>());
            }
            mats[m].push_back(std::move(row));
        }
    }
    return from_matrices(k, std::move(mats));
}

TripleSystem TripleSystem::load_file(const std::string& path) {
    FILE* f = fopen(path.c_str(), "rb");
    if (!f) throw input_error("cannot open " + path);
    std::string text;
    char buf[4096];
    size_t got;
    while ((got = fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
    fclose(f);
    return load(text);
}

std::string TripleSystem::to_json() const {
    json j;
    j["k"] = k;
    j["Q"] = json::array();
    for (int m = 0; m < 3; ++m) {
        json jm = json::array();
        for (int r = 0; r < k; ++r) jm.push_back(Q[m].M[r]);
        j["Q"].push_back(jm);
    }
    return j.dump();
}

std::array<i64, 3> TripleSystem::eval(const std::vector<i64>& x) const {
    return {Q[0].eval(x), Q[1].eval(x), Q[2].eval(x)};
}

double TripleSystem::norm() const {
    return std::max({Q[0].norm(), Q[1].norm(), Q[2].norm()});
}

IntPoly TripleSystem::partial_F(int axis) const {
    static const char* names[3] = {"x", "y", "z"};
    return partial(F, names[axis]);
}

TripleSystem load_system(const std::string& json_text) { return TripleSystem::load(json_text); }

std::vector<std::vector<i64>> pencil_matrix(const TripleSystem& sys,
                                            const std::array<i64, 3>& lam) {
    std::vector<std::vector<i64>> M(sys.k, std::vector<i64>(sys.k, 0));
    for (int i = 0; i < sys.k; ++i)
        for (int j = 0; j < sys.k; ++j)
            M[i][j] = lam[0] * sys.Q[0].M[i][j] + lam[1] * sys.Q[1].M[i][j] +
                      lam[2] * sys.Q[2].M[i][j];
    return M;
}

// ---------------------------------------------------------------------------
// ranks

int rank_pencil(const TripleSystem& sys, const std::array<i64, 3>& lambda, RankField field,
                u64 p) {
    int k = sys.k;
    if (field == RankField::Rationals) {
        std::vector<std::vector<mpz_class>> M(k, std::vector<mpz_class>(k));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                M[i][j] = mpz_class((long)lambda[0]) * (long)sys.Q[0].M[i][j] +
                          mpz_class((long)lambda[1]) * (long)sys.Q[1].M[i][j] +
                          mpz_class((long)lambda[2]) * (long)sys.Q[2].M[i][j];
        // fraction-free elimination; rank = number of nonzero pivots
        int rank = 0;
        for (int col = 0; col < k && rank < k; ++col) {
            int piv = -1;
            for (int r = rank; r < k; ++r)
                if (M[r][col] != 0) {
                    piv = r;
                    break;
                }
            if (piv < 0) continue;
            std::swap(M[rank], M[piv]);
            for (int r = rank + 1; r < k; ++r) {
                if (M[r][col] == 0) continue;
                mpz_class f = M[r][col], g = M[rank][col];
                mpz_class d = gcd(f, g);
                mpz_class fr = f / d, gr = g / d;
                for (int c = col; c < k; ++c) M[r][c] = M[r][c] * gr - M[rank][c] * fr;
            }
            ++rank;
        }
        return rank;
    }
    if (p < 2) throw input_error("rank over F_p requires a prime p");
    FqCtx C = FqCtx::make(p, 1);
    std::vector<std::vector<Fq>> M(k, std::vector<Fq>(k));
    auto red = [&](i64 v) -> u64 {
        i64 r = v % (i64)p;
        if (r < 0) r += p;
        return (u64)r;
    };
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            u64 acc = 0;
            for (int m = 0; m < 3; ++m)
                acc = (acc + mulmod(red(lambda[m]), red(sys.Q[m].M[i][j]), p)) % p;
            M[i][j] = Fq{acc, 0};
        }
    return fq_rank_nullvec(C, std::move(M), nullptr);
}

// row-echelon rank; when nullity is exactly 1 and nullvec != nullptr, fills the
// kernel vector (normalized so its first nonzero coordinate is 1)
int fq_rank_nullvec(const FqCtx& C, std::vector<std::vector<Fq>> M, std::vector<Fq>* nullvec) {
    int k = (int)M.size();
    std::vector<int> pivot_col;
    int rank = 0;
    for (int col = 0; col < k && rank < k; ++col) {
        int piv = -1;
        for (int r = rank; r < k; ++r)
            if (!fq_is_zero(M[r][col])) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(M[rank], M[piv]);
        Fq inv = fq_inv(C, M[rank][col]);
        for (int c = col; c < k; ++c) M[rank][c] = fq_mul(C, M[rank][c], inv);
        for (int r = 0; r < k; ++r) {
            if (r == rank || fq_is_zero(M[r][col])) continue;
            Fq f = M[r][col];
            for (int c = col; c < k; ++c)
                M[r][c] = fq_sub(C, M[r][c], fq_mul(C, f, M[rank][c]));
        }
        pivot_col.push_back(col);
        ++rank;
    }
    if (nullvec && k - rank == 1) {
        std::vector<bool> is_pivot(k, false);
        for (int c : pivot_col) is_pivot[c] = true;
        int free_col = 0;
        while (is_pivot[free_col]) ++free_col;
        std::vector<Fq> x(k, Fq{0, 0});
        x[free_col] = Fq{1, 0};
        for (int r = 0; r < rank; ++r)
            x[pivot_col[r]] = fq_sub(C, Fq{0, 0}, M[r][free_col]);
        // normalize: first nonzero coordinate = 1
        for (int i = 0; i < k; ++i)
            if (!fq_is_zero(x[i])) {
                Fq inv = fq_inv(C, x[i]);
                for (int j = 0; j < k; ++j) x[j] = fq_mul(C, x[j], inv);
                break;
            }
        *nullvec = std::move(x);
    }
    return rank;
}

// ---------------------------------------------------------------------------
// chart enumeration over P^2(F_q)

namespace {

struct FqTerm {
    int ex, ey, ez;
    u64 c;
};

std::vector<FqTerm> reduce_poly(const IntPoly& P, u64 p) {
    std::vector<FqTerm> out;
    mpz_class pm(std::to_string(p));
    for (const auto& [e, c] : P.terms()) {
        mpz_class r = c % pm;
        if (r < 0) r += pm;
        u64 cv = r.get_ui();
        if (cv == 0) continue;
        out.push_back({e[0], e[1], e[2], cv});
    }
    return out;
}

Fq eval_terms(const FqCtx& C, const std::vector<FqTerm>& T, Fq X, Fq Y, Fq Z, int dmax) {
    std::vector<Fq> px(dmax + 1), py(dmax + 1), pz(dmax + 1);
    px[0] = py[0] = pz[0] = Fq{1, 0};
    for (int i = 1; i <= dmax; ++i) {
        px[i] = fq_mul(C, px[i - 1], X);
        py[i] = fq_mul(C, py[i - 1], Y);
        pz[i] = fq_mul(C, pz[i - 1], Z);
    }
    Fq acc{0, 0};
    for (const auto& t : T) {
        Fq v = fq_mul(C, fq_mul(C, px[t.ex], py[t.ey]), fq_mul(C, pz[t.ez], Fq{t.c, 0}));
        acc = fq_add(C, acc, v);
    }
    return acc;
}

// Enumerates projective points of P^2(F_q) in chart order
//   chart 0: (1 : b : c), chart 1: (0 : 1 : c), chart 2: (0 : 0 : 1)
// and calls cb(point, global_index) for every point where `primary` vanishes.
// Uses Horner in the last coordinate for the bulk chart.
template <class CB>
void enumerate_zeros(const FqCtx& C, const std::vector<FqTerm>& primary, CB&& cb) {
    u64 q = C.q();
    int dz = 0, dy = 0, deg = 0;
    for (const auto& t : primary) {
        dz = std::max(dz, t.ez);
        dy = std::max(dy, t.ey);
        deg = std::max(deg, t.ex + t.ey + t.ez);
    }
    // chart 0
    {
        std::vector<Fq> ypow(dy + 1), A(dz + 1);
        for (u64 ib = 0; ib < q; ++ib) {
            Fq b = fq_from_index(C, ib);
            ypow[0] = Fq{1, 0};
            for (int i = 1; i <= dy; ++i) ypow[i] = fq_mul(C, ypow[i - 1], b);
            std::fill(A.begin(), A.end(), Fq{0, 0});
            for (const auto& t : primary)
                A[t.ez] = fq_add(C, A[t.ez], fq_mul(C, Fq{t.c, 0}, ypow[t.ey]));
            for (u64 ic = 0; ic < q; ++ic) {
                Fq cv = fq_from_index(C, ic);
                Fq acc = A[dz];
                for (int j = dz - 1; j >= 0; --j) acc = fq_add(C, fq_mul(C, acc, cv), A[j]);
                if (fq_is_zero(acc)) cb(std::array<Fq, 3>{Fq{1, 0}, b, cv}, ib * q + ic);
            }
        }
    }
    // chart 1
    {
        std::vector<Fq> A(dz + 1, Fq{0, 0});
        for (const auto& t : primary)
            if (t.ex == 0) A[t.ez] = fq_add(C, A[t.ez], Fq{t.c, 0});
        for (u64 ic = 0; ic < q; ++ic) {
            Fq cv = fq_from_index(C, ic);
            Fq acc = A[dz];
            for (int j = dz - 1; j >= 0; --j) acc = fq_add(C, fq_mul(C, acc, cv), A[j]);
            if (fq_is_zero(acc)) cb(std::array<Fq, 3>{Fq{0, 0}, Fq{1, 0}, cv}, q * q + ic);
        }
    }
    // chart 2
    {
        Fq acc{0, 0};
        for (const auto& t : primary)
            if (t.ex == 0 && t.ey == 0) acc = fq_add(C, acc, Fq{t.c, 0});
        if (fq_is_zero(acc)) cb(std::array<Fq, 3>{Fq{0, 0}, Fq{0, 0}, Fq{1, 0}}, q * q + q);
    }
}

int poly_maxdeg(const std::vector<FqTerm>& T) {
    int d = 0;
    for (const auto& t : T) d = std::max(d, std::max(t.ex, std::max(t.ey, t.ez)));
    return d;
}

}  // namespace

std::optional<std::pair<std::array<Fq, 3>, int>> find_singular_point_mod_p(const TripleSystem& sys,
                                                                           u64 p) {
    IntPoly Px = sys.partial_F(0), Py = sys.partial_F(1), Pz = sys.partial_F(2);
    for (int ext = 1; ext <= 2; ++ext) {
        FqCtx C = FqCtx::make(p, ext);
        Budget::charge(C.q() * C.q() * 2);
        auto TPx = reduce_poly(Px, p), TPy = reduce_poly(Py, p), TPz = reduce_poly(Pz, p);
        auto TF = reduce_poly(sys.F, p);
        if (TF.empty())  // F = 0 mod p: every point singular
            return std::make_pair(std::array<Fq, 3>{Fq{1, 0}, Fq{0, 0}, Fq{0, 0}}, ext);
        int dmax = std::max({poly_maxdeg(TPy), poly_maxdeg(TPz), poly_maxdeg(TF)});
        std::optional<std::array<Fq, 3>> found;
        // scan zeros of dF/dx, then require the other partials and F itself to
        // vanish (the latter matters only when the characteristic divides k)
        enumerate_zeros(C, TPx, [&](const std::array<Fq, 3>& pt, u64) {
            if (found) return;
            if (!fq_is_zero(eval_terms(C, TPy, pt[0], pt[1], pt[2], dmax))) return;
            if (!fq_is_zero(eval_terms(C, TPz, pt[0], pt[1], pt[2], dmax))) return;
            if (!fq_is_zero(eval_terms(C, TF, pt[0], pt[1], pt[2], dmax))) return;
            found = pt;
        });
        if (found) return std::make_pair(*found, ext);
    }
    return std::nullopt;
}

namespace {

// Fiber inspection at one pencil root: x0 spans ker(lambda.Q); a singular fiber
// point exists iff x = t*x0 with t != 0, Q_i(x0) t^2 = n_i for all i.
std::optional<std::vector<Fq>> fiber_point_at(const FqCtx& C, const TripleSystem& sys,
                                              const std::vector<Fq>& x0,
                                              const std::array<i64, 3>& n) {
    auto red = [&](i64 v) -> u64 {
        i64 r = v % (i64)C.p;
        if (r < 0) r += (i64)C.p;
        return (u64)r;
    };
    std::array<Fq, 3> qv;
    for (int m = 0; m < 3; ++m) {
        Fq acc{0, 0};
        for (int i = 0; i < sys.k; ++i) {
            Fq row{0, 0};
            for (int j = 0; j < sys.k; ++j)
                row = fq_add(C, row, fq_mul(C, Fq{red(sys.Q[m].M[i][j]), 0}, x0[j]));
            acc = fq_add(C, acc, fq_mul(C, x0[i], row));
        }
        qv[m] = acc;
    }
    std::array<Fq, 3> nv{Fq{red(n[0]), 0}, Fq{red(n[1]), 0}, Fq{red(n[2]), 0}};
    int i0 = -1;
    for (int m = 0; m < 3; ++m)
        if (!fq_is_zero(qv[m])) {
            i0 = m;
            break;
        }
    if (i0 < 0) {
        // x0 is a common zero of all three forms; fiber point iff n = 0 mod p
        for (int m = 0; m < 3; ++m)
            if (!fq_is_zero(nv[m])) return std::nullopt;
        return x0;
    }
    Fq u = fq_mul(C, nv[i0], fq_inv(C, qv[i0]));
    if (fq_is_zero(u)) return std::nullopt;  // would force t = 0
    for (int m = 0; m < 3; ++m)
        if (!(fq_mul(C, u, qv[m]) == nv[m])) return std::nullopt;
    auto t = fq_sqrt(C, u);
    if (!t) return std::nullopt;
    std::vector<Fq> x(sys.k);
    for (int i = 0; i < sys.k; ++i) x[i] = fq_mul(C, *t, x0[i]);
    return x;
}

std::optional<FiberWitness> fiber_scan_core(const TripleSystem& sys, const std::array<i64, 3>& n,
                                            u64 p, int ext) {
    FqCtx C = FqCtx::make(p, ext);
    Budget::charge(C.q() * C.q() * 4);
    auto TF = reduce_poly(sys.F, p);
    if (TF.empty()) throw input_error("pencil determinant vanishes mod p");
    auto red = [&](i64 v) -> u64 {
        i64 r = v % (i64)p;
        if (r < 0) r += (i64)p;
        return (u64)r;
    };
    std::optional<u64> viol_idx;
    std::array<Fq, 3> viol_lam{};
    std::optional<u64> wit_idx;
    FiberWitness wit;
    enumerate_zeros(C, TF, [&](const std::array<Fq, 3>& lam, u64 idx) {
        std::vector<std::vector<Fq>> M(sys.k, std::vector<Fq>(sys.k));
        for (int i = 0; i < sys.k; ++i)
            for (int j = 0; j < sys.k; ++j) {
                Fq acc{0, 0};
                for (int m = 0; m < 3; ++m)
                    acc = fq_add(C, acc, fq_mul(C, lam[m], Fq{red(sys.Q[m].M[i][j]), 0}));
                M[i][j] = acc;
            }
        std::vector<Fq> x0;
        int r = fq_rank_nullvec(C, std::move(M), &x0);
        if (r <= sys.k - 2) {
            if (!viol_idx) {
                viol_idx = idx;
                viol_lam = lam;
            }
            return;
        }
        if (r == sys.k - 1 && !wit_idx) {
            auto x = fiber_point_at(C, sys, x0, n);
            if (x) {
                wit_idx = idx;
                wit.x = *x;
                wit.lambda = lam;
                wit.ext = ext;
            }
        }
    });
    if (viol_idx) {
        FiberWitness v;
        v.lambda = viol_lam;
        v.ext = ext;
        v.nullity_violation = true;
        return v;
    }
    if (wit_idx) return wit;
    return std::nullopt;
}

}  // namespace

std::optional<FiberWitness> singular_fiber_scan(const TripleSystem& sys,
                                                const std::array<i64, 3>& n, u64 p, int ext,
                                                const RunLimits&) {
    if (p == 2) throw input_error("fiber scan requires an odd prime");
    if (find_singular_point_mod_p(sys, p)) throw input_error("fiber scan requires a good prime");
    return fiber_scan_core(sys, n, p, ext);
}

PrimeClass classify_prime(const TripleSystem& sys, u64 p, const std::array<i64, 3>& n, int ext,
                          const RunLimits&) {
    PrimeClass pc;
    pc.p = p;
    pc.n = n;
    if (p == 2) {
        pc.kind = PrimeKind::Bad;
        return pc;
    }
    if (auto sp = find_singular_point_mod_p(sys, p)) {
        pc.kind = PrimeKind::Bad;
        pc.sing_pt = sp->first;
        pc.sing_ext = sp->second;
        return pc;
    }
    auto w = fiber_scan_core(sys, n, p, ext);
    if (w && w->nullity_violation) {
        pc.kind = PrimeKind::Bad;
        pc.witness = w;
        pc.reclassified = true;
        return pc;
    }
    if (w) {
        pc.kind = PrimeKind::GoodTypeII;
        pc.witness = w;
        return pc;
    }
    pc.kind = PrimeKind::GoodTypeI;
    return pc;
}

JacobianMinors jacobian_minors(const TripleSystem& sys, const std::vector<i64>& x) {
    if ((int)x.size() != sys.k) throw input_error("point has wrong dimension");
    JacobianMinors out;
    out.x = x;
    std::array<std::vector<mpz_class>, 3> g;
    for (int m = 0; m < 3; ++m) {
        auto gi = sys.Q[m].grad(x);
        g[m].resize(gi.size());
        for (size_t t = 0; t < gi.size(); ++t) g[m][t] = (long)gi[t];
    }
    for (int i = 0; i < sys.k; ++i)
        for (int j = i + 1; j < sys.k; ++j)
            for (int l = j + 1; l < sys.k; ++l) {
                mpz_class d = g[0][i] * (g[1][j] * g[2][l] - g[1][l] * g[2][j]) -
                              g[0][j] * (g[1][i] * g[2][l] - g[1][l] * g[2][i]) +
                              g[0][l] * (g[1][i] * g[2][j] - g[1][j] * g[2][i]);
                out.values[{i, j, l}] = d;
            }
    return out;
}

// ---------------------------------------------------------------------------
// serialization

namespace {
json fq_json(const Fq& v) { return json::array({v.a, v.b}); }
}  // namespace

std::string PrimeClass::to_json() const {
    json j;
    j["p"] = p;
    j["n"] = n;
    switch (kind) {
        case PrimeKind::Bad: j["kind"] = "bad"; break;
        case PrimeKind::GoodTypeI: j["kind"] = "type_I"; break;
        case PrimeKind::GoodTypeII: j["kind"] = "type_II"; break;
    }
    if (sing_pt) {
        j["singular_point"] = {{"coords", json::array({fq_json((*sing_pt)[0]), fq_json((*sing_pt)[1]),
                                                       fq_json((*sing_pt)[2])})},
                               {"ext", sing_ext}};
    }
    if (witness) {
        json w;
        w["ext"] = witness->ext;
        w["nullity_violation"] = witness->nullity_violation;
        w["lambda"] = json::array(
            {fq_json(witness->lambda[0]), fq_json(witness->lambda[1]), fq_json(witness->lambda[2])});
        json xs = json::array();
        for (const auto& v : witness->x) xs.push_back(fq_json(v));
        w["x"] = xs;
        j["witness"] = w;
    }
    if (reclassified) j["reclassified"] = true;
    return j.dump();
}

std::string Cond2Certificate::to_json() const {
    json j;
    switch (status) {
        case CertStatus::CertifiedNonsingular: j["status"] = "certified_nonsingular"; break;
        case CertStatus::SingularWithWitness: j["status"] = "singular_with_witness"; break;
        case CertStatus::Inconclusive: j["status"] = "inconclusive"; break;
    }
    if (witness) {
        j["witness"] = json::array({(*witness)[0].get_str(), (*witness)[1].get_str(),
                                    (*witness)[2].get_str()});
    }
    if (!primes_used.empty()) j["primes"] = primes_used;
    j["lead_coeffs_ok"] = lead_coeffs_ok;
    j["z0_case_ok"] = z0_case_ok;
    j["coordinate_changes"] = coordinate_changes;
    if (chain_power) j["chain_power"] = chain_power;
    if (exact_c) j["exact_c"] = exact_c->get_str();
    if (!note.empty()) j["note"] = note;
    return j.dump();
}

}  // namespace triquad
