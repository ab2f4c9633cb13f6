#include "triquad/arch.hpp"

#include "triquad/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Dense>

namespace triquad {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

inline cplx cis(double rad) { return {std::cos(rad), std::sin(rad)}; }

// 8-point Gauss-Legendre on [-1, 1]; hot path of the omega marches.
constexpr double kGl8X[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                             -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                             0.7966664774136267,  0.9602898564975363};
constexpr double kGl8W[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

// Arbitrary-order Gauss-Legendre via Newton on the Legendre recurrence.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<double> x(n), w(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = t;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            double step = p1 / dp;
            t -= step;
            if (std::abs(step) < 1e-15) break;
        }
        double p0 = 1.0, p1 = t;
        for (int j = 2; j <= n; ++j) {
            double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    return cache.emplace(n, std::make_pair(std::move(x), std::move(w))).first->second;
}

Eigen::MatrixXd pencil_matrix_d(const TripleSystem& sys, double c1, double c2, double c3) {
    const int k = sys.k;
    Eigen::MatrixXd A(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            A(i, j) = c1 * double(sys.Q[0].M[i][j]) + c2 * double(sys.Q[1].M[i][j]) +
                      c3 * double(sys.Q[2].M[i][j]);
    return A;
}

bool q1_is_identity(const TripleSystem& sys) {
    for (int i = 0; i < sys.k; ++i)
        for (int j = 0; j < sys.k; ++j)
            if (sys.Q[0].M[i][j] != (i == j ? 1 : 0)) return false;
    return true;
}

double radical_inverse(u64 base, u64 idx) {
    double r = 0.0, f = 1.0 / double(base);
    while (idx) {
        r += f * double(idx % base);
        idx /= base;
        f /= double(base);
    }
    return r;
}

constexpr u64 kHaltonBases[16] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};

// Moments int_0^h e(-mu u) du and (1/h) int_0^h u e(-mu u) du for the exact
// phase integration of one bilinear cell axis.
void axis_moments(double h, double mu, cplx& m0, cplx& m1) {
    double beta = kTwoPi * mu;
    if (std::abs(beta * h) < 1e-4) {
        cplx ib(0.0, beta);
        m0 = h * (1.0 - ib * (h / 2.0) - (beta * beta) * (h * h / 6.0));
        m1 = h * (0.5 - ib * (h / 3.0));
        return;
    }
    cplx E = cis(-beta * h);
    cplx ib(0.0, beta);
    m0 = (1.0 - E) / ib;
    m1 = (-(h / ib) * E - (E - 1.0) / (beta * beta)) / h;
}

struct OscCore {
    cplx value{0, 0};
    double err = 0;
    u64 evals = 0;
};

// int ghat(w) prod_j sqrt(pi/a_j) exp(-pi^2 mu_j^2/a_j) dw with adaptive panels.
OscCore osc_core(int k, const double* rho, const double* mu, const WeightTransform& wt) {
    const double W = wt.W();
    OscCore out;
    KahanC acc;
    double om = -W;
    while (om < W) {
        // amplitude deficit and phase speed of the resonance at the panel start
        double def = 0.0, rate = 2.0;
        for (int j = 0; j < k; ++j) {
            double b = kTwoPi * (rho[j] + om);
            double d2 = 1.0 + b * b;
            if (mu) def += kPi * kPi * mu[j] * mu[j] / d2;
            rate += 4.0 / d2;  // arg sqrt(pi/a_j) turns at pi/d2
        }
        if (def > 48.0) {  // integrand below e^-48 of scale: step over
            om += 0.08;
            continue;
        }
        rate += kTwoPi * def;
        double h = std::min(0.4, 8.0 / rate);
        if (om + h > W) h = W - om;
        for (int g = 0; g < 8; ++g) {
            double t = om + 0.5 * h * (kGl8X[g] + 1.0);
            cplx gh = wt.ghat(t);
            ++out.evals;
            if (gh == cplx(0, 0)) continue;
            cplx prod = gh * (0.5 * h * kGl8W[g]);
            cplx expo(0, 0);
            for (int j = 0; j < k; ++j) {
                cplx a(1.0, -kTwoPi * (rho[j] + t));
                prod *= std::sqrt(kPi / a);  // principal branch per factor
                if (mu && mu[j] != 0.0) expo -= kPi * kPi * mu[j] * mu[j] / a;
            }
            if (expo != cplx(0, 0)) prod *= std::exp(expo);
            acc.add(prod);
        }
        om += h;
    }
    out.value = acc.value();
    out.err = acc.err() + wt.tail() * std::pow(kPi, 0.5 * k);
    return out;
}

double weight_mass(const Weight& wgt, int k) {
    const auto& gl = gauss_legendre(64);
    if (wgt.kind == WeightKind::ProductBump) {
        double m1 = 0.0;
        for (int i = 0; i < 64; ++i) m1 += wgt.C * gl.second[i] * wgt.bump(wgt.C * gl.first[i]);
        return std::pow(m1, k);
    }
    const double smax = wgt.C * wgt.C;
    double m = 0.0;
    for (int i = 0; i < 64; ++i) {
        double s = 0.5 * smax * (gl.first[i] + 1.0);
        m += 0.5 * smax * gl.second[i] * wgt.radial_phi(s) * std::pow(s, 0.5 * k - 1.0);
    }
    double sph = 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k);
    return 0.5 * sph * m;
}

}  // namespace

double Weight::bump(double t) const {
    double u = t / C;
    double d = 1.0 - u * u;
    if (d <= 1e-14) return 0.0;
    return std::exp(-1.0 / d);
}

double Weight::radial_phi(double s) const {
    double u = s / (C * C);
    double d = 1.0 - u * u;
    if (d <= 1e-14) return 0.0;
    return std::exp(-1.0 / d);
}

double Weight::operator()(const double* x, int k) const {
    if (kind == WeightKind::ProductBump) {
        double w = 1.0;
        for (int i = 0; i < k; ++i) {
            w *= bump(x[i]);
            if (w == 0.0) return 0.0;
        }
        return w;
    }
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += x[i] * x[i];
    return radial_phi(s);
}

double Weight::deriv_bound() const { return 8.0 / (C * C); }

WeightTransform::WeightTransform(double C, double tail_tol) : C_(C) {
    Weight wgt = Weight::radial(C);
    // Static s-quadrature of g(s) = phi(s) e^s over [-C^2, C^2]: 256 panels of
    // 10-point Gauss keep ~8 nodes per cycle out to omega ~ 200.
    const double smax = C * C;
    const auto& gl = gauss_legendre(10);
    const int npan = 256;
    std::vector<double> sn, fn;
    sn.reserve(npan * 10);
    fn.reserve(npan * 10);
    for (int p = 0; p < npan; ++p) {
        double a = -smax + 2.0 * smax * p / npan, b = a + 2.0 * smax / npan;
        for (int i = 0; i < 10; ++i) {
            double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.first[i];
            sn.push_back(s);
            fn.push_back(0.5 * (b - a) * gl.second[i] * wgt.radial_phi(s) * std::exp(s));
        }
    }
    auto ghat_exact = [&](double om) {
        KahanC acc;
        for (size_t i = 0; i < sn.size(); ++i) acc.add(fn[i] * cis(-kTwoPi * om * sn[i]));
        return acc.value();
    };
    h_ = 1.0 / 64.0;
    const double wmax_hard = 200.0;
    std::vector<cplx> pos;  // omega >= 0
    double gmax = 0.0;
    int quiet = 0;
    double Wfound = wmax_hard;
    for (int i = 0;; ++i) {
        double om = i * h_;
        cplx v = ghat_exact(om);
        pos.push_back(v);
        gmax = std::max(gmax, std::abs(v));
        if (om > 8.0 && std::abs(v) < tail_tol * gmax) {
            if (++quiet >= 128) {
                Wfound = om - 127 * h_;
                break;
            }
        } else {
            quiet = 0;
        }
        if (om >= wmax_hard) break;
    }
    W_ = Wfound;
    int nW = (int)std::llround(W_ / h_);
    // measured mass beyond the cutoff (march a little further than W)
    double tail = 0.0;
    for (int i = nW + 1; i < (int)pos.size(); ++i) tail += std::abs(pos[i]) * h_;
    for (int i = (int)pos.size(); i * h_ < std::min(wmax_hard, W_ * 1.5); ++i)
        tail += std::abs(ghat_exact(i * h_)) * h_;
    tail_ = 2.0 * tail;
    grid_.assign(2 * nW + 1, cplx(0, 0));
    for (int i = 0; i <= nW; ++i) {
        grid_[nW + i] = pos[i];
        grid_[nW - i] = std::conj(pos[i]);
    }
    double tot = 0.0;
    for (auto& v : grid_) tot += std::abs(v) * h_;
    total_ = tot;
}

cplx WeightTransform::ghat(double omega) const {
    if (std::abs(omega) >= W_) return {0.0, 0.0};
    double t = (omega + W_) / h_;
    int i = (int)t;
    double u = t - i;
    int n = (int)grid_.size();
    auto at = [&](int j) { return (j < 0 || j >= n) ? cplx(0, 0) : grid_[j]; };
    cplx fm1 = at(i - 1), f0 = at(i), f1 = at(i + 1), f2 = at(i + 2);
    // Catmull-Rom
    cplx a0 = f0;
    cplx a1 = 0.5 * (f1 - fm1);
    cplx a2 = fm1 - 2.5 * f0 + 2.0 * f1 - 0.5 * f2;
    cplx a3 = 0.5 * (f2 - fm1) + 1.5 * (f0 - f1);
    return a0 + u * (a1 + u * (a2 + u * a3));
}

const WeightTransform& transform_cache(double C) {
    static std::mutex mu;
    static std::map<long long, std::unique_ptr<WeightTransform>> cache;
    long long key = std::llround(C * 1e9);
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<WeightTransform>(C)).first;
    return *it->second;
}

std::vector<double> pencil_eigs(const TripleSystem& sys, const std::array<double, 3>& nu) {
    Eigen::MatrixXd A = pencil_matrix_d(sys, nu[0], nu[1], nu[2]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    std::vector<double> out(sys.k);
    double prod = 1.0, mx = 0.0;
    for (int i = 0; i < sys.k; ++i) {
        out[i] = std::abs(es.eigenvalues()(i));
        prod *= out[i];
        mx = std::max(mx, out[i]);
    }
    double det = std::abs(A.determinant());
    double tol = 1e-8 * std::max(det, prod) + 1e-12 * std::pow(std::max(1.0, mx), sys.k);
    if (std::abs(prod - det) > tol)
        throw std::runtime_error("pencil_eigs: eigenvalue product disagrees with determinant");
    std::sort(out.begin(), out.end());
    return out;
}

cplx osc_I(const TripleSystem& sys, const WeightTransform& wt,
           const std::array<double, 3>& nu, const std::vector<double>& lambda) {
    const int k = sys.k;
    if (!lambda.empty() && (int)lambda.size() != k)
        throw input_error("osc_I: lambda has wrong dimension");
    std::vector<double> rho(k, 0.0), mu(k, 0.0);
    bool has_lin = false;
    for (double v : lambda)
        if (v != 0.0) has_lin = true;
    if (nu[0] != 0.0 || nu[1] != 0.0 || nu[2] != 0.0 || has_lin) {
        Eigen::MatrixXd A = pencil_matrix_d(sys, nu[0], nu[1], nu[2]);
        if (has_lin) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
            Eigen::VectorXd lam(k);
            for (int i = 0; i < k; ++i) lam(i) = lambda[i];
            Eigen::VectorXd m = es.eigenvectors().transpose() * lam;
            for (int i = 0; i < k; ++i) {
                rho[i] = es.eigenvalues()(i);
                mu[i] = m(i);
            }
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
            for (int i = 0; i < k; ++i) rho[i] = es.eigenvalues()(i);
        }
    }
    return osc_core(k, rho.data(), has_lin ? mu.data() : nullptr, wt).value;
}

std::vector<cplx> osc_I_many(const TripleSystem& sys, const WeightTransform& wt,
                             const std::array<double, 3>& nu,
                             const std::vector<std::vector<double>>& lambdas) {
    const int k = sys.k;
    Eigen::MatrixXd A = pencil_matrix_d(sys, nu[0], nu[1], nu[2]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    std::vector<double> rho(k), mu(k);
    for (int i = 0; i < k; ++i) rho[i] = es.eigenvalues()(i);
    std::vector<cplx> out;
    out.reserve(lambdas.size());
    Eigen::VectorXd lam(k);
    for (const auto& l : lambdas) {
        if ((int)l.size() != k) throw input_error("osc_I_many: lambda has wrong dimension");
        bool has_lin = false;
        for (double v : l)
            if (v != 0.0) has_lin = true;
        if (has_lin) {
            for (int i = 0; i < k; ++i) lam(i) = l[i];
            Eigen::VectorXd m = es.eigenvectors().transpose() * lam;
            for (int i = 0; i < k; ++i) mu[i] = m(i);
        }
        out.push_back(osc_core(k, rho.data(), has_lin ? mu.data() : nullptr, wt).value);
    }
    return out;
}

cplx osc_I_direct(const TripleSystem& sys, const Weight& wgt,
                  const std::array<double, 3>& nu, const std::vector<double>& lambda,
                  int nodes_per_axis, const RunLimits& lim) {
    const int k = sys.k;
    if (!lambda.empty() && (int)lambda.size() != k)
        throw input_error("osc_I_direct: lambda has wrong dimension");
    Budget::charge(checked_pow_u64((u64)nodes_per_axis, k), lim.force);
    const auto& gl = gauss_legendre(nodes_per_axis);
    const double C = wgt.C;
    std::vector<double> xs(nodes_per_axis), ws(nodes_per_axis);
    for (int i = 0; i < nodes_per_axis; ++i) {
        xs[i] = C * gl.first[i];
        ws[i] = C * gl.second[i];
    }
    std::vector<int> idx(k, 0);
    std::vector<double> x(k);
    KahanC acc;
    for (;;) {
        double wprod = 1.0;
        for (int i = 0; i < k; ++i) {
            x[i] = xs[idx[i]];
            wprod *= ws[idx[i]];
        }
        double wv = wgt(x.data(), k);
        if (wv != 0.0) {
            double phase = 0.0;
            for (int m = 0; m < 3; ++m) {
                if (nu[m] == 0.0) continue;
                double qv = 0.0;
                for (int i = 0; i < k; ++i) {
                    const auto& row = sys.Q[m].M[i];
                    double r = 0.0;
                    for (int j = 0; j < k; ++j) r += double(row[j]) * x[j];
                    qv += x[i] * r;
                }
                phase += nu[m] * qv;
            }
            if (!lambda.empty())
                for (int i = 0; i < k; ++i) phase += lambda[i] * x[i];
            acc.add(wv * wprod * e2pi(phase));
        }
        int i = 0;
        while (i < k && ++idx[i] == nodes_per_axis) idx[i++] = 0;
        if (i == k) break;
    }
    return acc.value();
}

QuadratureResult osc_integral(const TripleSystem& sys, const std::array<double, 3>& theta,
                              const std::vector<double>& lambda, const Weight& wgt,
                              const RunLimits& lim) {
    const int k = sys.k;
    QuadratureResult res;
    bool has_lin = false;
    for (double v : lambda)
        if (v != 0.0) has_lin = true;
    if (theta[0] == 0.0 && theta[1] == 0.0 && theta[2] == 0.0 && !has_lin) {
        res.value = weight_mass(wgt, k);
        res.est_error = 1e-12 * std::abs(res.value);
        res.evaluations = 64;
        return res;
    }
    if (wgt.kind == WeightKind::RadialBump) {
        const WeightTransform& wt = transform_cache(wgt.C);
        std::vector<double> rho(k, 0.0), mu(k, 0.0);
        Eigen::MatrixXd A = pencil_matrix_d(sys, theta[0], theta[1], theta[2]);
        if (has_lin) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
            Eigen::VectorXd lam(k);
            for (int i = 0; i < k; ++i) lam(i) = lambda[i];
            Eigen::VectorXd m = es.eigenvectors().transpose() * lam;
            for (int i = 0; i < k; ++i) {
                rho[i] = es.eigenvalues()(i);
                mu[i] = m(i);
            }
        } else {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
            for (int i = 0; i < k; ++i) rho[i] = es.eigenvalues()(i);
        }
        OscCore core = osc_core(k, rho.data(), has_lin ? mu.data() : nullptr, wt);
        res.value = core.value;
        res.evaluations = core.evals;
        res.est_error = core.err + 5e-6 * wt.total() * std::pow(kPi, 0.5 * k);
        return res;
    }
    // product bump: oscillation-aware tensor panels, coarse/fine error estimate
    std::vector<int> panels(k, 1);
    double budget_cap = double(std::min<u64>(Budget::limit(), u64(2) << 26));
    for (int i = 0; i < k; ++i) {
        double rate = has_lin && i < (int)lambda.size() ? std::abs(lambda[i]) : 0.0;
        for (int m = 0; m < 3; ++m) {
            double rs = 0.0;
            for (int j = 0; j < k; ++j) rs += std::abs(double(sys.Q[m].M[i][j]));
            rate += 2.0 * std::abs(theta[m]) * rs * wgt.C;
        }
        panels[i] = std::max(1, (int)std::ceil(2.0 * wgt.C * kTwoPi * rate / 6.0));
    }
    for (;;) {
        double tot = 1.0;
        for (int i = 0; i < k; ++i) tot *= 8.0 * panels[i];
        if (tot <= budget_cap) break;
        bool any = false;
        for (int i = 0; i < k; ++i)
            if (panels[i] > 1) {
                panels[i] = (panels[i] + 1) / 2;
                any = true;
            }
        res.flagged = true;  // forced to coarsen below the oscillation scale
        if (!any) break;
    }
    auto tensor_pass = [&](int order) {
        const auto& gl = gauss_legendre(order);
        std::vector<std::vector<double>> xs(k), ws(k);
        for (int i = 0; i < k; ++i) {
            for (int p = 0; p < panels[i]; ++p) {
                double a = -wgt.C + 2.0 * wgt.C * p / panels[i];
                double b = a + 2.0 * wgt.C / panels[i];
                for (int g = 0; g < order; ++g) {
                    xs[i].push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.first[g]);
                    ws[i].push_back(0.5 * (b - a) * gl.second[g]);
                }
            }
        }
        std::vector<size_t> idx(k, 0);
        std::vector<double> x(k);
        KahanC acc;
        u64 count = 0;
        for (;;) {
            double wprod = 1.0;
            for (int i = 0; i < k; ++i) {
                x[i] = xs[i][idx[i]];
                wprod *= ws[i][idx[i]] * wgt.bump(x[i]);
            }
            ++count;
            if (wprod != 0.0) {
                double phase = 0.0;
                for (int m = 0; m < 3; ++m) {
                    if (theta[m] == 0.0) continue;
                    double qv = 0.0;
                    for (int i = 0; i < k; ++i) {
                        const auto& row = sys.Q[m].M[i];
                        double r = 0.0;
                        for (int j = 0; j < k; ++j) r += double(row[j]) * x[j];
                        qv += x[i] * r;
                    }
                    phase += theta[m] * qv;
                }
                if (has_lin)
                    for (int i = 0; i < k; ++i) phase += lambda[i] * x[i];
                acc.add(wprod * e2pi(phase));
            }
            int i = 0;
            while (i < k && ++idx[i] == xs[i].size()) idx[i++] = 0;
            if (i == k) break;
        }
        return std::make_pair(acc.value(), count);
    };
    u64 projected = 1;
    for (int i = 0; i < k; ++i) projected *= u64(8) * panels[i];
    Budget::charge(projected, lim.force);
    auto coarse = tensor_pass(5);
    auto fine = tensor_pass(8);
    res.value = fine.first;
    res.est_error = std::abs(fine.first - coarse.first);
    res.evaluations = coarse.second + fine.second;
    if (res.flagged) res.est_error = std::max(res.est_error, 1e-3 * std::abs(res.value));
    return res;
}

namespace {

// Shared state of one jint_family run (Q1 = I fast path).
struct JWork {
    std::array<double, 3> mu;
    int k;
    double h2, hnu;
    int Nn;                    // nu grid indices -Nn..Nn
    std::vector<cplx> cum;     // running integral of ghat(t) e(t mu1)
    std::vector<double> simp;  // Simpson weights * hnu
    Eigen::MatrixXd Q2d, Q3d;

    cplx cum_at(int i) const {  // i in grid index space (0..2Nn)
        if (i < 0) return cum.front();
        if (i >= (int)cum.size()) return cum.back();
        return cum[i];
    }
};

}  // namespace

JFamily jint_family(const TripleSystem& sys, const WeightTransform& wt,
                    const std::array<double, 3>& mu, double R0, int doublings,
                    const RunLimits& lim) {
    if (!q1_is_identity(sys))
        throw input_error("jint fast path needs Q1 = I; use the direct route instead");
    if (R0 < 0.5 || std::abs(R0 * 2.0 - std::llround(R0 * 2.0)) > 1e-12)
        throw input_error("jint: R must be a multiple of 1/2, at least 1/2");
    if (doublings < 0) doublings = 0;

    JWork jw;
    jw.mu = mu;
    jw.k = sys.k;
    jw.h2 = 0.5;
    jw.hnu = 1.0 / 24.0;
    const int nR = doublings + 1;
    std::vector<double> Rs(nR);
    for (int m = 0; m < nR; ++m) Rs[m] = R0 * double(1 << m);
    const double Rmax = Rs.back();
    const double W = wt.W();

    jw.Nn = (int)std::ceil((Rmax + W + 2.0) / jw.hnu);
    const int NG = 2 * jw.Nn + 1;
    {
        u64 sideEst = 2 * (u64)std::llround(Rmax / jw.h2) + 1;
        Budget::charge(sideEst * sideEst * (u64)NG / 2, lim.force);
    }

    // cumulative transform window: cum[i] = int_{-inf}^{nu_i} ghat(t) e(t mu1) dt,
    // exactly constant outside [-W, W] so far-window differences vanish exactly.
    {
        std::vector<cplx> f(NG, cplx(0, 0));
        for (int i = 0; i < NG; ++i) {
            double nu = (i - jw.Nn) * jw.hnu;
            cplx g = wt.ghat(nu);
            if (g != cplx(0, 0)) f[i] = g * e2pi(nu * mu[0]);
        }
        jw.cum.assign(NG, cplx(0, 0));
        auto fat = [&](int i) { return (i < 0 || i >= NG) ? cplx(0, 0) : f[i]; };
        for (int i = 0; i + 1 < NG; ++i)
            jw.cum[i + 1] =
                jw.cum[i] + (jw.hnu / 12.0) * (5.0 * fat(i) + 8.0 * fat(i + 1) - fat(i + 2));
    }
    jw.simp.assign(NG, 0.0);
    for (int i = 0; i < NG; ++i)
        jw.simp[i] = jw.hnu * ((i == 0 || i == NG - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0)) / 3.0;

    jw.Q2d = Eigen::MatrixXd(jw.k, jw.k);
    jw.Q3d = Eigen::MatrixXd(jw.k, jw.k);
    for (int i = 0; i < jw.k; ++i)
        for (int j = 0; j < jw.k; ++j) {
            jw.Q2d(i, j) = double(sys.Q[1].M[i][j]);
            jw.Q3d(i, j) = double(sys.Q[2].M[i][j]);
        }

    const int N2 = (int)std::llround(Rmax / jw.h2);
    const int side = 2 * N2 + 1;
    std::vector<int> shift(nR);
    for (int m = 0; m < nR; ++m) shift[m] = (int)std::llround(Rs[m] / jw.hnu);

    // index windows where the level-m window difference can be nonzero
    struct Win {
        int a0, a1, b0, b1;
        bool merged;
    };
    std::vector<Win> wins(std::max(0, nR - 1));
    for (int m = 0; m + 1 < nR; ++m) {
        double Ra = Rs[m], Rb = Rs[m + 1];
        double lo1 = -(Rb + W), hi1 = W - Ra;  // left bracket support
        double lo2 = Ra - W, hi2 = Rb + W;     // right bracket support
        auto toidx = [&](double v) { return (int)std::floor(v / jw.hnu) + jw.Nn; };
        Win w;
        w.merged = hi1 >= lo2;
        w.a0 = std::max(0, toidx(lo1) - 2);
        w.a1 = std::min(NG - 1, toidx(w.merged ? hi2 : hi1) + 2);
        w.b0 = std::max(0, toidx(lo2) - 2);
        w.b1 = std::min(NG - 1, toidx(hi2) + 2);
        wins[m] = w;
    }

    // per-corner transforms: D[0] = A_{R0}, D[m+1] = A_{R_{m+1}} - A_{R_m}
    std::vector<std::vector<cplx>> D(nR);
    for (auto& v : D) v.assign((size_t)side * side, cplx(0, 0));

    const int base_lo = std::max(0, jw.Nn - (int)std::llround((Rs[0] + W) / jw.hnu) - 2);
    const int base_hi = std::min(NG - 1, jw.Nn + (int)std::llround((Rs[0] + W) / jw.hnu) + 2);

    auto do_row = [&](int r2) {
        int i2 = r2 - N2;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        std::vector<double> tau(jw.k);
        std::vector<cplx> u(NG);
        for (int r3 = 0; r3 < side; ++r3) {
            int i3 = r3 - N2;
            // conjugate-mirror half saves the eigensolve and the u build
            if (i3 < 0 || (i3 == 0 && i2 < 0)) continue;
            double t2 = i2 * jw.h2, t3 = i3 * jw.h2;
            es.compute(t2 * jw.Q2d + t3 * jw.Q3d, Eigen::EigenvaluesOnly);
            for (int j = 0; j < jw.k; ++j) tau[j] = es.eigenvalues()(j);
            for (int i = 0; i < NG; ++i) {
                double nu = (i - jw.Nn) * jw.hnu;
                cplx prod = jw.simp[i] * e2pi(-nu * mu[0]);
                for (int j = 0; j < jw.k; ++j) {
                    cplx a(1.0, -kTwoPi * (nu + tau[j]));
                    prod *= std::sqrt(kPi / a);
                }
                u[i] = prod;
            }
            size_t at = (size_t)r2 * side + r3;
            size_t mir = (size_t)(N2 - i2) * side + (N2 - i3);
            {
                KahanC acc;
                int s = shift[0];
                for (int i = base_lo; i <= base_hi; ++i) {
                    cplx Phi = jw.cum_at(i + s) - jw.cum_at(i - s);
                    if (Phi != cplx(0, 0)) acc.add(u[i] * Phi);
                }
                D[0][at] = acc.value();
                D[0][mir] = std::conj(D[0][at]);
            }
            for (int m = 0; m + 1 < nR; ++m) {
                KahanC acc;
                int sa = shift[m], sb = shift[m + 1];
                auto add_range = [&](int i0, int i1) {
                    for (int i = i0; i <= i1; ++i) {
                        cplx dPhi = (jw.cum_at(i + sb) - jw.cum_at(i + sa)) -
                                    (jw.cum_at(i - sb) - jw.cum_at(i - sa));
                        if (dPhi != cplx(0, 0)) acc.add(u[i] * dPhi);
                    }
                };
                const Win& ww = wins[m];
                if (ww.merged) {
                    add_range(ww.a0, ww.a1);
                } else {
                    add_range(ww.a0, ww.a1);
                    add_range(ww.b0, ww.b1);
                }
                D[m + 1][at] = acc.value();
                D[m + 1][mir] = std::conj(D[m + 1][at]);
            }
        }
    };
    parallel_chunks(side, lim.workers, do_row);

    // exact phase moments of one cell axis
    cplx m0_2, m1_2, m0_3, m1_3;
    axis_moments(jw.h2, mu[1], m0_2, m1_2);
    axis_moments(jw.h2, mu[2], m0_3, m1_3);
    const cplx T0u = m0_2 - m1_2, T1u = m1_2;
    const cplx T0v = m0_3 - m1_3, T1v = m1_3;
    auto cell_int = [&](const std::vector<cplx>& A, int c2, int c3) {
        size_t r2 = (size_t)(c2 + N2), r3 = (size_t)(c3 + N2);
        cplx A00 = A[r2 * side + r3], A01 = A[r2 * side + r3 + 1];
        cplx A10 = A[(r2 + 1) * side + r3], A11 = A[(r2 + 1) * side + r3 + 1];
        cplx val = A00 * T0u * T0v + A10 * T1u * T0v + A01 * T0u * T1v + A11 * T1u * T1v;
        return val * e2pi(-(c2 * jw.h2 * mu[1] + c3 * jw.h2 * mu[2]));
    };
    auto cell_sum = [&](const std::vector<cplx>& A, int half) {
        KahanC acc;
        for (int c2 = -half; c2 < half; ++c2)
            for (int c3 = -half; c3 < half; ++c3) acc.add(cell_int(A, c2, c3));
        return acc.value();
    };
    auto shell_sum = [&](const std::vector<cplx>& A, int inner, int outer) {
        KahanC acc;
        for (int c2 = -outer; c2 < outer; ++c2)
            for (int c3 = -outer; c3 < outer; ++c3) {
                if (c2 >= -inner && c2 < inner && c3 >= -inner && c3 < inner) continue;
                acc.add(cell_int(A, c2, c3));
            }
        return acc.value();
    };

    JFamily fam;
    fam.R = Rs;
    std::vector<int> half(nR);
    for (int m = 0; m < nR; ++m) half[m] = (int)std::llround(Rs[m] / jw.h2);

    std::vector<cplx>& Acur = D[0];  // grows into A_{R_{m+1}} level by level
    cplx Jcur = cell_sum(Acur, half[0]);
    fam.J.push_back(Jcur.real());
    fam.imag_max = std::abs(Jcur.imag());
    for (int m = 0; m + 1 < nR; ++m) {
        cplx inc = cell_sum(D[m + 1], half[m]);
        for (size_t i = 0; i < Acur.size(); ++i) Acur[i] += D[m + 1][i];
        inc += shell_sum(Acur, half[m], half[m + 1]);
        fam.increment.push_back(inc.real());
        Jcur += inc;
        fam.J.push_back(Jcur.real());
        fam.imag_max = std::max(fam.imag_max, std::abs(Jcur.imag()));
    }
    return fam;
}

double jint(const TripleSystem& sys, const WeightTransform& wt,
            const std::array<double, 3>& mu, double R, const RunLimits& lim) {
    return jint_family(sys, wt, mu, R, 0, lim).J[0];
}

SingularIntegral singular_integral(const TripleSystem& sys, const std::array<double, 3>& mu,
                                   double R, const Weight& wgt, const RunLimits& lim) {
    if (wgt.kind != WeightKind::RadialBump)
        throw input_error("singular_integral: transform route needs the radial weight kind");
    const WeightTransform& wt = transform_cache(wgt.C);
    SingularIntegral out;
    if (q1_is_identity(sys)) {
        int d = 0;
        double R0 = R;
        while (R0 > 2.0 && d < 12) {
            R0 /= 2.0;
            ++d;
        }
        out.family = jint_family(sys, wt, mu, R0, d, lim);
        out.result.value = out.family.J.back();
        double tail = out.family.increment.empty() ? 0.1 * std::abs(out.family.J.back())
                                                   : std::abs(out.family.increment.back());
        out.result.est_error = tail + out.family.imag_max;
        out.result.evaluations = u64(out.family.R.size());
    } else {
        // no radial reduction available: direct 3-D quadrature at capped R
        double Reff = std::min(R, 8.0);
        out.result.flagged = Reff != R;
        double Rc = 0.5;
        std::vector<double> js;
        while (Rc < Reff) {
            Rc = std::min(Reff, Rc * 2);
            cplx v = jint_direct(sys, wt, mu, Rc, 2, lim);
            out.family.R.push_back(Rc);
            out.family.J.push_back(v.real());
            out.family.imag_max = std::max(out.family.imag_max, std::abs(v.imag()));
        }
        for (size_t i = 0; i + 1 < out.family.J.size(); ++i)
            out.family.increment.push_back(out.family.J[i + 1] - out.family.J[i]);
        out.result.value = out.family.J.back();
        out.result.est_error =
            (out.family.increment.empty() ? std::abs(out.family.J.back())
                                          : std::abs(out.family.increment.back())) +
            out.family.imag_max;
        out.result.evaluations = u64(out.family.R.size());
    }
    if (sys.k <= 6) out.result.flagged = true;  // convergence caveat, not failure
    return out;
}

cplx jint_direct(const TripleSystem& sys, const WeightTransform& wt,
                 const std::array<double, 3>& mu, double R, int panels_per_unit,
                 const RunLimits& lim) {
    const int npan = std::max(1, (int)std::ceil(2.0 * R * panels_per_unit));
    const int nax = 6 * npan;
    Budget::charge(u64(nax) * nax * nax * 2400, lim.force);
    const auto& gl = gauss_legendre(6);
    std::vector<double> xs(nax), ws(nax);
    for (int p = 0; p < npan; ++p) {
        double a = -R + 2.0 * R * p / npan, b = a + 2.0 * R / npan;
        for (int i = 0; i < 6; ++i) {
            xs[p * 6 + i] = 0.5 * (a + b) + 0.5 * (b - a) * gl.first[i];
            ws[p * 6 + i] = 0.5 * (b - a) * gl.second[i];
        }
    }
    std::vector<cplx> partial(nax, cplx(0, 0));
    auto do_slice = [&](int i1) {
        KahanC acc;
        std::array<double, 3> th;
        th[0] = xs[i1];
        for (int i2 = 0; i2 < nax; ++i2) {
            th[1] = xs[i2];
            for (int i3 = 0; i3 < nax; ++i3) {
                th[2] = xs[i3];
                cplx I = osc_I(sys, wt, th, {});
                acc.add(I * e2pi(-(th[0] * mu[0] + th[1] * mu[1] + th[2] * mu[2])) * ws[i2] *
                        ws[i3]);
            }
        }
        partial[i1] = acc.value() * ws[i1];
    };
    parallel_chunks(nax, lim.workers, do_slice);
    KahanC tot;
    for (auto& v : partial) tot.add(v);
    return tot.value();
}

QuadratureResult singular_integral_oracle(const TripleSystem& sys, const std::array<double, 3>& mu,
                                          double eps, const Weight& wgt, u64 ndirs,
                                          const RunLimits& lim) {
    const int k = sys.k;
    if (eps <= 0) throw input_error("fiber oracle: eps must be positive");
    if (wgt.kind != WeightKind::RadialBump)
        throw input_error("fiber oracle: radial slicing needs the radial weight kind");
    Budget::charge(ndirs * (u64)(k + 16), lim.force);
    const double smax = wgt.C * wgt.C;
    const double sph_area = 2.0 * std::pow(kPi, 0.5 * k) / std::tgamma(0.5 * k);
    const auto& gl = gauss_legendre(8);
    const int npairs = (k + 1) / 2;
    if (2 * npairs > 16) throw input_error("fiber oracle: k too large for the Halton net");

    const int nchunks = (int)std::max<u64>(1, std::min<u64>(64, ndirs / 4096));
    std::vector<double> chunk_sum(nchunks, 0.0);
    std::vector<u64> chunk_cnt(nchunks, 0);
    auto do_chunk = [&](int c) {
        u64 lo = ndirs * (u64)c / nchunks, hi = ndirs * (u64)(c + 1) / nchunks;
        double sum = 0.0, comp = 0.0;
        std::vector<double> z(2 * npairs), u(k);
        double q[3], kink[3];
        for (u64 t = lo; t < hi; ++t) {
            u64 idx = t + 1;
            for (int d = 0; d < npairs; ++d) {
                double u1 = radical_inverse(kHaltonBases[2 * d], idx);
                double u2 = radical_inverse(kHaltonBases[2 * d + 1], idx);
                double r = std::sqrt(-2.0 * std::log(std::max(u1, 1e-300)));
                z[2 * d] = r * std::cos(kTwoPi * u2);
                z[2 * d + 1] = r * std::sin(kTwoPi * u2);
            }
            double nrm = 0.0;
            for (int i = 0; i < k; ++i) nrm += z[i] * z[i];
            if (nrm < 1e-30) continue;
            nrm = 1.0 / std::sqrt(nrm);
            for (int i = 0; i < k; ++i) u[i] = z[i] * nrm;
            for (int m = 0; m < 3; ++m) {
                double qv = 0.0;
                for (int i = 0; i < k; ++i) {
                    const auto& row = sys.Q[m].M[i];
                    double r = 0.0;
                    for (int j = 0; j < k; ++j) r += double(row[j]) * u[j];
                    qv += u[i] * r;
                }
                q[m] = qv;
            }
            double lo_s = 0.0, hi_s = smax;
            bool empty = false;
            int nk = 0;
            for (int m = 0; m < 3 && !empty; ++m) {
                if (std::abs(q[m]) < 1e-13) {
                    if (std::abs(mu[m]) > eps) empty = true;
                    continue;
                }
                double a = (mu[m] - eps) / q[m], b = (mu[m] + eps) / q[m];
                if (a > b) std::swap(a, b);
                lo_s = std::max(lo_s, a);
                hi_s = std::min(hi_s, b);
                if (lo_s >= hi_s) empty = true;
                kink[nk++] = mu[m] / q[m];
            }
            if (empty || lo_s >= hi_s) continue;
            double cuts[5];
            int nc = 0;
            cuts[nc++] = lo_s;
            std::sort(kink, kink + nk);
            for (int i = 0; i < nk; ++i)
                if (kink[i] > lo_s + 1e-15 && kink[i] < hi_s - 1e-15) cuts[nc++] = kink[i];
            cuts[nc++] = hi_s;
            double slice = 0.0;
            for (int seg = 0; seg + 1 < nc; ++seg) {
                double a = cuts[seg], b = cuts[seg + 1];
                for (int g = 0; g < 8; ++g) {
                    double s = 0.5 * (a + b) + 0.5 * (b - a) * gl.first[g];
                    double f = wgt.radial_phi(s) * std::pow(s, 0.5 * k - 1.0);
                    for (int m = 0; m < 3; ++m)
                        f *= std::max(0.0, 1.0 - std::abs(s * q[m] - mu[m]) / eps);
                    slice += 0.5 * (b - a) * gl.second[g] * f;
                }
            }
            double y = slice - comp;  // Kahan
            double tt = sum + y;
            comp = (tt - sum) - y;
            sum = tt;
        }
        chunk_sum[c] = sum;
        chunk_cnt[c] = hi - lo;
    };
    parallel_chunks(nchunks, lim.workers, do_chunk);
    double total = 0.0;
    for (double v : chunk_sum) total += v;
    const double scale = 0.5 * sph_area / (eps * eps * eps);
    QuadratureResult res;
    res.value = scale * total / double(ndirs);
    res.evaluations = ndirs;
    // spread of per-chunk means estimates the directional sampling error
    double mean = total / double(ndirs), var = 0.0;
    int used = 0;
    for (int c = 0; c < nchunks; ++c) {
        if (!chunk_cnt[c]) continue;
        double d = chunk_sum[c] / double(chunk_cnt[c]) - mean;
        var += d * d;
        ++used;
    }
    if (used > 1) res.est_error = scale * std::sqrt(var / (used - 1) / used);
    res.flagged = res.est_error > 0.1 * std::abs(res.value) || ndirs < 1024;
    return res;
}

double log2_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (y[i] == 0.0 || !std::isfinite(y[i]) || x[i] <= 0.0) continue;
        double lx = std::log2(x[i]), ly = std::log2(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) throw input_error("log2_slope: need at least two usable points");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace triquad
