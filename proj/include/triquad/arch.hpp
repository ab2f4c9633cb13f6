#pragma once

#include <array>
#include <vector>

#include "triquad/quadsys.hpp"

namespace triquad {

// Smooth compactly supported cutoff. Product kind (default):
//   w(x) = prod_i exp(-1/(1-(x_i/C)^2)) on |x_i| < C,
// radial kind: w(x) = phi(|x|^2), phi(s) = exp(-1/(1-(s/C^2)^2)) on |s| < C^2.
// Both are nonneg, C^infty, supported in [-C, C]^k, positive for |x| <= C/2.
// The transform-based integral routes below require the radial kind; the
// lattice and tensor-quadrature routes take either.
enum class WeightKind { ProductBump, RadialBump };

struct Weight {
    WeightKind kind = WeightKind::ProductBump;
    double C = 1.0;

    double bump(double t) const;        // 1-D product factor
    double radial_phi(double s) const;  // radial profile in s = |x|^2
    double operator()(const double* x, int k) const;
    double operator()(const std::vector<double>& x) const {
        return (*this)(x.data(), (int)x.size());
    }
    double deriv_bound() const;  // crude sup|d^2 factor| metadata for error heuristics
    static Weight radial(double C = 1.0) { return Weight{WeightKind::RadialBump, C}; }
};

// Fourier cache of g(s) = phi(s) exp(s) for the radial bump, giving the
// Gaussian resolution
//   w(x) = exp(-|x|^2) * int ghat(w) e(w |x|^2) dw
// that every transform route rests on. ghat decays superpolynomially; the
// cache covers |w| <= W() and reports the measured leftover mass tail().
class WeightTransform {
  public:
    explicit WeightTransform(double C = 1.0, double tail_tol = 1e-10);
    cplx ghat(double omega) const;  // cubic interpolation; 0 beyond W()
    double W() const { return W_; }
    double tail() const { return tail_; }
    double total() const { return total_; }  // int |ghat|, the natural scale
    double support() const { return C_; }

  private:
    double C_;
    double W_ = 0, tail_ = 0, total_ = 0, h_ = 0;
    std::vector<cplx> grid_;  // ghat on [-W, W], step h_
};

// Process-wide transform cache keyed by the support radius.
const WeightTransform& transform_cache(double C);

struct QuadratureResult {
    cplx value{0, 0};
    double est_error = 0;
    u64 evaluations = 0;
    bool flagged = false;  // budget exhausted / precondition soft-failed
};

// Sorted |eigenvalues| of nu1 Q1 + nu2 Q2 + nu3 Q3, ascending.  The product
// of the eigenvalues is checked against an LU determinant of the same matrix
// at 1e-8 relative; a mismatch throws.
std::vector<double> pencil_eigs(const TripleSystem& sys, const std::array<double, 3>& nu);

// I(nu; lambda) = int w(x) e(nu.Q(x) + lambda.x) dx, radial-kind engine.
// Diagonalizing nu.Q = O diag(rho) O^T and resolving w into Gaussians turns
// the x-integral into a product of 1-D Gaussians with a_j = 1 - 2 pi i (rho_j + w):
//   I = int ghat(w) prod_j sqrt(pi/a_j) exp(-pi^2 mu_j^2 / a_j) dw,  mu = O^T lambda.
// The w-panels adapt to the resonance near rho_j + w = 0 whose phase speed and
// amplitude deficit are both proportional to sum_j mu_j^2 / |a_j|^2.
cplx osc_I(const TripleSystem& sys, const WeightTransform& wt,
           const std::array<double, 3>& nu, const std::vector<double>& lambda);

// Same engine with the eigendecomposition of nu.Q shared across many lambda.
std::vector<cplx> osc_I_many(const TripleSystem& sys, const WeightTransform& wt,
                             const std::array<double, 3>& nu,
                             const std::vector<std::vector<double>>& lambdas);

// Same integral by dense tensor-product quadrature, cost nodes^k; small-k
// oracle for either weight kind.
cplx osc_I_direct(const TripleSystem& sys, const Weight& wgt,
                  const std::array<double, 3>& nu, const std::vector<double>& lambda,
                  int nodes_per_axis, const RunLimits& lim = {});

// I_w(theta), general entry point with an error estimate.  Radial weights go
// through the transform engine; product weights through oscillation-aware
// tensor panels (cost grows like nodes^k, so only small k is practical — the
// result is flagged when the node budget forces a coarser grid).
QuadratureResult osc_integral(const TripleSystem& sys, const std::array<double, 3>& theta,
                              const std::vector<double>& lambda, const Weight& wgt,
                              const RunLimits& lim = {});

// Truncated fiber integral J(mu; R) = int_{[-R,R]^3} I_w(theta) e(-theta.mu) dtheta
// for the whole dyadic family R0, 2 R0, ..., R0 2^doublings in one pass.
// Consecutive differences are assembled directly from the windowed transform
// (they live on ranges where the window actually moves), so increment[m] stays
// accurate even when |J(2R) - J(R)| << |J|.  Requires Q1 = I: the theta_1
// direction is then absorbed into the Gaussian resolution exactly and only a
// 2-D cell sum over (theta_2, theta_3) remains.  All R must be multiples of 1/2.
struct JFamily {
    std::vector<double> R;
    std::vector<double> J;
    std::vector<double> increment;  // increment[m] = J(R[m+1]) - J(R[m])
    double imag_max = 0;            // |Im| leakage, should sit at rounding level
};
JFamily jint_family(const TripleSystem& sys, const WeightTransform& wt,
                    const std::array<double, 3>& mu, double R0, int doublings,
                    const RunLimits& lim = {});

// Single-R convenience wrapper around jint_family.
double jint(const TripleSystem& sys, const WeightTransform& wt,
            const std::array<double, 3>& mu, double R, const RunLimits& lim = {});

// J_w(mu; R) with the dyadic increment table down from R/2^d, d chosen so the
// family starts at 2 (or at R itself when R < 4).  Radial weights only.
// flagged reflects the k <= 6 convergence caveat, not a numerical failure.
struct SingularIntegral {
    QuadratureResult result;
    JFamily family;
};
SingularIntegral singular_integral(const TripleSystem& sys, const std::array<double, 3>& mu,
                                   double R, const Weight& wgt, const RunLimits& lim = {});

// General-system fallback: tensor quadrature of I_w(theta) e(-theta.mu) over
// [-R,R]^3.  Cost grows like (R panels_per_unit)^3 osc_I evaluations; meant for
// small R and for systems with Q1 != I.
cplx jint_direct(const TripleSystem& sys, const WeightTransform& wt,
                 const std::array<double, 3>& mu, double R, int panels_per_unit,
                 const RunLimits& lim = {});

// Window-kernel oracle for the fiber density:
//   eps^{-3} int_{max_i |Q_i(x)-mu_i| <= eps} w(x) prod_i (1 - |Q_i(x)-mu_i|/eps) dx
// -> J_w(mu) as eps -> 0, with O(eps^2) bias at interior mu.  Directions are a
// Halton net on the sphere; each radial slice is integrated semi-analytically
// over the exact interval where all three window conditions hold, so the only
// stochastic error is the directional average (estimated from block spread).
// Radial weights only.
QuadratureResult singular_integral_oracle(const TripleSystem& sys, const std::array<double, 3>& mu,
                                          double eps, const Weight& wgt, u64 ndirs,
                                          const RunLimits& lim = {});

// Least-squares slope of log2|y| against log2 x, skipping zero/non-finite y.
double log2_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace triquad
