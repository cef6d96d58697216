#pragma once

// Circle-method multipliers on T^2: the smooth cutoff eta, the rational
// shells R_s, the approximating kernels L, K, K', the Lo/Hi split of the
// normalized divisor multiplier, the V/U multipliers, arc classification and
// the Ramanujan-sum moment.
//
// Normalization: every multiplier here is scaled so that its value at a
// rational a/q is about 1/N(q), the size of A_N-hat(a/q) = S_N-hat(a/q)/D(N).

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gdiv/arith.hpp"
#include "gdiv/error.hpp"
#include "gdiv/expsum.hpp"
#include "gdiv/fft.hpp"
#include "gdiv/gaussint.hpp"
#include "gdiv/numeric.hpp"
#include "gdiv/parallel.hpp"

namespace gdiv {

inline constexpr int kMaxShell = 20;

/// Smooth step: 1 for t <= 0, 0 for t >= 1.
inline double bump_step(double t)
{
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / (1.0 - t));
    const double b = std::exp(-1.0 / t);
    return a / (a + b);
}

/// Radial cutoff: 1 on N(x) <= 1/16, 0 on N(x) >= 1/8.
inline double eta(cplx x)
{
    return bump_step((std::norm(x) - 1.0 / 16.0) * 16.0);
}

inline double eta_s(int s, cplx x) { return eta(std::ldexp(1.0, s) * x); }

/// Squared radius of the support of eta_s.
inline double eta_s_support_norm(int s) { return std::ldexp(1.0, -2 * s) / 8.0; }

/// Canonical moduli q with 2^s <= N(q) < 2^{s+1}.
inline std::vector<GaussInt> shell_moduli(int s)
{
    require(s >= 0 && s <= kMaxShell, "shell index out of range");
    return canonical_moduli(i64{1} << s, (i64{2} << s) - 1);
}

/// R_s: reduced rationals a/q with q canonical in shell s, one per torus point.
inline std::vector<ReducedRational> enumerate_Rs(int s)
{
    std::vector<ReducedRational> out;
    for (auto q : shell_moduli(s))
        for (auto a : enumerate_Aq(q)) out.emplace_back(a, q);
    return out;
}

/// A rational a/q together with the offset beta = alpha - a/q taken at its
/// smallest representative.
struct NearRational {
    ReducedRational rational;
    cplx offset;
};

/// Reduced a/q (q fixed) with N(alpha - a/q) <= radius2 on the torus.
inline std::vector<NearRational> rationals_near(TorusPoint alpha, GaussInt q, double radius2)
{
    require(!q.is_zero(), "rationals_near: zero modulus");
    const cplx qc(static_cast<double>(q.re), static_cast<double>(q.im));
    const cplx z = cplx(alpha.x, alpha.y) * qc;
    const double rad = std::sqrt(radius2) * std::abs(qc);
    const i64 cx = std::llround(z.real()), cy = std::llround(z.imag());
    const i64 reach = static_cast<i64>(std::ceil(rad)) + 1;
    std::vector<NearRational> out;
    for (i64 dy = -reach; dy <= reach; ++dy)
        for (i64 dx = -reach; dx <= reach; ++dx) {
            const GaussInt a{cx + dx, cy + dy};
            const cplx diff = z - cplx(static_cast<double>(a.re), static_cast<double>(a.im));
            if (std::norm(diff) > rad * rad) continue;
            if (!coprime(a, q)) continue;
            ReducedRational r{a, q};
            const cplx beta = diff / qc;
            bool dup = false;
            for (auto& e : out)
                if (e.rational == r) {
                    if (std::norm(beta) < std::norm(e.offset)) e.offset = beta;
                    dup = true;
                }
            if (!dup) out.push_back({r, beta});
        }
    return out;
}

/// Members a/q of R_s whose eta_s bump contains alpha.
inline std::vector<NearRational> shell_neighbors(int s, TorusPoint alpha, double radius2)
{
    std::vector<NearRational> out;
    for (auto q : shell_moduli(s))
        for (auto& hit : rationals_near(alpha, q, radius2)) out.push_back(hit);
    return out;
}

namespace detail {

// (sum e(<n,beta>), sum log N(n) e(<n,beta>)) over 0 < N(n) <= N.
inline std::pair<cplx, cplx> ball_sums(i64 N, cplx beta)
{
    const i64 r = isqrt(N);
    const PhaseTables ph(r, TorusPoint{beta.real(), beta.imag()});
    CompensatedComplexSum plain, logw;
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        cplx row_p{0.0, 0.0}, row_l{0.0, 0.0};
        for (i64 x = -w; x <= w; ++x) {
            if (x == 0 && y == 0) continue;
            const cplx e = ph.x(x);
            row_p += e;
            row_l += std::log(static_cast<double>(x * x + y * y)) * e;
        }
        plain.add(row_p * ph.y(y));
        logw.add(row_l * ph.y(y));
    }
    return {plain.value(), logw.value()};
}

} // namespace detail

/// M_hat_N(alpha) = (1 / (pi N)) sum_{0 < N(n) <= N} e(<n, alpha>).
inline cplx M_hat(i64 N, cplx alpha)
{
    require(N >= 1, "M_hat: N must be >= 1");
    return detail::ball_sums(N, alpha).first / (std::numbers::pi * static_cast<double>(N));
}

inline cplx M_hat(i64 N, TorusPoint alpha) { return M_hat(N, cplx(alpha.x, alpha.y)); }

/// L_hat_{N,q}(beta) = (1 / (pi N log N N(q))) sum_{0 < N(n) <= N}
///   (log N(n) - 2 log N(q) + 2 kappa) e(<n, beta>).
inline cplx L_hat(i64 N, i64 q_norm, cplx beta, double kappa)
{
    require(N >= 2, "L_hat: N must be >= 2");
    require(q_norm >= 1, "L_hat: N(q) must be >= 1");
    const auto [plain, logw] = detail::ball_sums(N, beta);
    const double n = static_cast<double>(N);
    const double shift = 2.0 * kappa - 2.0 * std::log(static_cast<double>(q_norm));
    return (logw + shift * plain) / (std::numbers::pi * n * std::log(n) * static_cast<double>(q_norm));
}

inline cplx L_hat(i64 N, GaussInt q, TorusPoint alpha, double kappa)
{
    return L_hat(N, norm(q), cplx(alpha.x, alpha.y), kappa);
}

/// K_hat_{N,s}(alpha) = sum_{a/q in R_s} L_hat_{N,q}(alpha - a/q) eta_s(alpha - a/q).
inline cplx K_hat(i64 N, int s, TorusPoint alpha, double kappa)
{
    cplx acc{0.0, 0.0};
    for (const auto& hit : shell_neighbors(s, alpha, eta_s_support_norm(s))) {
        const double e = eta_s(s, hit.offset);
        if (e == 0.0) continue;
        acc += L_hat(N, hit.rational.q_norm(), hit.offset, kappa) * e;
    }
    return acc;
}

/// K'_hat_{N,s}(alpha) = sum_{a/q in R_s} M_hat_N(alpha - a/q) eta_s(alpha - a/q) / N(q).
inline cplx Kprime_hat(i64 N, int s, TorusPoint alpha)
{
    cplx acc{0.0, 0.0};
    for (const auto& hit : shell_neighbors(s, alpha, eta_s_support_norm(s))) {
        const double e = eta_s(s, hit.offset);
        if (e == 0.0) continue;
        acc += M_hat(N, hit.offset) * e / static_cast<double>(hit.rational.q_norm());
    }
    return acc;
}

inline void require_delta(double delta)
{
    require(delta > 0.0 && delta <= 1.0 / 20.0, "delta must lie in (0, 1/20]");
}

/// Largest s with 2^s <= N^delta (the shells kept in the low part).
inline int lo_shell_max(i64 N, double delta)
{
    const double limit = std::pow(static_cast<double>(N), delta);
    int s = 0;
    while (s < kMaxShell && std::ldexp(1.0, s + 1) <= limit) ++s;
    return s;
}

/// Lo_hat_{N,delta} = sum_{2^s <= N^delta} K_hat_{N,s}.
inline cplx lo_hat(i64 N, double delta, TorusPoint alpha, double kappa)
{
    require_delta(delta);
    cplx acc{0.0, 0.0};
    for (int s = 0; s <= lo_shell_max(N, delta); ++s) acc += K_hat(N, s, alpha, kappa);
    return acc;
}

/// The same sum with K' in place of K.
inline cplx lo_prime_hat(i64 N, double delta, TorusPoint alpha)
{
    require_delta(delta);
    cplx acc{0.0, 0.0};
    for (int s = 0; s <= lo_shell_max(N, delta); ++s) acc += Kprime_hat(N, s, alpha);
    return acc;
}

/// A_N-hat(alpha) = S_N-hat(alpha) / D(N).
inline cplx A_hat(const DivisorTable& table, i64 N, TorusPoint alpha)
{
    return weighted_expsum_direct(table, N, Sector::full(), alpha).value /
           static_cast<double>(table.D(N));
}

/// Hi_hat = A_N-hat - Lo_hat, the exact residual.
inline cplx hi_hat(i64 N, double delta, TorusPoint alpha, const DivisorTable& table, double kappa)
{
    require_delta(delta);
    return A_hat(table, N, alpha) - lo_hat(N, delta, alpha, kappa);
}

struct ArcClass {
    bool major{false};
    std::optional<ReducedRational> witness;
    double delta{0.0};
};

/// Major iff some a/q with N(q) <= N^delta has N(alpha - a/q) <= N^{-1+delta/2} / N(q).
/// The witness is the one with the smallest N(q).
inline ArcClass classify_arc(TorusPoint alpha, i64 N, double delta)
{
    require_delta(delta);
    const double n = static_cast<double>(N);
    const auto q_max = static_cast<i64>(std::floor(std::pow(n, delta) + 1e-12));
    const double scale = std::pow(n, -1.0 + delta / 2.0);
    for (auto q : canonical_moduli(1, std::max<i64>(q_max, 1))) {
        const double r2 = scale / static_cast<double>(norm(q));
        auto hits = rationals_near(alpha, q, r2);
        if (!hits.empty()) return {true, hits.front().rational, delta};
    }
    return {false, std::nullopt, delta};
}

/// True when the cutoff switches V_{N,s}, U_{N,s} off: 2^{s+1} > N^{1/20}.
inline bool vu_cut_off(i64 N, int s)
{
    // 2^{s+1} > N^{1/20}  <=>  2^{20(s+1)} > N, compared exactly.
    if (20 * (s + 1) >= 63) return true;
    return (i64{1} << (20 * (s + 1))) > N;
}

/// V_hat_{N,s}(alpha) = sum_{a/q in R_s} eta(sqrt N (alpha - a/q)) / N(q);
/// identically 0 when the cutoff applies and `cutoff` is set.
inline cplx V_hat(i64 N, int s, TorusPoint alpha, bool cutoff = true)
{
    require(N >= 1, "V_hat: N must be >= 1");
    if (cutoff && vu_cut_off(N, s)) return {0.0, 0.0};
    const double sn = std::sqrt(static_cast<double>(N));
    double acc = 0.0;
    for (const auto& hit : shell_neighbors(s, alpha, 1.0 / (8.0 * static_cast<double>(N))))
        acc += eta(sn * hit.offset) / static_cast<double>(hit.rational.q_norm());
    return {acc, 0.0};
}

/// U_hat_{N,s}(alpha) = sum_{a/q in R_s} eta(sqrt N (alpha - a/q)).
inline cplx U_hat(i64 N, int s, TorusPoint alpha, bool cutoff = true)
{
    require(N >= 1, "U_hat: N must be >= 1");
    if (cutoff && vu_cut_off(N, s)) return {0.0, 0.0};
    const double sn = std::sqrt(static_cast<double>(N));
    double acc = 0.0;
    for (const auto& hit : shell_neighbors(s, alpha, 1.0 / (8.0 * static_cast<double>(N))))
        acc += eta(sn * hit.offset);
    return {acc, 0.0};
}

/// f-tilde-hat(alpha) = fhat(alpha) * sum_{a/q in R_s} eta_s(alpha - a/q) / N(q).
inline cplx f_tilde_hat(int s, TorusPoint alpha, cplx fhat_value)
{
    double acc = 0.0;
    for (const auto& hit : shell_neighbors(s, alpha, eta_s_support_norm(s)))
        acc += eta_s(s, hit.offset) / static_cast<double>(hit.rational.q_norm());
    return fhat_value * acc;
}

/// V_N = sum_s V_{N,s} over the shells that survive the cutoff (or, with the
/// cutoff disabled, over s <= s_max).
inline cplx V_total_hat(i64 N, TorusPoint alpha, bool cutoff = true, int s_max = 0)
{
    cplx acc{0.0, 0.0};
    const int top = cutoff ? kMaxShell : s_max;
    for (int s = 0; s <= top; ++s) {
        if (cutoff && vu_cut_off(N, s)) break;
        acc += V_hat(N, s, alpha, cutoff);
    }
    return acc;
}

/// ( (1/#n) sum_{0 < N(n) <= N} ( sum_{N(q) < Q} |tau_q(n)| / N(q) )^k )^{1/k},
/// the average taken over the nonzero lattice points of the ball.
inline double ramanujan_moment(i64 N, i64 Q, int k)
{
    require(Q >= 1 && k >= 1, "ramanujan_moment: need Q >= 1 and k >= 1");
    require(static_cast<double>(N) > std::pow(static_cast<double>(Q), k),
            "ramanujan_moment: requires N > Q^k");

    // tau_q(n) is periodic in both coordinates of n with period N(q).
    struct Dense {
        i64 period;
        double weight;
        std::vector<double> abs_tau;
    };
    std::vector<Dense> tables;
    for (auto q : canonical_moduli(1, Q - 1)) {
        const i64 m = norm(q);
        RamanujanTable tau(q);
        Dense t{m, 1.0 / static_cast<double>(m), std::vector<double>(static_cast<std::size_t>(m * m))};
        for (i64 y = 0; y < m; ++y)
            for (i64 x = 0; x < m; ++x)
                t.abs_tau[static_cast<std::size_t>(y * m + x)] =
                    static_cast<double>(std::llabs(tau({x, y})));
        tables.push_back(std::move(t));
    }

    const i64 r = isqrt(N);
    std::vector<double> rows(static_cast<std::size_t>(2 * r + 1), 0.0);
    parallel_for(rows.size(), [&](std::size_t i) {
        const i64 y = static_cast<i64>(i) - r;
        const i64 w = isqrt(N - y * y);
        CompensatedSum acc;
        for (i64 x = -w; x <= w; ++x) {
            if (x == 0 && y == 0) continue;
            double inner = 0.0;
            for (const auto& t : tables)
                inner += t.weight * t.abs_tau[static_cast<std::size_t>(floor_mod(y, t.period) * t.period +
                                                                       floor_mod(x, t.period))];
            acc.add(std::pow(inner, k));
        }
        rows[i] = acc.value();
    });
    CompensatedSum total;
    for (double v : rows) total.add(v);
    const double count = static_cast<double>(r2_prefix(N) - 1);
    return std::pow(total.value() / count, 1.0 / k);
}

/// Spatial and Fourier evaluations of the low-part kernel Lo_{N,delta}.
///
/// Spatial: Lo(n) = sum_q tau_q(n) (L_{N,q} * eta_s-check)(n), s = shell(q).
/// Fourier: Lo(n) = integral of Lo_hat(alpha) e(-<n, alpha>), sampled on a
/// G x G grid. Both are periodized with period G, so they agree up to
/// rounding when the factorization holds.
class LowPartKernel {
public:
    LowPartKernel(i64 N, double delta, double kappa) : N_(N), delta_(delta), kappa_(kappa)
    {
        require_delta(delta);
        require(N >= 2, "LowPartKernel: N must be >= 2");
        s_max_ = lo_shell_max(N, delta);
        const auto need = 2 * static_cast<long long>(std::ceil(8.0 * std::ldexp(1.0, s_max_) *
                                                              std::sqrt(static_cast<double>(N))));
        G_ = next_pow2(need);
        require(G_ <= 4096, "LowPartKernel: grid too large for the validation path");
        for (int s = 0; s <= s_max_; ++s)
            for (auto q : shell_moduli(s)) moduli_.push_back(q);
        build_spatial();
    }

    int grid() const { return G_; }
    int shell_max() const { return s_max_; }
    const std::vector<GaussInt>& moduli() const { return moduli_; }

    /// Spatial-path value, complex so the imaginary residue can be inspected.
    cplx spatial_complex(GaussInt n) const
    {
        cplx acc{0.0, 0.0};
        const std::size_t cell = cell_index(n);
        for (std::size_t i = 0; i < moduli_.size(); ++i)
            acc += static_cast<double>(tau_[i](n)) * conv_[i][cell];
        return acc;
    }

    double spatial(GaussInt n) const { return spatial_complex(n).real(); }

    /// Sum of the spatial kernel over one period box.
    cplx spatial_mass() const
    {
        CompensatedComplexSum acc;
        for (i64 y = 0; y < G_; ++y)
            for (i64 x = 0; x < G_; ++x) acc.add(spatial_complex({x, y}));
        return acc.value();
    }

    /// Fourier-path value; the grid transform is computed on first use.
    cplx fourier(GaussInt n)
    {
        if (fourier_.empty()) build_fourier();
        return fourier_[cell_index(n)];
    }

private:
    std::size_t cell_index(GaussInt n) const
    {
        return static_cast<std::size_t>(floor_mod(n.im, G_) * G_ + floor_mod(n.re, G_));
    }

    cplx grid_alpha(int kx, int ky) const
    {
        // centered representative of (kx/G, ky/G)
        auto c = [&](int k) { return (2 * k >= G_ ? k - G_ : k) / static_cast<double>(G_); };
        return {c(kx), c(ky)};
    }

    void build_spatial()
    {
        const std::size_t cells = static_cast<std::size_t>(G_) * static_cast<std::size_t>(G_);
        const double scale = 1.0 / static_cast<double>(cells);
        const double n = static_cast<double>(N_);
        const i64 r = isqrt(N_);
        for (auto q : moduli_) {
            tau_.emplace_back(q);
            const int s = shell_of(norm(q));
            // L_{N,q} on the grid, then its multiplier at the grid frequencies.
            ComplexDft2D back(G_, G_, FFTW_BACKWARD);
            std::fill(back.data(), back.data() + cells, cplx{0.0, 0.0});
            const double qn = static_cast<double>(norm(q));
            const double shift = 2.0 * kappa_ - 2.0 * std::log(qn);
            const double c = 1.0 / (std::numbers::pi * n * std::log(n) * qn);
            for (i64 y = -r; y <= r; ++y) {
                const i64 w = isqrt(N_ - y * y);
                for (i64 x = -w; x <= w; ++x) {
                    if (x == 0 && y == 0) continue;
                    back.data()[cell_index({x, y})] +=
                        c * (std::log(static_cast<double>(x * x + y * y)) + shift);
                }
            }
            back.execute();
            // times eta_s at the same frequencies, then back to space: L * eta_s-check.
            ComplexDft2D fwd(G_, G_, FFTW_FORWARD);
            for (int ky = 0; ky < G_; ++ky)
                for (int kx = 0; kx < G_; ++kx) {
                    const std::size_t k = static_cast<std::size_t>(ky) * G_ + kx;
                    fwd.data()[k] = back.data()[k] * eta_s(s, grid_alpha(kx, ky));
                }
            fwd.execute();
            std::vector<cplx> conv(cells);
            for (std::size_t k = 0; k < cells; ++k) conv[k] = fwd.data()[k] * scale;
            conv_.push_back(std::move(conv));
        }
    }

    void build_fourier()
    {
        const std::size_t cells = static_cast<std::size_t>(G_) * static_cast<std::size_t>(G_);
        ComplexDft2D fwd(G_, G_, FFTW_FORWARD);
        cplx* data = fwd.data();
        parallel_for(static_cast<std::size_t>(G_), [&](std::size_t ky) {
            for (int kx = 0; kx < G_; ++kx) {
                const cplx a = grid_alpha(kx, static_cast<int>(ky));
                data[ky * static_cast<std::size_t>(G_) + static_cast<std::size_t>(kx)] =
                    lo_hat(N_, delta_, TorusPoint{a.real(), a.imag()}, kappa_);
            }
        });
        fwd.execute();
        fourier_.resize(cells);
        const double scale = 1.0 / static_cast<double>(cells);
        for (std::size_t k = 0; k < cells; ++k) fourier_[k] = data[k] * scale;
    }

    i64 N_;
    double delta_;
    double kappa_;
    int s_max_{0};
    int G_{0};
    std::vector<GaussInt> moduli_;
    std::vector<RamanujanTable> tau_;
    std::vector<std::vector<cplx>> conv_;
    std::vector<cplx> fourier_;
};

/// Standalone spatial evaluation (builds the kernel each call; use
/// LowPartKernel directly for many points).
inline double lo_kernel_spatial(i64 N, double delta, GaussInt n, double kappa)
{
    return LowPartKernel(N, delta, kappa).spatial(n);
}

/// Frequency sample mixing uniform points with points close to low-height
/// rationals (the region where the multipliers have structure).
inline std::vector<TorusPoint> stratified_grid(std::size_t count, std::uint64_t seed, int max_shell = 4)
{
    std::mt19937_64 rng(trial_seed(seed, 0));
    std::vector<std::vector<ReducedRational>> shells;
    for (int s = 0; s <= max_shell; ++s) shells.push_back(enumerate_Rs(s));
    std::vector<TorusPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (i % 2 == 0) {
            const double x = uniform01(rng);
            const double y = uniform01(rng);
            out.emplace_back(x, y);
            continue;
        }
        const auto& shell = shells[static_cast<std::size_t>(rng() % shells.size())];
        const auto& r = shell[static_cast<std::size_t>(rng() % shell.size())];
        const double mag = std::pow(10.0, -1.0 - 4.0 * uniform01(rng)) / std::sqrt(static_cast<double>(r.q_norm()));
        const double ang = kTwoPi * uniform01(rng);
        const TorusPoint base = r.torus();
        out.emplace_back(base.x + mag * std::cos(ang), base.y + mag * std::sin(ang));
    }
    return out;
}

/// A multiplier sampled on a frequency grid.
struct MultiplierScan {
    std::string kind;
    i64 N{0};
    double param{0.0}; // delta or s
    std::vector<TorusPoint> grid;
    std::vector<cplx> values;
    std::vector<double> bound_shape;
};

/// Evaluates fn on every grid point in parallel; result order follows the grid.
template <class Fn, class Shape>
MultiplierScan scan_multiplier(std::string kind, i64 N, double param, std::vector<TorusPoint> grid,
                               Fn&& fn, Shape&& shape)
{
    MultiplierScan scan{std::move(kind), N, param, std::move(grid), {}, {}};
    scan.values.resize(scan.grid.size());
    scan.bound_shape.resize(scan.grid.size());
    parallel_for(scan.grid.size(), [&](std::size_t i) {
        scan.values[i] = fn(scan.grid[i]);
        scan.bound_shape[i] = shape(scan.grid[i]);
    });
    return scan;
}

} // namespace gdiv
