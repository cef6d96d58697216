#pragma once

// Exponential sums over lattice disks and sectors, plain, log-weighted and
// divisor-weighted, with the rational-frequency main term and its
// rotation-averaged error.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>
#include <vector>

#include "gdiv/arith.hpp"
#include "gdiv/error.hpp"
#include "gdiv/gaussint.hpp"
#include "gdiv/numeric.hpp"
#include "gdiv/parallel.hpp"

namespace gdiv {

using cplx = std::complex<double>;

enum class SumMethod { direct, hyperbola };

inline const char* to_string(SumMethod m) { return m == SumMethod::direct ? "direct" : "hyperbola"; }

struct ExpSumResult {
    cplx value;
    i64 n_terms{0};
    SumMethod method{SumMethod::direct};
};

/// Tables ex[x] = e(x * alpha.x), ey[y] = e(y * alpha.y) for |x|, |y| <= r, so
/// that e(<n, alpha>) = ex[n.re] * ey[n.im].
class PhaseTables {
public:
    PhaseTables(i64 radius, TorusPoint alpha) : r_(radius)
    {
        ex_.resize(static_cast<std::size_t>(2 * r_ + 1));
        ey_.resize(ex_.size());
        for (i64 k = -r_; k <= r_; ++k) {
            // Reduce k * alpha mod 1 before the trig call to keep the argument small.
            const double tx = static_cast<double>(k) * alpha.x;
            const double ty = static_cast<double>(k) * alpha.y;
            ex_[static_cast<std::size_t>(k + r_)] = expi(tx - std::floor(tx));
            ey_[static_cast<std::size_t>(k + r_)] = expi(ty - std::floor(ty));
        }
    }

    cplx x(i64 k) const { return ex_[static_cast<std::size_t>(k + r_)]; }
    cplx y(i64 k) const { return ey_[static_cast<std::size_t>(k + r_)]; }
    cplx operator()(GaussInt n) const { return x(n.re) * y(n.im); }

private:
    i64 r_;
    std::vector<cplx> ex_;
    std::vector<cplx> ey_;
};

/// Sum of weights w(n) e(<n, alpha>) over 0 < N(n) <= N inside a sector,
/// accumulated row by row with compensation.
template <class Weight>
ExpSumResult disk_expsum(i64 N, const Sector& sector, TorusPoint alpha, Weight&& weight)
{
    require(N >= 0, "exponential sum: N must be >= 0");
    const i64 r = isqrt(N);
    const PhaseTables ph(r, alpha);
    CompensatedComplexSum acc;
    i64 terms = 0;
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        cplx row{0.0, 0.0};
        for (i64 x = -w; x <= w; ++x) {
            const GaussInt n{x, y};
            if (n.is_zero() || !sector.contains(n)) continue;
            row += weight(n) * ph.x(x);
            ++terms;
        }
        acc.add(row * ph.y(y));
    }
    return {acc.value(), terms, SumMethod::direct};
}

/// sum over n in Gamma_N(omega + t) of e(<n, alpha>). The origin is counted
/// only for the full circle, matching lattice_count_sector.
inline cplx lattice_expsum(i64 N, const Sector& sector, TorusPoint alpha)
{
    cplx v = disk_expsum(N, sector, alpha, [](GaussInt) { return 1.0; }).value;
    if (sector.is_full() && N >= 0) v += 1.0;
    return v;
}

/// sum_{0 < N(n) <= N} log N(n) e(<n, alpha>).
inline cplx log_weighted_expsum(i64 N, TorusPoint alpha)
{
    return disk_expsum(N, Sector::full(), alpha, [](GaussInt n) {
               return std::log(static_cast<double>(norm(n)));
           }).value;
}

/// Weighted points sorted by argument with prefix sums, so that the sum over
/// any rotated sector costs two binary searches. The inclusion test uses the
/// same comparisons as Sector::contains_angle.
class AngularPrefix {
public:
    /// `items` holds (arg(n), weight) pairs for nonzero n; `origin` is the
    /// weight of n = 0, included only for full-circle sectors.
    AngularPrefix(std::vector<std::pair<double, cplx>> items, cplx origin = {0.0, 0.0})
        : origin_(origin)
    {
        std::sort(items.begin(), items.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        theta_.reserve(items.size());
        prefix_.reserve(items.size() + 1);
        std::complex<long double> acc{0.0L, 0.0L};
        prefix_.push_back(acc);
        for (const auto& [th, w] : items) {
            theta_.push_back(th);
            acc += std::complex<long double>(w.real(), w.imag());
            prefix_.push_back(acc);
        }
    }

    cplx sum(const Sector& s) const
    {
        if (s.is_full()) return to_double(prefix_.back()) + origin_;
        const auto [start, end] = s.window();
        const auto lo = rank(start);
        if (end <= kTwoPi) return to_double(prefix_[rank(end)] - prefix_[lo]);
        return to_double(prefix_.back() - prefix_[lo] + prefix_[rank(end - kTwoPi)]);
    }

    /// (1/T) sum_j |sum(s rotated by 2 pi j / T) - shift|.
    double rotation_mean_abs(const Sector& s, int T, cplx shift = {0.0, 0.0}) const
    {
        require(T >= 1, "rotation average needs T >= 1");
        CompensatedSum acc;
        for (int j = 0; j < T; ++j)
            acc.add(std::abs(sum(s.rotated(kTwoPi * j / T)) - shift));
        return acc.value() / T;
    }

private:
    std::size_t rank(double th) const
    {
        return static_cast<std::size_t>(std::lower_bound(theta_.begin(), theta_.end(), th) -
                                         theta_.begin());
    }
    static cplx to_double(std::complex<long double> z)
    {
        return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
    }

    std::vector<double> theta_;
    std::vector<std::complex<long double>> prefix_;
    cplx origin_;
};

/// Mean over T equispaced rotations t_j = 2 pi j / T of |lattice_expsum(N, omega + t_j, alpha)|.
inline double rotation_avg_lattice_expsum(i64 N, const Sector& sector, TorusPoint alpha, int T)
{
    const i64 r = isqrt(N);
    const PhaseTables ph(r, alpha);
    std::vector<std::pair<double, cplx>> items;
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        for (i64 x = -w; x <= w; ++x)
            if (x != 0 || y != 0) items.emplace_back(angle({x, y}), ph(GaussInt{x, y}));
    }
    return AngularPrefix(std::move(items), 1.0).rotation_mean_abs(sector, T);
}

/// S_hat_{N,t}^omega(alpha) = sum d(n) e(<n, alpha>) over the sector, by direct summation.
inline ExpSumResult weighted_expsum_direct(const DivisorTable& table, i64 N, const Sector& sector,
                                           TorusPoint alpha)
{
    require(N >= 0 && N <= table.nmax(), "weighted_expsum_direct: N exceeds the table");
    return disk_expsum(N, sector, alpha,
                       [&](GaussInt n) { return static_cast<double>(table.d(n)); });
}

namespace detail {

// sum_k counts[k] e(k / m), with the integer counts kept exact until the end.
inline cplx phase_histogram_sum(const std::vector<i64>& counts)
{
    const auto m = static_cast<i64>(counts.size());
    CompensatedComplexSum acc;
    for (i64 k = 0; k < m; ++k)
        if (counts[static_cast<std::size_t>(k)] != 0)
            acc.add(static_cast<double>(counts[static_cast<std::size_t>(k)]) *
                    (k == 0 ? cplx{1.0, 0.0} : expi(static_cast<double>(k) / static_cast<double>(m))));
    return acc.value();
}

} // namespace detail

/// Direct S_hat at a rational frequency. Weights are binned by the exact phase
/// index of <n, a/q>, so for q = 1 the result is D(N) exactly.
inline ExpSumResult weighted_expsum_direct(const DivisorTable& table, i64 N, const Sector& sector,
                                           const ReducedRational& alpha)
{
    require(N >= 0 && N <= table.nmax(), "weighted_expsum_direct: N exceeds the table");
    std::vector<i64> counts(static_cast<std::size_t>(alpha.q_norm()), 0);
    const i64 r = isqrt(N);
    i64 terms = 0;
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        for (i64 x = -w; x <= w; ++x) {
            const GaussInt n{x, y};
            if (n.is_zero() || !sector.contains(n)) continue;
            counts[static_cast<std::size_t>(alpha.phase_index(n))] += table.d(n);
            ++terms;
        }
    }
    return {detail::phase_histogram_sum(counts), terms, SumMethod::direct};
}

/// S_hat at a rational frequency without a divisor table. Ordered pairs (m, n)
/// with N(mn) <= N are enumerated with the smaller-norm factor n satisfying
/// N(n)^2 <= N: each such pair counts twice, minus once when both factors are
/// small, so every product is counted exactly once per factorization.
inline ExpSumResult weighted_expsum_hyperbola(i64 N, const Sector& sector,
                                              const ReducedRational& alpha)
{
    require(N >= 1, "weighted_expsum_hyperbola: N must be >= 1");
    const i64 s = isqrt(N);
    const i64 rs = isqrt(s);
    std::vector<GaussInt> small;
    for (i64 y = -rs; y <= rs; ++y)
        for (i64 x = -rs; x <= rs; ++x) {
            const GaussInt n{x, y};
            if (!n.is_zero() && norm(n) <= s) small.push_back(n);
        }

    const std::size_t m_q = static_cast<std::size_t>(alpha.q_norm());
    std::vector<std::vector<i64>> hist(small.size());
    std::vector<i64> terms(small.size(), 0);
    parallel_for(small.size(), [&](std::size_t i) {
        const GaussInt n = small[i];
        auto& h = hist[i];
        h.assign(m_q, 0);
        const i64 limit = N / norm(n);
        const i64 r = isqrt(limit);
        for (i64 y = -r; y <= r; ++y) {
            const i64 w = isqrt(limit - y * y);
            for (i64 x = -w; x <= w; ++x) {
                const GaussInt m{x, y};
                if (m.is_zero()) continue;
                const GaussInt p = m * n;
                if (!sector.contains(p)) continue;
                h[static_cast<std::size_t>(alpha.phase_index(p))] += (norm(m) <= s) ? 1 : 2;
                ++terms[i];
            }
        }
    });

    std::vector<i64> counts(m_q, 0);
    i64 total_terms = 0;
    for (std::size_t i = 0; i < small.size(); ++i) {
        for (std::size_t k = 0; k < m_q; ++k) counts[k] += hist[i][k];
        total_terms += terms[i];
    }
    return {detail::phase_histogram_sum(counts), total_terms, SumMethod::hyperbola};
}

/// (|omega| pi N / (2 N(q))) (log N - 2 log N(q) + 2 kappa - 1).
inline double rational_main_term(i64 N, GaussInt q, const Sector& sector, double kappa)
{
    require(!q.is_zero(), "rational_main_term: q must be nonzero");
    require(N >= 1, "rational_main_term: N must be >= 1");
    const double nq = static_cast<double>(norm(q));
    const double n = static_cast<double>(N);
    return sector.width() * std::numbers::pi * n / (2.0 * nq) *
           (std::log(n) - 2.0 * std::log(nq) + 2.0 * kappa - 1.0);
}

/// Mean over T equispaced rotations of |S_hat_{N,t_j}^omega(a/q) - main term|.
inline double error_EN_avg(const DivisorTable& table, i64 N, const ReducedRational& alpha,
                           const Sector& sector, int T, double kappa)
{
    require(N >= 1 && N <= table.nmax(), "error_EN_avg: N exceeds the table");
    require(T >= 8, "error_EN_avg: T must be >= 8");
    const double main = rational_main_term(N, alpha.q(), sector, kappa);
    if (sector.is_full()) {
        return std::abs(weighted_expsum_direct(table, N, sector, alpha).value - main);
    }
    const double m = static_cast<double>(alpha.q_norm());
    std::vector<cplx> unit(static_cast<std::size_t>(alpha.q_norm()));
    for (std::size_t k = 0; k < unit.size(); ++k) unit[k] = expi(static_cast<double>(k) / m);

    std::vector<std::pair<double, cplx>> items;
    const i64 r = isqrt(N);
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        for (i64 x = -w; x <= w; ++x) {
            const GaussInt n{x, y};
            if (n.is_zero()) continue;
            items.emplace_back(angle(n), static_cast<double>(table.d(n)) *
                                             unit[static_cast<std::size_t>(alpha.phase_index(n))]);
        }
    }
    return AngularPrefix(std::move(items)).rotation_mean_abs(sector, T, main);
}

/// Bound shapes for the measured constants.

/// N^{1/2} + N^{1/4} ||alpha||^{-3/2}.
inline double rotation_sum_shape(i64 N, TorusPoint alpha)
{
    const double n = static_cast<double>(N);
    return std::sqrt(n) + std::pow(n, 0.25) * std::pow(alpha.dist_to_lattice(), -1.5);
}

/// min{N, (N^{1/2} + N^{1/4} N(alpha)^{-3/4}) log N}.
inline double log_weighted_shape(i64 N, TorusPoint alpha)
{
    const double n = static_cast<double>(N);
    const double shape = (std::sqrt(n) + std::pow(n, 0.25) * std::pow(alpha.norm(), -0.75)) * std::log(n);
    return std::min(n, shape);
}

/// (N^{3/4} + N^{1/4} N(q)^{3/4}) log(1 + N(q)).
inline double rational_error_shape(i64 N, i64 q_norm)
{
    const double n = static_cast<double>(N);
    const double q = static_cast<double>(q_norm);
    return (std::pow(n, 0.75) + std::pow(n, 0.25) * std::pow(q, 0.75)) * std::log1p(q);
}

/// N^{1 - delta/4} log N.
inline double minor_arc_shape(i64 N, double delta)
{
    const double n = static_cast<double>(N);
    return std::pow(n, 1.0 - delta / 4.0) * std::log(n);
}

} // namespace gdiv
