#pragma once

// Divisor sieve over norm balls of Z[i], summatory and sector sums,
// and sum-of-two-squares statistics.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "gdiv/error.hpp"
#include "gdiv/gaussint.hpp"
#include "gdiv/parallel.hpp"

namespace gdiv {

using u32 = std::uint32_t;
using u64 = std::uint64_t;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// arg(z) in [0, 2pi).
inline double angle(GaussInt z)
{
    double th = std::atan2(static_cast<double>(z.im), static_cast<double>(z.re));
    if (th < 0.0) th += kTwoPi;
    return th;
}

/// An arc omega = [lo, hi) of directions, rotated by t. Membership is
/// half-open: arg(n) in [lo + t, hi + t) reduced mod 2pi. A full-circle
/// sector also contains the origin; partial sectors never do.
struct Sector {
    double lo{0.0};
    double hi{kTwoPi};
    double t{0.0};

    static Sector full() { return {}; }
    static Sector arc(double lo, double hi, double t = 0.0) { return {lo, hi, t}; }

    bool is_full() const { return hi - lo >= kTwoPi; }
    double width() const { return is_full() ? kTwoPi : hi - lo; }
    Sector rotated(double dt) const { return {lo, hi, t + dt}; }

    /// Start and end of the window in [0, 2pi) coordinates; end may exceed 2pi.
    std::array<double, 2> window() const
    {
        double start = std::fmod(lo + t, kTwoPi);
        if (start < 0.0) start += kTwoPi;
        if (start >= kTwoPi) start = 0.0;
        return {start, start + width()};
    }

    bool contains_angle(double theta) const
    {
        if (is_full()) return true;
        const auto [start, end] = window();
        if (end <= kTwoPi) return start <= theta && theta < end;
        return theta >= start || theta < end - kTwoPi;
    }

    bool contains(GaussInt z) const
    {
        if (is_full()) return true;
        if (z.is_zero()) return false;
        return contains_angle(angle(z));
    }
};

/// d(n) for every n in the box [-r, r]^2, r = ceil(sqrt(N)), with d counting
/// all nonzero divisors (units and associates included). Entries outside the
/// norm ball, and d(0), are stored as 0. prefix()[k] = D(k).
class DivisorTable {
public:
    DivisorTable() = default;

    static i64 box_radius(i64 nmax)
    {
        i64 r = isqrt(nmax);
        if (r * r < nmax) ++r;
        return r;
    }

    /// Adopts raw values (row-major, rows indexed by im) and rebuilds D(k).
    static DivisorTable from_values(i64 nmax, std::vector<u32> values)
    {
        require(nmax >= 1, "DivisorTable: N must be >= 1");
        DivisorTable t;
        t.nmax_ = nmax;
        t.radius_ = box_radius(nmax);
        t.side_ = 2 * t.radius_ + 1;
        require(values.size() == static_cast<std::size_t>(t.side_ * t.side_),
                "DivisorTable: value array does not match the box size");
        t.values_ = std::move(values);
        t.build_prefix();
        return t;
    }

    i64 nmax() const { return nmax_; }
    i64 radius() const { return radius_; }
    i64 side() const { return side_; }
    const std::vector<u32>& values() const { return values_; }
    const std::vector<u64>& prefix() const { return prefix_; }

    bool in_box(GaussInt n) const
    {
        return n.re >= -radius_ && n.re <= radius_ && n.im >= -radius_ && n.im <= radius_;
    }

    std::size_t index(GaussInt n) const
    {
        return static_cast<std::size_t>((n.im + radius_) * side_ + (n.re + radius_));
    }

    /// d(n), or 0 when N(n) > nmax or n = 0.
    u32 d(GaussInt n) const { return in_box(n) ? values_[index(n)] : 0u; }

    /// D(N) = sum_{0 < N(n) <= N} d(n).
    u64 D(i64 N) const
    {
        require(N >= 0 && N <= nmax_, "DivisorTable::D: N exceeds the table");
        return prefix_[static_cast<std::size_t>(N)];
    }

    /// Binary dump: "GDIV1", little-endian u64 N, then row-major little-endian u32 values.
    void write_binary(std::ostream& os) const
    {
        os.write("GDIV1", 5);
        put_le(os, static_cast<u64>(nmax_), 8);
        for (u32 v : values_) put_le(os, v, 4);
    }

    static DivisorTable read_binary(std::istream& is)
    {
        char magic[5];
        is.read(magic, 5);
        require(is.good() && std::memcmp(magic, "GDIV1", 5) == 0, "DivisorTable: bad magic");
        const auto n = static_cast<i64>(get_le(is, 8));
        require(is.good() && n >= 1, "DivisorTable: bad header");
        const i64 r = box_radius(n);
        std::vector<u32> vals(static_cast<std::size_t>((2 * r + 1) * (2 * r + 1)));
        for (auto& v : vals) v = static_cast<u32>(get_le(is, 4));
        require(!is.fail(), "DivisorTable: truncated value array");
        return from_values(n, std::move(vals));
    }

    /// CSV with columns re,im,d for every nonzero n in the ball.
    void write_csv(std::ostream& os) const
    {
        os << "re,im,d\n";
        for (i64 y = -radius_; y <= radius_; ++y)
            for (i64 x = -radius_; x <= radius_; ++x) {
                const GaussInt n{x, y};
                if (n.is_zero() || norm(n) > nmax_) continue;
                os << x << ',' << y << ',' << values_[index(n)] << '\n';
            }
    }

private:
    void build_prefix()
    {
        std::vector<u64> by_norm(static_cast<std::size_t>(nmax_) + 1, 0);
        for (i64 y = -radius_; y <= radius_; ++y)
            for (i64 x = -radius_; x <= radius_; ++x) {
                const i64 k = x * x + y * y;
                if (k <= nmax_) by_norm[static_cast<std::size_t>(k)] += values_[index({x, y})];
            }
        prefix_.assign(by_norm.size(), 0);
        u64 acc = 0;
        for (std::size_t k = 0; k < by_norm.size(); ++k) prefix_[k] = acc += by_norm[k];
    }

    static void put_le(std::ostream& os, u64 v, int bytes)
    {
        char buf[8];
        for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        os.write(buf, bytes);
    }

    static u64 get_le(std::istream& is, int bytes)
    {
        unsigned char buf[8] = {};
        is.read(reinterpret_cast<char*>(buf), bytes);
        u64 v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<u64>(buf[i]) << (8 * i);
        return v;
    }

    i64 nmax_{0};
    i64 radius_{0};
    i64 side_{0};
    std::vector<u32> values_;
    std::vector<u64> prefix_;
};

inline constexpr i64 kMaxSieveNorm = 10'000'000;

/// Sieve of d(n) over the ball N(n) <= N. For each canonical divisor d the
/// multiples m*d with N(m*d) <= N receive 4 (one per associate of d).
inline DivisorTable divisor_sieve(i64 N)
{
    require(N >= 1, "divisor_sieve: N must be >= 1");
    require(N <= kMaxSieveNorm, "divisor_sieve: N exceeds the supported box size");

    const i64 r = DivisorTable::box_radius(N);
    const i64 side = 2 * r + 1;
    const std::size_t cells = static_cast<std::size_t>(side * side);

    const auto divisors = canonical_moduli(1, N);
    // Per-worker partial tables; memory bounded to roughly 1 GiB in total.
    const std::size_t mem_cap = std::max<std::size_t>(1, (std::size_t{1} << 28) / cells);
    const std::size_t workers = std::min<std::size_t>({thread_count(), mem_cap, divisors.size()});
    std::vector<std::vector<u32>> partial(workers);

    parallel_for(workers, [&](std::size_t w) {
        auto& tab = partial[w];
        tab.assign(cells, 0);
        for (std::size_t i = w; i < divisors.size(); i += workers) {
            const GaussInt d = divisors[i];
            const i64 limit = N / norm(d);
            const i64 my_max = isqrt(limit);
            const i64 step = d.im * side + d.re; // index shift per unit step in m.re
            for (i64 my = -my_max; my <= my_max; ++my) {
                const i64 half = isqrt(limit - my * my);
                GaussInt n = GaussInt{-half, my} * d;
                i64 idx = (n.im + r) * side + (n.re + r);
                for (i64 mx = -half; mx <= half; ++mx, idx += step)
                    if (mx != 0 || my != 0) tab[static_cast<std::size_t>(idx)] += 4;
            }
        }
    });

    for (std::size_t w = 1; w < workers; ++w)
        for (std::size_t c = 0; c < cells; ++c) partial[0][c] += partial[w][c];
    return DivisorTable::from_values(N, std::move(partial[0]));
}

/// Number of nonzero divisors of n by trial division over N(d) <= N(n).
inline i64 divisor_count_single(GaussInt n)
{
    require(!n.is_zero(), "divisor_count_single: n must be nonzero");
    const i64 nn = norm(n);
    const i64 r = isqrt(nn);
    i64 count = 0;
    for (i64 y = -r; y <= r; ++y)
        for (i64 x = -r; x <= r; ++x) {
            const GaussInt d{x, y};
            if (!d.is_zero() && norm(d) <= nn && divides(d, n)) ++count;
        }
    return count;
}

/// sum of d(n) over N(n) <= N with arg(n) in the sector.
inline u64 sector_divisor_sum(const DivisorTable& table, i64 N, const Sector& sector)
{
    require(N <= table.nmax(), "sector_divisor_sum: N exceeds the table");
    if (sector.is_full()) return table.D(N);
    u64 acc = 0;
    const i64 r = isqrt(N);
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        for (i64 x = -w; x <= w; ++x) {
            const GaussInt n{x, y};
            if (!n.is_zero() && sector.contains(n)) acc += table.d(n);
        }
    }
    return acc;
}

/// r2(k) = #{n : N(n) = k}.
inline i64 r2(i64 k)
{
    require(k >= 0, "r2: k must be >= 0");
    if (k == 0) return 1;
    i64 count = 0;
    const i64 r = isqrt(k);
    for (i64 x = -r; x <= r; ++x) {
        const i64 rest = k - x * x;
        const i64 y = isqrt(rest);
        if (y * y == rest) count += (y == 0 ? 1 : 2);
    }
    return count;
}

/// r2(k) for all 0 <= k <= N.
inline std::vector<std::int32_t> r2_table(i64 N)
{
    require(N >= 0, "r2_table: N must be >= 0");
    std::vector<std::int32_t> t(static_cast<std::size_t>(N) + 1, 0);
    const i64 r = isqrt(N);
    for (i64 x = -r; x <= r; ++x) {
        const i64 w = isqrt(N - x * x);
        for (i64 y = -w; y <= w; ++y) ++t[static_cast<std::size_t>(x * x + y * y)];
    }
    return t;
}

/// sum_{0 <= k <= N} r2(k): lattice points in the closed disk N(n) <= N.
inline i64 r2_prefix(i64 N)
{
    if (N < 0) return 0;
    i64 total = 0;
    const i64 r = isqrt(N);
    for (i64 x = -r; x <= r; ++x) total += 2 * isqrt(N - x * x) + 1;
    return total;
}

/// sum_{k=1}^{N} r2(k) / k.
inline double r2_harmonic(i64 N)
{
    require(N >= 1, "r2_harmonic: N must be >= 1");
    const auto t = r2_table(N);
    long double acc = 0.0L;
    for (i64 k = N; k >= 1; --k) acc += static_cast<long double>(t[static_cast<std::size_t>(k)]) / k;
    return static_cast<double>(acc);
}

/// Estimate of kappa in sum_{k<=N} r2(k)/k = pi (log N + kappa) + O(N^{-1/2}).
inline double sierpinski_kappa(i64 N)
{
    require(N >= 1000, "sierpinski_kappa: N must be >= 1000");
    return r2_harmonic(N) / std::numbers::pi - std::log(static_cast<double>(N));
}

/// Lattice points n with N(n) <= N and arg(n) in the sector.
inline i64 lattice_count_sector(i64 N, const Sector& sector)
{
    if (sector.is_full()) return r2_prefix(N);
    i64 count = 0;
    const i64 r = isqrt(N);
    for (i64 y = -r; y <= r; ++y) {
        const i64 w = isqrt(N - y * y);
        for (i64 x = -w; x <= w; ++x)
            if (sector.contains({x, y})) ++count;
    }
    return count;
}

/// D(N) without a sieve, through the hyperbola identity
/// D(N) = 2 sum_{1 <= N(n), N(n)^2 <= N} Lambda(N / N(n)) - Lambda(sqrt N)^2,
/// Lambda(x) = #{m : 1 <= N(m) <= x}.
inline u64 divisor_summatory_hyperbola(i64 N)
{
    require(N >= 1, "divisor_summatory_hyperbola: N must be >= 1");
    const i64 s = isqrt(N);
    auto lambda = [](i64 x) { return static_cast<u64>(r2_prefix(x) - 1); };
    u64 acc = 0;
    for (i64 k = 1; k <= s; ++k) {
        const i64 c = r2(k);
        if (c != 0) acc += static_cast<u64>(c) * lambda(N / k);
    }
    const u64 l = lambda(s);
    return 2 * acc - l * l;
}

/// Lacunary scale set I_R intersected with [1, nmax]: {floor(2^{k/R})}, deduplicated.
inline std::vector<i64> lacunary_scales(int R, i64 nmax)
{
    require(R >= 1, "lacunary_scales: R must be >= 1");
    std::vector<i64> out;
    for (int k = 0;; ++k) {
        const auto v = static_cast<i64>(std::floor(std::exp2(static_cast<double>(k) / R)));
        if (v > nmax) break;
        if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
}

} // namespace gdiv
