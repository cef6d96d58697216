#pragma once

// Exact arithmetic in the Gaussian integers Z[i] together with the torus
// T^2 = C / Z[i] on which their characters live.

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <vector>

#include "gdiv/error.hpp"

namespace gdiv {

using i64 = std::int64_t;
using i128 = __int128;

/// Floor division for signed integers (rounds toward -infinity).
constexpr i64 floor_div(i64 a, i64 b)
{
    i64 q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

constexpr i64 floor_mod(i64 a, i64 b) { return a - floor_div(a, b) * b; }

/// Largest integer r with r*r <= n (n >= 0).
constexpr i64 isqrt(i64 n)
{
    if (n <= 0) return 0;
    auto r = static_cast<i64>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

struct GaussInt {
    i64 re{0};
    i64 im{0};

    constexpr GaussInt() = default;
    constexpr GaussInt(i64 r, i64 i = 0) : re(r), im(i) {}

    constexpr GaussInt operator-() const { return {-re, -im}; }
    constexpr GaussInt operator+(GaussInt w) const { return {re + w.re, im + w.im}; }
    constexpr GaussInt operator-(GaussInt w) const { return {re - w.re, im - w.im}; }
    constexpr GaussInt operator*(GaussInt w) const
    {
        return {re * w.re - im * w.im, re * w.im + im * w.re};
    }
    constexpr GaussInt& operator+=(GaussInt w) { return *this = *this + w; }
    constexpr GaussInt& operator-=(GaussInt w) { return *this = *this - w; }
    constexpr GaussInt& operator*=(GaussInt w) { return *this = *this * w; }

    constexpr GaussInt conj() const { return {re, -im}; }
    constexpr GaussInt times_i() const { return {-im, re}; }
    constexpr bool is_zero() const { return re == 0 && im == 0; }

    constexpr auto operator<=>(const GaussInt&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, GaussInt z)
{
    os << z.re << (z.im < 0 ? "-" : "+") << (z.im < 0 ? -z.im : z.im) << "i";
    return os;
}

inline constexpr GaussInt kI{0, 1};
inline constexpr GaussInt kUnits[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

constexpr i64 norm(GaussInt z) { return z.re * z.re + z.im * z.im; }

/// <z, w> = xu + yv, the real inner product of z = x+iy and w = u+iv.
constexpr i64 inner(GaussInt z, GaussInt w) { return z.re * w.re + z.im * w.im; }

constexpr bool is_unit(GaussInt z) { return norm(z) == 1; }

/// The associate of z with re > 0 and im >= 0 (zero maps to zero).
constexpr GaussInt canonical(GaussInt z)
{
    if (z.is_zero()) return z;
    while (!(z.re > 0 && z.im >= 0)) z = z.times_i();
    return z;
}

/// The unit u such that u * z == canonical(z).
inline GaussInt canonicalizing_unit(GaussInt z)
{
    require(!z.is_zero(), "canonicalizing_unit: zero has no canonical associate");
    GaussInt u{1, 0};
    while (!(z.re > 0 && z.im >= 0)) {
        z = z.times_i();
        u = u.times_i();
    }
    return u;
}

struct DivMod {
    GaussInt quot;
    GaussInt rem;
};

namespace detail {

// Nearest integer to num / den (den > 0), ties rounded up.
inline i64 round_div(i128 num, i128 den)
{
    i128 twice = 2 * num + den;
    i128 q = twice / (2 * den);
    if (twice % (2 * den) != 0 && twice < 0) --q;
    return static_cast<i64>(q);
}

inline i64 floor_div128(i128 num, i128 den)
{
    i128 q = num / den;
    if (num % den != 0 && ((num < 0) != (den < 0))) --q;
    return static_cast<i64>(q);
}

} // namespace detail

/// Euclidean division with the quotient rounded to the nearest lattice point,
/// so that a = quot*b + rem and N(rem) <= N(b)/2.
inline DivMod euclid_divmod(GaussInt a, GaussInt b)
{
    require(!b.is_zero(), "euclid_divmod: division by zero");
    const i128 nb = norm(b);
    const i128 xr = static_cast<i128>(a.re) * b.re + static_cast<i128>(a.im) * b.im;
    const i128 xi = static_cast<i128>(a.im) * b.re - static_cast<i128>(a.re) * b.im;
    GaussInt quot{detail::round_div(xr, nb), detail::round_div(xi, nb)};
    return {quot, a - quot * b};
}

/// True iff d divides n in Z[i]. Zero divides only zero.
inline bool divides(GaussInt d, GaussInt n)
{
    if (d.is_zero()) return n.is_zero();
    const i128 nd = norm(d);
    const i128 xr = static_cast<i128>(n.re) * d.re + static_cast<i128>(n.im) * d.im;
    const i128 xi = static_cast<i128>(n.im) * d.re - static_cast<i128>(n.re) * d.im;
    return xr % nd == 0 && xi % nd == 0;
}

/// Greatest common divisor, returned as its canonical associate.
inline GaussInt gcd(GaussInt a, GaussInt b)
{
    require(!(a.is_zero() && b.is_zero()), "gcd(0, 0) is undefined");
    while (!b.is_zero()) {
        GaussInt r = euclid_divmod(a, b).rem;
        a = b;
        b = r;
    }
    return canonical(a);
}

inline bool coprime(GaussInt a, GaussInt b) { return norm(gcd(a, b)) == 1; }

/// Membership in the fundamental domain B_q = {x : 0 <= <x,q> < N(q), 0 <= <x,iq> < N(q)}.
constexpr bool in_Bq(GaussInt x, GaussInt q)
{
    const i64 n = norm(q);
    const i64 u = inner(x, q);
    const i64 v = inner(x, q.times_i());
    return 0 <= u && u < n && 0 <= v && v < n;
}

/// The unique representative of z + qZ[i] lying in B_q.
inline GaussInt reduce_mod(GaussInt z, GaussInt q)
{
    require(!q.is_zero(), "reduce_mod: zero modulus");
    // z/q = (<z,q> + i<z,iq>) / N(q); B_q is the half-open unit square in those coordinates.
    const i128 n = norm(q);
    const i128 u = static_cast<i128>(z.re) * q.re + static_cast<i128>(z.im) * q.im;
    const i128 v = static_cast<i128>(z.im) * q.re - static_cast<i128>(z.re) * q.im;
    GaussInt k{detail::floor_div128(u, n), detail::floor_div128(v, n)};
    return z - k * q;
}

/// All members of B_q, ordered by (im, re). Exactly N(q) elements.
inline std::vector<GaussInt> enumerate_Bq(GaussInt q)
{
    require(!q.is_zero(), "enumerate_Bq: zero modulus");
    const GaussInt corners[4] = {{0, 0}, q, q.times_i(), q + q.times_i()};
    i64 lo_re = 0, hi_re = 0, lo_im = 0, hi_im = 0;
    for (auto c : corners) {
        lo_re = std::min(lo_re, c.re);
        hi_re = std::max(hi_re, c.re);
        lo_im = std::min(lo_im, c.im);
        hi_im = std::max(hi_im, c.im);
    }
    std::vector<GaussInt> out;
    out.reserve(static_cast<std::size_t>(norm(q)));
    for (i64 y = lo_im; y <= hi_im; ++y)
        for (i64 x = lo_re; x <= hi_re; ++x)
            if (in_Bq({x, y}, q)) out.push_back({x, y});
    return out;
}

/// Reduced residues: members of B_q coprime to q.
inline std::vector<GaussInt> enumerate_Aq(GaussInt q)
{
    auto all = enumerate_Bq(q);
    std::vector<GaussInt> out;
    for (auto a : all)
        if (coprime(a, q)) out.push_back(a);
    return out;
}

/// Distinct Gaussian primes dividing q, as canonical associates.
inline std::vector<GaussInt> prime_divisors(GaussInt q)
{
    require(!q.is_zero(), "prime_divisors: zero");
    std::vector<GaussInt> primes;
    i64 m = norm(q);
    for (i64 p = 2; p * p <= m || m > 1; ++p) {
        if (p * p > m) p = m; // remaining cofactor is prime
        if (m % p != 0) continue;
        while (m % p == 0) m /= p;
        if (p == 2) {
            primes.push_back({1, 1});
        } else if (p % 4 == 3) {
            primes.push_back({p, 0});
        } else {
            // p = a^2 + b^2 splits into two non-associate primes.
            for (i64 a = 1; a * a < p; ++a) {
                i64 b = isqrt(p - a * a);
                if (a * a + b * b == p) {
                    for (GaussInt pi : {GaussInt{a, b}, GaussInt{a, -b}})
                        if (divides(pi, q)) primes.push_back(canonical(pi));
                    break;
                }
            }
        }
    }
    std::sort(primes.begin(), primes.end());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    return primes;
}

/// Gaussian Euler phi: N(q) * prod_{pi | q} (1 - 1/N(pi)).
inline i64 euler_phi(GaussInt q)
{
    i64 result = norm(q);
    for (auto pi : prime_divisors(q)) result = result / norm(pi) * (norm(pi) - 1);
    return result;
}

/// e(t) = exp(2 pi i t).
inline std::complex<double> expi(double t)
{
    const double a = 2.0 * std::numbers::pi * t;
    return {std::cos(a), std::sin(a)};
}

/// A point of T^2 = C / Z[i] stored with coordinates in [0, 1).
struct TorusPoint {
    double x{0.0};
    double y{0.0};

    TorusPoint() = default;
    TorusPoint(double px, double py) : x(wrap(px)), y(wrap(py)) {}

    static double wrap(double t)
    {
        double w = t - std::floor(t);
        return w >= 1.0 ? 0.0 : w;
    }

    /// Representative in [-1/2, 1/2)^2.
    std::complex<double> centered() const
    {
        return {x >= 0.5 ? x - 1.0 : x, y >= 0.5 ? y - 1.0 : y};
    }

    /// N(alpha) for the nearest-lattice representative, i.e. ||alpha||^2.
    double norm() const { return std::norm(centered()); }

    /// ||alpha||: distance to the nearest lattice point, in [0, 1/sqrt 2].
    double dist_to_lattice() const { return std::sqrt(norm()); }

    TorusPoint operator+(TorusPoint o) const { return {x + o.x, y + o.y}; }
    TorusPoint operator-(TorusPoint o) const { return {x - o.x, y - o.y}; }
    TorusPoint operator-() const { return {-x, -y}; }
};

/// e(<n, alpha>).
inline std::complex<double> character(GaussInt n, TorusPoint alpha)
{
    return expi(static_cast<double>(n.re) * alpha.x + static_cast<double>(n.im) * alpha.y);
}

/// A torus point a/q in lowest terms: q canonical, a in A_q.
class ReducedRational {
public:
    ReducedRational(GaussInt a, GaussInt q)
    {
        require(!q.is_zero(), "ReducedRational: zero denominator");
        require(coprime(a, q), "ReducedRational: numerator and denominator are not coprime");
        const GaussInt u = canonicalizing_unit(q);
        q_ = u * q;
        a_ = reduce_mod(u * a, q_);
        const i64 n = gdiv::norm(q_);
        shell_ = 0;
        while ((i64{2} << shell_) <= n) ++shell_;
    }

    GaussInt a() const { return a_; }
    GaussInt q() const { return q_; }
    i64 q_norm() const { return gdiv::norm(q_); }
    /// Shell index s with 2^s <= N(q) < 2^{s+1}.
    int shell() const { return shell_; }

    /// Exact phase index k with <n, a/q> = k / N(q) mod 1.
    i64 phase_index(GaussInt n) const
    {
        // <n, a/q> = Re(n * conj(a) * q) / N(q)
        const GaussInt w = a_.conj() * q_;
        const i128 re = static_cast<i128>(n.re) * w.re - static_cast<i128>(n.im) * w.im;
        const i128 m = q_norm();
        i128 k = re % m;
        if (k < 0) k += m;
        return static_cast<i64>(k);
    }

    TorusPoint torus() const
    {
        const GaussInt w = a_ * q_.conj();
        const i64 n = q_norm();
        return {static_cast<double>(floor_mod(w.re, n)) / static_cast<double>(n),
                static_cast<double>(floor_mod(w.im, n)) / static_cast<double>(n)};
    }

    bool operator==(const ReducedRational& o) const { return a_ == o.a_ && q_ == o.q_; }

private:
    GaussInt a_;
    GaussInt q_;
    int shell_{0};
};

inline int shell_of(i64 q_norm)
{
    int s = 0;
    while ((i64{2} << s) <= q_norm) ++s;
    return s;
}

/// Canonical q (re > 0, im >= 0) with lo <= N(q) <= hi, ordered by (N(q), re).
inline std::vector<GaussInt> canonical_moduli(i64 lo, i64 hi)
{
    std::vector<GaussInt> out;
    const i64 r = isqrt(hi);
    for (i64 x = 1; x <= r; ++x)
        for (i64 y = 0; x * x + y * y <= hi; ++y)
            if (x * x + y * y >= lo) out.push_back({x, y});
    std::sort(out.begin(), out.end(), [](GaussInt a, GaussInt b) {
        return std::pair{norm(a), a.re} < std::pair{norm(b), b.re};
    });
    return out;
}

/// tau_q(n) = sum_{a in A_q} e(<n, a/q>), evaluated in floating point.
/// The imaginary part cancels; the real part is returned.
inline double ramanujan_tau(GaussInt q, GaussInt n)
{
    require(!q.is_zero(), "ramanujan_tau: zero modulus");
    std::complex<double> acc{0.0, 0.0};
    const auto qn = static_cast<double>(norm(q));
    for (auto a : enumerate_Aq(q)) {
        ReducedRational r{a, q};
        acc += expi(static_cast<double>(r.phase_index(n)) / qn);
    }
    return acc.real();
}

/// tau_q tabulated over residues. tau_q(n) depends only on n modulo conj(q).
class RamanujanTable {
public:
    explicit RamanujanTable(GaussInt q) : q_(canonical(q)), qbar_(q_.conj())
    {
        const auto residues = enumerate_Bq(qbar_);
        for (auto r : residues) {
            values_.push_back(std::llround(ramanujan_tau(q_, r)));
            keys_.push_back(r);
        }
    }

    GaussInt modulus() const { return q_; }

    i64 operator()(GaussInt n) const
    {
        const GaussInt r = reduce_mod(n, qbar_);
        auto it = std::lower_bound(keys_.begin(), keys_.end(), r, [](GaussInt a, GaussInt b) {
            return std::pair{a.im, a.re} < std::pair{b.im, b.re};
        });
        return values_[static_cast<std::size_t>(it - keys_.begin())];
    }

private:
    GaussInt q_;
    GaussInt qbar_;
    std::vector<GaussInt> keys_; // B_{conj q}, sorted by (im, re)
    std::vector<i64> values_;
};

struct DirichletApprox {
    ReducedRational rational;
    double error; // N(alpha - a/q) on the torus
};

/// Best rational approximation a/q to alpha with 1 <= N(q) <= q_max, found by
/// exhaustive search over canonical moduli. Ties prefer smaller N(q).
inline DirichletApprox dirichlet_approx(TorusPoint alpha, i64 q_max)
{
    require(q_max >= 1, "dirichlet_approx: q_max must be >= 1");
    const std::complex<double> al{alpha.x, alpha.y};
    bool have = false;
    GaussInt best_a{0, 0}, best_q{1, 0};
    double best_err = 0.0;

    for (auto q : canonical_moduli(1, q_max)) {
        const std::complex<double> z = al * std::complex<double>(static_cast<double>(q.re),
                                                                 static_cast<double>(q.im));
        const GaussInt c{std::llround(z.real()), std::llround(z.imag())};
        bool found = false;
        GaussInt a_q{};
        double d_q = 0.0;
        for (i64 rad = 1;; ++rad) {
            for (i64 dy = -rad; dy <= rad; ++dy)
                for (i64 dx = -rad; dx <= rad; ++dx) {
                    if (std::max(std::abs(dx), std::abs(dy)) != rad && rad > 1) continue;
                    GaussInt a = c + GaussInt{dx, dy};
                    double d = std::norm(z - std::complex<double>(static_cast<double>(a.re),
                                                                  static_cast<double>(a.im)));
                    if (found && d >= d_q) continue;
                    if (!coprime(a, q)) continue;
                    found = true;
                    a_q = a;
                    d_q = d;
                }
            // ring rad+1 lies at distance >= rad + 1/2 from z
            if (found && std::sqrt(d_q) <= static_cast<double>(rad) + 0.5) break;
        }
        const double err = d_q / static_cast<double>(norm(q));
        if (!have || err < best_err) {
            have = true;
            best_err = err;
            best_a = a_q;
            best_q = q;
        }
    }
    return {ReducedRational{best_a, best_q}, best_err};
}

} // namespace gdiv
