#pragma once

// Averaging operators A_N on finitely supported functions on Z[i], the
// maximal function over a finite scale set, local p-averages, and the
// experiment suites built on them.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gdiv/arith.hpp"
#include "gdiv/circle.hpp"
#include "gdiv/error.hpp"
#include "gdiv/fft.hpp"
#include "gdiv/gaussint.hpp"
#include "gdiv/numeric.hpp"
#include "gdiv/parallel.hpp"
#include "gdiv/report.hpp"

namespace gdiv {

/// Axis-aligned lattice box {origin + (x, y) : 0 <= x < width, 0 <= y < height}.
struct Box {
    GaussInt origin;
    i64 width{0};
    i64 height{0};

    static Box centered(i64 radius) { return {{-radius, -radius}, 2 * radius + 1, 2 * radius + 1}; }

    bool contains(GaussInt z) const
    {
        return z.re >= origin.re && z.re < origin.re + width && z.im >= origin.im &&
               z.im < origin.im + height;
    }
    Box expanded(i64 r) const { return {origin - GaussInt{r, r}, width + 2 * r, height + 2 * r}; }
    std::size_t size() const { return static_cast<std::size_t>(width * height); }
    bool operator==(const Box&) const = default;
};

/// Real function on a lattice box; reads outside the box return 0.
class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(Box box, double fill = 0.0) : box_(box), data_(box.size(), fill)
    {
        require(box.width > 0 && box.height > 0, "GridFunction: empty box");
    }

    static GridFunction delta(GaussInt at)
    {
        GridFunction f(Box{at, 1, 1});
        f.data_[0] = 1.0;
        return f;
    }

    const Box& box() const { return box_; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    double at(GaussInt z) const { return box_.contains(z) ? data_[offset(z)] : 0.0; }
    double& ref(GaussInt z)
    {
        require(box_.contains(z), "GridFunction::ref: point outside the box");
        return data_[offset(z)];
    }

    /// Value at local coordinates (column x, row y).
    double local(i64 x, i64 y) const { return data_[static_cast<std::size_t>(y * box_.width + x)]; }
    double& local(i64 x, i64 y) { return data_[static_cast<std::size_t>(y * box_.width + x)]; }

    /// sum |f|^p w(x) over the box, w defaulting to 1.
    double lp_pow(double p, const std::function<double(GaussInt)>& w = nullptr) const
    {
        CompensatedSum acc;
        for (i64 y = 0; y < box_.height; ++y)
            for (i64 x = 0; x < box_.width; ++x) {
                const double v = std::abs(local(x, y));
                if (v == 0.0) continue;
                const GaussInt z = box_.origin + GaussInt{x, y};
                acc.add(std::pow(v, p) * (w ? w(z) : 1.0));
            }
        return acc.value();
    }

    double l2_squared() const
    {
        CompensatedSum acc;
        for (double v : data_) acc.add(v * v);
        return acc.value();
    }

    /// Copy restricted or zero-extended to another box.
    GridFunction resampled(const Box& to) const
    {
        GridFunction out(to);
        for (i64 y = 0; y < to.height; ++y)
            for (i64 x = 0; x < to.width; ++x) out.local(x, y) = at(to.origin + GaussInt{x, y});
        return out;
    }

private:
    std::size_t offset(GaussInt z) const
    {
        return static_cast<std::size_t>((z.im - box_.origin.im) * box_.width + (z.re - box_.origin.re));
    }

    Box box_;
    std::vector<double> data_;
};

/// Closed disk {x : N(x - center) <= radius^2}. 2E doubles the radius.
struct DiskRegion {
    GaussInt center;
    double radius{0.0};

    bool contains(GaussInt z) const
    {
        return static_cast<double>(norm(z - center)) <= radius * radius;
    }
    DiskRegion scaled(double factor) const { return {center, radius * factor}; }
    DiskRegion doubled() const { return scaled(2.0); }

    /// Half-width of the lattice row at vertical offset dy, or -1 if empty.
    i64 row_half_width(i64 dy) const
    {
        const double rest = radius * radius - static_cast<double>(dy * dy);
        if (rest < 0.0) return -1;
        return isqrt(static_cast<i64>(std::floor(rest)));
    }
    i64 row_reach() const { return static_cast<i64>(std::floor(radius)); }

    /// Number of lattice points in the disk.
    i64 size() const
    {
        i64 count = 0;
        for (i64 dy = -row_reach(); dy <= row_reach(); ++dy) {
            const i64 w = row_half_width(dy);
            if (w >= 0) count += 2 * w + 1;
        }
        return count;
    }

    template <class Fn>
    void for_each(Fn&& fn) const
    {
        for (i64 dy = -row_reach(); dy <= row_reach(); ++dy) {
            const i64 w = row_half_width(dy);
            for (i64 dx = -w; dx <= w; ++dx) fn(center + GaussInt{dx, dy});
        }
    }
};

/// <f>_{E,p} = ((1/|E|) sum_{x in E} |f(x)|^p)^{1/p}; p = infinity gives the sup.
inline double local_avg(const GridFunction& f, const DiskRegion& E, double p)
{
    require(p >= 1.0, "local_avg: p must be >= 1");
    const i64 size = E.size();
    require(size > 0, "local_avg: empty disk");
    if (std::isinf(p)) {
        double m = 0.0;
        E.for_each([&](GaussInt z) { m = std::max(m, std::abs(f.at(z))); });
        return m;
    }
    CompensatedSum acc;
    E.for_each([&](GaussInt z) {
        const double v = std::abs(f.at(z));
        if (v != 0.0) acc.add(std::pow(v, p));
    });
    return std::pow(acc.value() / static_cast<double>(size), 1.0 / p);
}

enum class ConvMethod { direct, fft };

/// Direct evaluation of A_N f on `out`.
inline GridFunction apply_AN_direct(const GridFunction& f, const DivisorTable& table, i64 N, const Box& out)
{
    require(N >= 1 && N <= table.nmax(), "apply_AN: N exceeds the table");
    const double D = static_cast<double>(table.D(N));
    const i64 r = isqrt(N);
    GridFunction g(out);
    const Box& fb = f.box();
    for (i64 fy = 0; fy < fb.height; ++fy)
        for (i64 fx = 0; fx < fb.width; ++fx) {
            const double v = f.local(fx, fy);
            if (v == 0.0) continue;
            const GaussInt y = fb.origin + GaussInt{fx, fy};
            for (i64 ny = -r; ny <= r; ++ny) {
                const i64 w = isqrt(N - ny * ny);
                for (i64 nx = -w; nx <= w; ++nx) {
                    const GaussInt x = y + GaussInt{nx, ny};
                    if (!out.contains(x)) continue;
                    const u32 dn = table.d({nx, ny});
                    if (dn != 0) g.ref(x) += v * static_cast<double>(dn) / D;
                }
            }
        }
    return g;
}

/// FFT convolution of functions on a fixed input box with the kernels of
/// A_N for several N, reporting values on a fixed output box. The cyclic
/// grid is large enough that wraparound never reaches the output box.
class AveragingBank {
public:
    AveragingBank(const DivisorTable& table, std::vector<i64> scales, Box in, Box out)
        : scales_(std::move(scales)), in_(in), out_(out)
    {
        require(!scales_.empty(), "AveragingBank: no scales");
        i64 r = 0;
        for (i64 N : scales_) {
            require(N >= 1 && N <= table.nmax(), "AveragingBank: N exceeds the table");
            r = std::max(r, isqrt(N));
        }
        // Differences x - y for x in out, y in in, must not alias into [-r, r].
        auto need = [&](i64 out0, i64 outw, i64 in0, i64 inw) {
            const i64 a = out0 - (in0 + inw - 1);
            const i64 b = (out0 + outw - 1) - in0;
            return std::max(b + r, r - a) + 1;
        };
        cols_ = fft_good_size(static_cast<int>(need(out.origin.re, out.width, in.origin.re, in.width)));
        rows_ = fft_good_size(static_cast<int>(need(out.origin.im, out.height, in.origin.im, in.height)));

        RealDft2D dft(rows_, cols_);
        const double inv = 1.0 / (static_cast<double>(rows_) * static_cast<double>(cols_));
        for (i64 N : scales_) {
            std::fill(dft.real(), dft.real() + dft.real_size(), 0.0);
            const double D = static_cast<double>(table.D(N));
            const i64 rN = isqrt(N);
            for (i64 y = -rN; y <= rN; ++y) {
                const i64 w = isqrt(N - y * y);
                for (i64 x = -w; x <= w; ++x)
                    dft.real()[cell(x, y)] = static_cast<double>(table.d({x, y})) / D * inv;
            }
            dft.forward();
            kernels_.emplace_back(dft.spectrum(), dft.spectrum() + dft.spectrum_size());
        }
    }

    const std::vector<i64>& scales() const { return scales_; }
    const Box& input_box() const { return in_; }
    const Box& output_box() const { return out_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }

    /// Frequency (as a torus point) of spectrum entry (ky, kx).
    TorusPoint frequency(int ky, int kx) const
    {
        return {static_cast<double>(kx) / cols_, static_cast<double>(ky) / rows_};
    }

    /// Spectrum of f on the bank grid; reusable across apply_* calls.
    std::vector<cplx> transform(const GridFunction& f) const
    {
        require(f.box() == in_, "AveragingBank: function lives on a different box");
        RealDft2D dft(rows_, cols_);
        std::fill(dft.real(), dft.real() + dft.real_size(), 0.0);
        for (i64 y = 0; y < in_.height; ++y)
            for (i64 x = 0; x < in_.width; ++x) dft.real()[cell(x, y)] = f.local(x, y);
        dft.forward();
        return {dft.spectrum(), dft.spectrum() + dft.spectrum_size()};
    }

    /// A_N f for the i-th scale.
    GridFunction apply(const std::vector<cplx>& spectrum, std::size_t i) const
    {
        const auto& k = kernels_.at(i);
        return inverse(spectrum, [&](std::size_t idx, int, int) { return k[idx]; });
    }

    /// The operator with Fourier multiplier m(alpha), m real and even.
    template <class Multiplier>
    GridFunction apply_multiplier(const std::vector<cplx>& spectrum, Multiplier&& m) const
    {
        const double inv = 1.0 / (static_cast<double>(rows_) * static_cast<double>(cols_));
        return inverse(spectrum, [&](std::size_t, int ky, int kx) { return cplx(m(frequency(ky, kx)) * inv, 0.0); });
    }

    /// The operator whose multiplier is given by samples laid out like the spectrum.
    GridFunction apply_sampled(const std::vector<cplx>& spectrum, const std::vector<double>& mult) const
    {
        const double inv = 1.0 / (static_cast<double>(rows_) * static_cast<double>(cols_));
        return inverse(spectrum, [&](std::size_t idx, int, int) { return cplx(mult.at(idx) * inv, 0.0); });
    }

    std::vector<GridFunction> apply_all(const GridFunction& f) const
    {
        const auto spec = transform(f);
        std::vector<GridFunction> out;
        for (std::size_t i = 0; i < scales_.size(); ++i) out.push_back(apply(spec, i));
        return out;
    }

private:
    std::size_t cell(i64 x, i64 y) const
    {
        return static_cast<std::size_t>(floor_mod(y, rows_) * cols_ + floor_mod(x, cols_));
    }

    template <class Factor>
    GridFunction inverse(const std::vector<cplx>& spectrum, Factor&& factor) const
    {
        RealDft2D dft(rows_, cols_);
        const int half = cols_ / 2 + 1;
        for (int ky = 0; ky < rows_; ++ky)
            for (int kx = 0; kx < half; ++kx) {
                const std::size_t idx = static_cast<std::size_t>(ky) * half + kx;
                dft.spectrum()[idx] = spectrum[idx] * factor(idx, ky, kx);
            }
        dft.inverse();
        GridFunction g(out_);
        const GaussInt shift = out_.origin - in_.origin;
        for (i64 y = 0; y < out_.height; ++y)
            for (i64 x = 0; x < out_.width; ++x) g.local(x, y) = dft.real()[cell(x + shift.re, y + shift.im)];
        return g;
    }

    std::vector<i64> scales_;
    Box in_;
    Box out_;
    int rows_{0};
    int cols_{0};
    std::vector<std::vector<cplx>> kernels_;
};

/// A_N f on the box of f enlarged by floor(sqrt N) on every side.
inline GridFunction apply_AN(const GridFunction& f, const DivisorTable& table, i64 N,
                             ConvMethod method = ConvMethod::fft)
{
    require(N >= 1 && N <= table.nmax(), "apply_AN: N exceeds the table");
    const Box out = f.box().expanded(isqrt(N));
    if (method == ConvMethod::direct) return apply_AN_direct(f, table, N, out);
    AveragingBank bank(table, {N}, f.box(), out);
    return bank.apply(bank.transform(f), 0);
}

/// sup_{N in Nset} |A_N f| on the box of f enlarged by the largest radius.
inline GridFunction maximal_Astar(const GridFunction& f, const DivisorTable& table,
                                  const std::vector<i64>& Nset, ConvMethod method = ConvMethod::fft)
{
    require(!Nset.empty(), "maximal_Astar: empty scale set");
    i64 r = 0;
    for (i64 N : Nset) {
        require(N >= 1 && N <= table.nmax(), "maximal_Astar: N outside [1, table.nmax]");
        r = std::max(r, isqrt(N));
    }
    const Box out = f.box().expanded(r);
    GridFunction best(out);
    auto merge = [&](const GridFunction& g) {
        for (std::size_t k = 0; k < best.data().size(); ++k)
            best.data()[k] = std::max(best.data()[k], std::abs(g.data()[k]));
    };
    if (method == ConvMethod::direct) {
        for (i64 N : Nset) merge(apply_AN_direct(f, table, N, out));
    } else {
        AveragingBank bank(table, Nset, f.box(), out);
        const auto spec = bank.transform(f);
        for (std::size_t i = 0; i < Nset.size(); ++i) merge(bank.apply(spec, i));
    }
    return best;
}

/// Powers of two in [1, nmax].
inline std::vector<i64> dyadic_scales(i64 nmax)
{
    std::vector<i64> out;
    for (i64 N = 1; N <= nmax; N *= 2) out.push_back(N);
    return out;
}

namespace detail {

template <class Engine>
GridFunction bernoulli_disk(const DiskRegion& disk, double rho, Engine& rng)
{
    const i64 R = disk.row_reach();
    GridFunction f(Box{disk.center - GaussInt{R, R}, 2 * R + 1, 2 * R + 1});
    disk.for_each([&](GaussInt z) {
        if (uniform01(rng) < rho) f.ref(z) = 1.0;
    });
    return f;
}

inline std::string fmt_p(double p) { return format_cell(p); }

} // namespace detail

/// Improving-ratio experiment at one scale. For Bernoulli sets F in 2E and
/// G in E (E the disk of radius sqrt N about 0) records
///   <A_N 1_F>_{E,p'} / <1_F>_{2E,p}
/// and (1/N)|(A_N 1_F, 1_G)| / (<1_F>_{2E,p} <1_G>_{E,p}),
/// maximized over trials, one row per density.
inline ExperimentReport improving_experiment(const DivisorTable& table, i64 N, double p, int trials,
                                             std::uint64_t seed, double kappa = 0.0,
                                             std::vector<double> densities = {1.0, 0.25, 0.0625, 0.015625})
{
    require(p > 1.0 && p < 2.0, "improving_experiment: p must lie in (1, 2)");
    require(trials >= 1, "improving_experiment: trials must be >= 1");
    require(N >= 1 && N <= table.nmax(), "improving_experiment: N exceeds the table");
    const double pp = p / (p - 1.0);
    const DiskRegion E{{0, 0}, std::sqrt(static_cast<double>(N))};
    const DiskRegion E2 = E.doubled();
    const i64 R2 = E2.row_reach();
    const i64 R1 = E.row_reach();
    const Box in{{-R2, -R2}, 2 * R2 + 1, 2 * R2 + 1};
    const Box out{{-R1, -R1}, 2 * R1 + 1, 2 * R1 + 1};
    const AveragingBank bank(table, {N}, in, out);

    ExperimentReport rep;
    rep.experiment = "improving";
    rep.seed = seed;
    rep.N = std::to_string(N);
    rep.p = detail::fmt_p(p);
    rep.kappa = kappa;
    rep.columns = {"density", "trials", "max_improving", "max_bilinear", "max_ratio"};

    for (std::size_t di = 0; di < densities.size(); ++di) {
        const double rho = densities[di];
        std::vector<double> imp(static_cast<std::size_t>(trials), 0.0), bil(imp);
        parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
            std::mt19937_64 rng(trial_seed(seed, di * 1000003ULL + t));
            GridFunction F = detail::bernoulli_disk(E2, rho, rng).resampled(in);
            GridFunction G = detail::bernoulli_disk(E, rho, rng);
            const double f2p = local_avg(F, E2, p);
            const double gp = local_avg(G, E, p);
            if (f2p == 0.0 || gp == 0.0) return;
            const GridFunction A = bank.apply(bank.transform(F), 0);
            imp[t] = local_avg(A, E, pp) / f2p;
            CompensatedSum pair;
            E.for_each([&](GaussInt z) {
                if (G.at(z) != 0.0) pair.add(A.at(z));
            });
            bil[t] = std::abs(pair.value()) / static_cast<double>(N) / (f2p * gp);
        });
        const double mi = max_of(imp), mb = max_of(bil);
        rep.add_row({rho, static_cast<std::int64_t>(trials), mi, mb, std::max(mi, mb)});
    }
    return rep;
}

/// Endpoint example: M = floor(log^2 N), f = 1[M <= d(x) <= 2M], g = delta_0,
/// r(N) = (1/N)|(A_N f, g)| / (<f>_{2E,1} <g>_{E,1}).
inline ExperimentReport sharpness_experiment(const DivisorTable& table, const std::vector<i64>& Nlist,
                                             double kappa = 0.0)
{
    ExperimentReport rep;
    rep.experiment = "sharpness";
    rep.kappa = kappa;
    rep.columns = {"N", "M", "support_2E", "r", "r_over_logN", "status"};
    std::string ns;
    for (i64 N : Nlist) ns += (ns.empty() ? "" : ";") + std::to_string(N);
    rep.N = ns;
    for (i64 N : Nlist) {
        require(N >= 16, "sharpness_experiment: N must be >= 16");
        require(4 * N <= table.nmax(), "sharpness_experiment: the table must cover 4N");
        const double logN = std::log(static_cast<double>(N));
        const auto M = static_cast<i64>(std::floor(logN * logN));
        auto in_level = [&](GaussInt z) {
            const i64 d = table.d(z);
            return d >= M && d <= 2 * M;
        };
        const DiskRegion E{{0, 0}, std::sqrt(static_cast<double>(N))};
        const DiskRegion E2 = E.doubled();
        i64 support = 0;
        E2.for_each([&](GaussInt z) {
            if (in_level(z)) ++support;
        });
        if (support == 0) {
            rep.add_row({N, M, std::int64_t{0}, std::nan(""), std::nan(""), std::string("empty")});
            continue;
        }
        // (A_N f)(0) = (1/D(N)) sum_{N(n) <= N} d(n) f(-n)
        u64 weighted = 0;
        E.for_each([&](GaussInt z) {
            if (!z.is_zero() && in_level(-z)) weighted += table.d(z);
        });
        const double Af0 = static_cast<double>(weighted) / static_cast<double>(table.D(N));
        const double f_avg = static_cast<double>(support) / static_cast<double>(E2.size());
        const double g_avg = 1.0 / static_cast<double>(E.size());
        const double r = Af0 / static_cast<double>(N) / (f_avg * g_avg);
        rep.add_row({N, M, support, r, r / logN, std::string("ok")});
    }
    return rep;
}

/// R = ||A* f||_{l^p(w)} / ||f||_{l^p(w)} for w(x) = (1 + N(x))^{gamma/2},
/// maximized over random nonnegative f on centered boxes of each size.
inline ExperimentReport weighted_maximal_experiment(const DivisorTable& table, double p, double gamma,
                                                    const std::vector<i64>& Nset, int f_trials,
                                                    const std::vector<i64>& box_sizes,
                                                    std::uint64_t seed, double kappa = 0.0)
{
    require(p > 1.0 && std::isfinite(p), "weighted_maximal_experiment: p must lie in (1, inf)");
    require(gamma > -2.0 && gamma < 2.0 * (p - 1.0),
            "weighted_maximal_experiment: gamma outside (-2, 2(p-1)); the weight is not A_p");
    require(!Nset.empty() && f_trials >= 1, "weighted_maximal_experiment: empty scale set or no trials");
    auto w = [gamma](GaussInt z) { return std::pow(1.0 + static_cast<double>(norm(z)), gamma / 2.0); };

    ExperimentReport rep;
    rep.experiment = "weighted";
    rep.seed = seed;
    rep.N = std::to_string(Nset.back());
    rep.p = detail::fmt_p(p);
    rep.kappa = kappa;
    rep.columns = {"box", "gamma", "trials", "max_R", "mean_R"};
    i64 rmax = 0;
    for (i64 N : Nset) rmax = std::max(rmax, isqrt(N));

    for (std::size_t bi = 0; bi < box_sizes.size(); ++bi) {
        const i64 L = box_sizes[bi];
        const Box in{{-L / 2, -L / 2}, L, L};
        const AveragingBank bank(table, Nset, in, in.expanded(rmax));
        std::vector<double> ratios(static_cast<std::size_t>(f_trials));
        parallel_for(ratios.size(), [&](std::size_t t) {
            std::mt19937_64 rng(trial_seed(seed, bi * 1000003ULL + t));
            GridFunction f(in);
            for (auto& v : f.data()) v = uniform01(rng);
            const auto spec = bank.transform(f);
            GridFunction best(bank.output_box());
            for (std::size_t i = 0; i < Nset.size(); ++i) {
                const GridFunction g = bank.apply(spec, i);
                for (std::size_t k = 0; k < best.data().size(); ++k)
                    best.data()[k] = std::max(best.data()[k], std::abs(g.data()[k]));
            }
            ratios[t] = std::pow(best.lp_pow(p, w) / f.lp_pow(p, w), 1.0 / p);
        });
        CompensatedSum mean;
        for (double r : ratios) mean.add(r);
        rep.add_row({L, gamma, static_cast<std::int64_t>(f_trials), max_of(ratios),
                     mean.value() / static_cast<double>(f_trials)});
    }
    return rep;
}

/// Sums of a nonnegative function over disks, using row prefix sums.
class DiskSummer {
public:
    DiskSummer(const GridFunction& f, double power) : box_(f.box())
    {
        const auto w = static_cast<std::size_t>(box_.width + 1);
        prefix_.assign(static_cast<std::size_t>(box_.height) * w, 0.0);
        for (i64 y = 0; y < box_.height; ++y)
            for (i64 x = 0; x < box_.width; ++x) {
                const double v = std::abs(f.local(x, y));
                prefix_[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x + 1)] =
                    prefix_[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x)] +
                    (v == 0.0 ? 0.0 : std::pow(v, power));
            }
    }

    double sum(const DiskRegion& d) const
    {
        double acc = 0.0;
        const auto w = static_cast<std::size_t>(box_.width + 1);
        for (i64 dy = -d.row_reach(); dy <= d.row_reach(); ++dy) {
            const i64 y = d.center.im + dy - box_.origin.im;
            if (y < 0 || y >= box_.height) continue;
            const i64 hw = d.row_half_width(dy);
            if (hw < 0) continue;
            const i64 x0 = std::max<i64>(0, d.center.re - hw - box_.origin.re);
            const i64 x1 = std::min<i64>(box_.width, d.center.re + hw + 1 - box_.origin.re);
            if (x1 <= x0) continue;
            acc += prefix_[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x1)] -
                   prefix_[static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x0)];
        }
        return acc;
    }

    double average(const DiskRegion& d) const { return sum(d) / static_cast<double>(d.size()); }

private:
    Box box_;
    std::vector<double> prefix_;
};

/// Disks I with witness sets E_I (stored as lattice point lists).
struct SparseFamily {
    std::vector<DiskRegion> disks;
    std::vector<std::vector<GaussInt>> witness;
};

/// sum_I |I| <f>_{I,r} <g>_{I,s}.
inline double sparse_form_eval(const SparseFamily& family, const GridFunction& f, const GridFunction& g,
                               double r, double s)
{
    require(r > 1.0 && r < 2.0 && s > 1.0 && s < 2.0, "sparse_form_eval: r and s must lie in (1, 2)");
    const DiskSummer fr(f, r), gs(g, s);
    CompensatedSum acc;
    for (const auto& I : family.disks) {
        const double size = static_cast<double>(I.size());
        acc.add(size * std::pow(fr.sum(I) / size, 1.0 / r) * std::pow(gs.sum(I) / size, 1.0 / s));
    }
    return acc.value();
}

struct SparseAudit {
    bool ok{true};
    std::size_t failures{0};
    double min_fraction{1.0}; // min |E_I| / |I|
};

/// Checks E_I subset of I, |E_I| > |I|/2, and pairwise disjointness.
inline SparseAudit audit_sparse_family(const SparseFamily& family)
{
    SparseAudit audit;
    std::vector<GaussInt> all;
    for (std::size_t i = 0; i < family.disks.size(); ++i) {
        const auto& I = family.disks[i];
        const auto& E = family.witness.at(i);
        bool inside = true;
        for (auto z : E) inside = inside && I.contains(z);
        const double frac = static_cast<double>(E.size()) / static_cast<double>(I.size());
        audit.min_fraction = std::min(audit.min_fraction, frac);
        if (!inside || 2 * static_cast<i64>(E.size()) <= I.size()) ++audit.failures;
        all.insert(all.end(), E.begin(), E.end());
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) ++audit.failures;
    audit.ok = audit.failures == 0;
    return audit;
}

struct SparseCertificate {
    SparseFamily family;
    double pairing{0.0}; // |(A* f, g)|
    double form{0.0};
    double ratio{0.0};
    SparseAudit audit;
};

/// Stopping-time family over a quadtree of square cells. Each cell carries
/// its inscribed disk. Below a selected cell I, a maximal descendant J is
/// selected when <f>_{3J,1} > 100 <f>_{I,1} and removing J still leaves more
/// than half of I; otherwise the search continues inside J. E_I is the part of
/// the disk of I inside the cell of I and outside the selected cells below it,
/// so the E_I are disjoint by construction.
inline SparseCertificate greedy_sparse_certificate(const GridFunction& f, const GridFunction& g,
                                                   const DivisorTable& table, const std::vector<i64>& Nset,
                                                   double r, double s)
{
    require(r > 1.0 && r < 2.0 && s > 1.0 && s < 2.0, "greedy_sparse_certificate: r, s must lie in (1, 2)");
    require(f.box() == g.box(), "greedy_sparse_certificate: f and g must share a box");
    SparseCertificate cert;
    const Box& box = f.box();

    const GridFunction Astar = maximal_Astar(f, table, Nset);
    CompensatedSum pair;
    for (i64 y = 0; y < box.height; ++y)
        for (i64 x = 0; x < box.width; ++x) {
            const GaussInt z = box.origin + GaussInt{x, y};
            pair.add(Astar.at(z) * g.local(x, y));
        }
    cert.pairing = std::abs(pair.value());
    if (cert.pairing == 0.0) return cert;

    i64 rmax = 0;
    for (i64 N : Nset) rmax = std::max(rmax, isqrt(N));
    // The root's inscribed disk must hold the box together with every A_N reach.
    const i64 span = static_cast<i64>(std::ceil(std::sqrt(2.0) * static_cast<double>(std::max(box.width, box.height))));
    const i64 side0 = next_pow2(span + 2 * rmax + 2);
    const GaussInt corner0{box.origin.re + box.width / 2 - side0 / 2, box.origin.im + box.height / 2 - side0 / 2};

    const DiskSummer f1(f, 1.0);
    struct Cell {
        GaussInt corner;
        i64 side;
        bool holds(GaussInt z) const
        {
            return z.re >= corner.re && z.re < corner.re + side && z.im >= corner.im && z.im < corner.im + side;
        }
    };
    auto disk_of = [](const Cell& c) {
        return DiskRegion{c.corner + GaussInt{c.side / 2, c.side / 2}, static_cast<double>(c.side) / 2.0};
    };
    auto children = [](const Cell& c) {
        const i64 h = c.side / 2;
        return std::vector<Cell>{{c.corner, h}, {c.corner + GaussInt{h, 0}, h},
                                 {c.corner + GaussInt{0, h}, h}, {c.corner + GaussInt{h, h}, h}};
    };
    constexpr i64 kMinSide = 2;

    std::vector<Cell> queue{{corner0, side0}};
    while (!queue.empty()) {
        const Cell I = queue.back();
        queue.pop_back();
        const DiskRegion dI = disk_of(I);
        const double base = f1.average(dI);
        const i64 disk_size = dI.size();

        // Points of the disk that the cell owns, flagged until a selection covers them.
        std::vector<char> live(static_cast<std::size_t>(I.side * I.side), 0);
        i64 remaining = 0;
        dI.for_each([&](GaussInt z) {
            if (!I.holds(z)) return;
            live[static_cast<std::size_t>((z.im - I.corner.im) * I.side + (z.re - I.corner.re))] = 1;
            ++remaining;
        });
        auto owned_in = [&](const Cell& J) {
            i64 n = 0;
            for (i64 y = 0; y < J.side; ++y)
                for (i64 x = 0; x < J.side; ++x)
                    n += live[static_cast<std::size_t>((J.corner.im - I.corner.im + y) * I.side +
                                                       (J.corner.re - I.corner.re + x))];
            return n;
        };

        std::vector<Cell> scan = I.side > kMinSide ? children(I) : std::vector<Cell>{};
        while (!scan.empty()) {
            const Cell J = scan.back();
            scan.pop_back();
            if (f1.average(disk_of(J).scaled(3.0)) > 100.0 * base) {
                const i64 lost = owned_in(J);
                if (2 * (remaining - lost) > disk_size) {
                    remaining -= lost;
                    for (i64 y = 0; y < J.side; ++y)
                        for (i64 x = 0; x < J.side; ++x)
                            live[static_cast<std::size_t>((J.corner.im - I.corner.im + y) * I.side +
                                                          (J.corner.re - I.corner.re + x))] = 0;
                    queue.push_back(J);
                    continue;
                }
            }
            if (J.side > kMinSide)
                for (auto& c : children(J)) scan.push_back(c);
        }

        std::vector<GaussInt> witness;
        witness.reserve(static_cast<std::size_t>(remaining));
        for (i64 y = 0; y < I.side; ++y)
            for (i64 x = 0; x < I.side; ++x)
                if (live[static_cast<std::size_t>(y * I.side + x)]) witness.push_back(I.corner + GaussInt{x, y});
        cert.family.disks.push_back(dI);
        cert.family.witness.push_back(std::move(witness));
    }
    cert.form = sparse_form_eval(cert.family, f, g, r, s);
    cert.ratio = cert.form > 0.0 ? cert.pairing / cert.form : 0.0;
    cert.audit = audit_sparse_family(cert.family);
    return cert;
}

/// Random indicator pairs on boxes of the given sizes: f is Bernoulli(1/2) on
/// a random sub-square, g is Bernoulli(1/2) on the whole box.
inline ExperimentReport sparse_experiment(const DivisorTable& table, const std::vector<i64>& Nset, double r,
                                          double s, int trials, const std::vector<i64>& box_sizes,
                                          std::uint64_t seed, double kappa = 0.0)
{
    ExperimentReport rep;
    rep.experiment = "sparse";
    rep.seed = seed;
    rep.N = std::to_string(Nset.empty() ? 0 : Nset.back());
    rep.p = detail::fmt_p(r) + ";" + detail::fmt_p(s);
    rep.kappa = kappa;
    rep.columns = {"box", "trials", "max_ratio", "mean_ratio", "max_family_size", "audit_failures"};
    for (std::size_t bi = 0; bi < box_sizes.size(); ++bi) {
        const i64 L = box_sizes[bi];
        const Box box{{-L / 2, -L / 2}, L, L};
        std::vector<double> ratio(static_cast<std::size_t>(trials));
        std::vector<i64> fam(ratio.size()), fails(ratio.size());
        parallel_for(ratio.size(), [&](std::size_t t) {
            std::mt19937_64 rng(trial_seed(seed, bi * 1000003ULL + t));
            GridFunction f(box), g(box);
            const i64 sub = std::max<i64>(1, L / 4 + static_cast<i64>(rng() % static_cast<u64>(L - L / 4)));
            const i64 ox = static_cast<i64>(rng() % static_cast<u64>(L - sub + 1));
            const i64 oy = static_cast<i64>(rng() % static_cast<u64>(L - sub + 1));
            for (i64 y = 0; y < L; ++y)
                for (i64 x = 0; x < L; ++x) {
                    if (x >= ox && x < ox + sub && y >= oy && y < oy + sub && uniform01(rng) < 0.5)
                        f.local(x, y) = 1.0;
                    if (uniform01(rng) < 0.5) g.local(x, y) = 1.0;
                }
            const auto cert = greedy_sparse_certificate(f, g, table, Nset, r, s);
            ratio[t] = cert.ratio;
            fam[t] = static_cast<i64>(cert.family.disks.size());
            fails[t] = static_cast<i64>(cert.audit.failures);
        });
        CompensatedSum mean;
        for (double v : ratio) mean.add(v);
        i64 fail_total = 0;
        for (i64 v : fails) fail_total += v;
        rep.add_row({L, static_cast<std::int64_t>(trials), max_of(ratio), mean.value() / trials,
                     *std::max_element(fam.begin(), fam.end()), fail_total});
    }
    return rep;
}

namespace detail {

template <class Engine>
GridFunction random_sign_box(const Box& box, Engine& rng)
{
    GridFunction f(box);
    for (auto& v : f.data()) v = (rng() >> 63) ? 1.0 : -1.0;
    return f;
}

} // namespace detail

/// Square function sum_k ||A_{N_k} f - V_{N_k} f||^2 / ||f||^2 with
/// N_k = ceil(rho^k), k = 1..kmax (stopping at the table size). Trial 0 uses
/// f = delta_0, the rest random signs on a centered box. One row per (trial, k)
/// with the running sum. V is applied through its multiplier on the FFT grid;
/// with `cutoff` the switch-off rule for large shells is honoured.
inline ExperimentReport square_function_experiment(const DivisorTable& table, double rho, int f_trials,
                                                   int kmax, i64 box_size, std::uint64_t seed,
                                                   bool cutoff = true, double kappa = 0.0)
{
    require(rho > 1.0, "square_function_experiment: rho must be > 1");
    require(f_trials >= 1 && kmax >= 1 && box_size >= 1, "square_function_experiment: bad sizes");
    std::vector<i64> Ns;
    for (int k = 1; k <= kmax; ++k) {
        const auto N = static_cast<i64>(std::ceil(std::pow(rho, k) - 1e-9));
        if (N > table.nmax()) break;
        if (!Ns.empty() && N == Ns.back()) continue;
        Ns.push_back(N);
    }
    require(!Ns.empty(), "square_function_experiment: no scale fits the table");
    const Box in{{-box_size / 2, -box_size / 2}, box_size, box_size};
    const AveragingBank bank(table, Ns, in, in.expanded(isqrt(Ns.back())));

    // V multipliers sampled once per scale on the bank grid.
    const int half = bank.cols() / 2 + 1;
    std::vector<std::vector<double>> vmult(Ns.size());
    std::vector<bool> vzero(Ns.size(), true);
    for (std::size_t i = 0; i < Ns.size(); ++i) {
        vmult[i].resize(static_cast<std::size_t>(bank.rows()) * half);
        for (int ky = 0; ky < bank.rows(); ++ky)
            for (int kx = 0; kx < half; ++kx) {
                const double v = V_total_hat(Ns[i], bank.frequency(ky, kx), cutoff, 0).real();
                vmult[i][static_cast<std::size_t>(ky) * half + kx] = v;
                if (v != 0.0) vzero[i] = false;
            }
    }

    ExperimentReport rep;
    rep.experiment = "sqfunc";
    rep.seed = seed;
    rep.N = std::to_string(Ns.back());
    rep.p = "2";
    rep.kappa = kappa;
    rep.columns = {"trial", "f_kind", "k", "N_k", "cumulative_ratio"};
    std::vector<std::vector<double>> cum(static_cast<std::size_t>(f_trials));
    parallel_for(cum.size(), [&](std::size_t t) {
        std::mt19937_64 rng(trial_seed(seed, t));
        GridFunction f = t == 0 ? GridFunction::delta({0, 0}).resampled(in) : detail::random_sign_box(in, rng);
        const double f2 = f.l2_squared();
        const auto spec = bank.transform(f);
        double acc = 0.0;
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            GridFunction a = bank.apply(spec, i);
            if (!vzero[i]) {
                const GridFunction vf = bank.apply_sampled(spec, vmult[i]);
                for (std::size_t k = 0; k < a.data().size(); ++k) a.data()[k] -= vf.data()[k];
            }
            acc += a.l2_squared() / f2;
            cum[t].push_back(acc);
        }
    });
    for (std::size_t t = 0; t < cum.size(); ++t)
        for (std::size_t i = 0; i < Ns.size(); ++i)
            rep.add_row({static_cast<std::int64_t>(t), std::string(t == 0 ? "delta" : "random"),
                         static_cast<std::int64_t>(i + 1), Ns[i], cum[t][i]});
    return rep;
}

/// Oscillation sum over dyadic blocks N_k = 2^k, k = 1..kmax:
/// sum_k || max_{N in I_R, N_k <= N < N_{k+1}} |A_N f - A_{N_{k+1}} f| ||^2 / ||f||^2.
/// Trial 0 uses f = delta_0; the rest random signs on a centered box.
/// One row per (trial, k) with the running sum.
inline ExperimentReport oscillation_experiment(const DivisorTable& table, int R, int kmax, int f_trials,
                                               i64 box_size, std::uint64_t seed, double kappa = 0.0)
{
    require(R >= 1, "oscillation_experiment: R must be >= 1");
    require(kmax >= 1 && f_trials >= 1 && box_size >= 1, "oscillation_experiment: bad sizes");
    const i64 top = i64{1} << (kmax + 1);
    require(top <= table.nmax(), "oscillation_experiment: table too small for N_{kmax+1}");
    const auto IR = lacunary_scales(R, top);
    std::vector<i64> scales;
    for (i64 N : IR)
        if (N >= 2) scales.push_back(N);
    auto index_of = [&](i64 N) {
        return static_cast<std::size_t>(std::lower_bound(scales.begin(), scales.end(), N) - scales.begin());
    };
    const Box in{{-box_size / 2, -box_size / 2}, box_size, box_size};
    const AveragingBank bank(table, scales, in, in.expanded(isqrt(top)));

    ExperimentReport rep;
    rep.experiment = "oscillation";
    rep.seed = seed;
    rep.N = std::to_string(top);
    rep.p = "2";
    rep.kappa = kappa;
    rep.columns = {"trial", "f_kind", "k", "N_k", "cumulative_ratio"};
    std::vector<std::vector<double>> cum(static_cast<std::size_t>(f_trials));
    parallel_for(cum.size(), [&](std::size_t t) {
        std::mt19937_64 rng(trial_seed(seed, t));
        GridFunction f = t == 0 ? GridFunction::delta({0, 0}).resampled(in) : detail::random_sign_box(in, rng);
        const double f2 = f.l2_squared();
        const auto spec = bank.transform(f);
        std::vector<GridFunction> A;
        for (std::size_t i = 0; i < scales.size(); ++i) A.push_back(bank.apply(spec, i));
        double acc = 0.0;
        for (int k = 1; k <= kmax; ++k) {
            const i64 Nk = i64{1} << k, Nk1 = i64{1} << (k + 1);
            const GridFunction& end = A[index_of(Nk1)];
            std::vector<double> mx(end.data().size(), 0.0);
            for (std::size_t i = index_of(Nk); i < scales.size() && scales[i] < Nk1; ++i)
                for (std::size_t c = 0; c < mx.size(); ++c)
                    mx[c] = std::max(mx[c], std::abs(A[i].data()[c] - end.data()[c]));
            CompensatedSum sq;
            for (double v : mx) sq.add(v * v);
            acc += sq.value() / f2;
            cum[t].push_back(acc);
        }
    });
    for (std::size_t t = 0; t < cum.size(); ++t)
        for (int k = 1; k <= kmax; ++k)
            rep.add_row({static_cast<std::int64_t>(t), std::string(t == 0 ? "delta" : "random"),
                         static_cast<std::int64_t>(k), i64{1} << k, cum[t][static_cast<std::size_t>(k - 1)]});
    return rep;
}

} // namespace gdiv
