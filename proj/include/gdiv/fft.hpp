#pragma once

// Thin RAII layer over FFTW3. Planning is serialized through one mutex
// because the FFTW planner is not thread-safe; executing distinct plan
// objects concurrently is fine.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <type_traits>

#include <fftw3.h>

#include "gdiv/error.hpp"

namespace gdiv {

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

struct PlanDestroy {
    void operator()(fftw_plan p) const
    {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};

using PlanPtr = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDestroy>;

} // namespace detail

/// Smallest integer >= n whose only prime factors are 2, 3 and 5.
inline int fft_good_size(int n)
{
    for (int m = std::max(n, 1);; ++m) {
        int k = m;
        for (int p : {2, 3, 5})
            while (k % p == 0) k /= p;
        if (k == 1) return m;
    }
}

inline int next_pow2(long long n)
{
    int m = 1;
    while (m < n) m <<= 1;
    return m;
}

/// In-place complex 2D DFT of size rows x cols (row-major). sign = FFTW_FORWARD
/// computes sum f(x) e^{-2 pi i <x,k>/n}; FFTW_BACKWARD uses +, unnormalized.
class ComplexDft2D {
public:
    ComplexDft2D(int rows, int cols, int sign) : rows_(rows), cols_(cols)
    {
        require(rows > 0 && cols > 0, "ComplexDft2D: empty grid");
        buf_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * size())));
        require(buf_ != nullptr, "ComplexDft2D: allocation failed");
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        plan_.reset(fftw_plan_dft_2d(rows, cols, buf_.get(), buf_.get(), sign, FFTW_ESTIMATE));
        require(plan_ != nullptr, "ComplexDft2D: planning failed");
    }

    std::size_t size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_.get()); }
    void execute() { fftw_execute(plan_.get()); }

private:
    int rows_;
    int cols_;
    std::unique_ptr<fftw_complex, detail::FftwFree> buf_;
    detail::PlanPtr plan_;
};

/// Real-to-complex and complex-to-real 2D transforms sharing one pair of
/// buffers, for cyclic convolution of real arrays.
class RealDft2D {
public:
    RealDft2D(int rows, int cols) : rows_(rows), cols_(cols)
    {
        require(rows > 0 && cols > 0, "RealDft2D: empty grid");
        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * real_size())));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * spectrum_size())));
        require(real_ != nullptr && spec_ != nullptr, "RealDft2D: allocation failed");
        std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
        fwd_.reset(fftw_plan_dft_r2c_2d(rows, cols, real_.get(), spec_.get(), FFTW_ESTIMATE));
        inv_.reset(fftw_plan_dft_c2r_2d(rows, cols, spec_.get(), real_.get(), FFTW_ESTIMATE));
        require(fwd_ != nullptr && inv_ != nullptr, "RealDft2D: planning failed");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::size_t real_size() const { return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_); }
    std::size_t spectrum_size() const
    {
        return static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_ / 2 + 1);
    }

    double* real() { return real_.get(); }
    std::complex<double>* spectrum() { return reinterpret_cast<std::complex<double>*>(spec_.get()); }

    /// real() -> spectrum(). Note the c2r plan may overwrite spectrum() later.
    void forward() { fftw_execute(fwd_.get()); }
    /// spectrum() -> real(), unnormalized (scaled by rows*cols); destroys spectrum().
    void inverse() { fftw_execute(inv_.get()); }

private:
    int rows_;
    int cols_;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
    detail::PlanPtr fwd_;
    detail::PlanPtr inv_;
};

} // namespace gdiv
