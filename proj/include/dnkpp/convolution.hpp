#pragma once

// Circular convolution of grid fields with sampled kernels: FFTW-based spectral
// backend and a direct O(N^2) reference backend with a fixed summation order.

#include "dnkpp/errors.hpp"
#include "dnkpp/grid.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace dnkpp {

enum class ConvolutionBackend { spectral, direct };

namespace detail {

// FFTW's planner is not thread safe.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using fftw_buffer = std::unique_ptr<T[], FftwDeleter>;

template <class T>
fftw_buffer<T> fftw_alloc(std::size_t n) {
    auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
    if (!p) throw std::bad_alloc();
    return fftw_buffer<T>(p);
}

class FftPair {
public:
    explicit FftPair(const Grid& g) : grid_(g) {
        const int n = static_cast<int>(g.points);
        real_n_ = g.size();
        complex_n_ = g.dimension == 1 ? g.points / 2 + 1 : g.points * (g.points / 2 + 1);
        real_ = fftw_alloc<double>(real_n_);
        spec_ = fftw_alloc<fftw_complex>(complex_n_);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (g.dimension == 1) {
            fwd_ = fftw_plan_dft_r2c_1d(n, real_.get(), spec_.get(), FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_1d(n, spec_.get(), real_.get(), FFTW_ESTIMATE);
        } else {
            fwd_ = fftw_plan_dft_r2c_2d(n, n, real_.get(), spec_.get(), FFTW_ESTIMATE);
            bwd_ = fftw_plan_dft_c2r_2d(n, n, spec_.get(), real_.get(), FFTW_ESTIMATE);
        }
        if (!fwd_ || !bwd_) throw Error("FFTW planning failed");
    }
    FftPair(const FftPair&) = delete;
    FftPair& operator=(const FftPair&) = delete;
    ~FftPair() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }

    double* real() { return real_.get(); }
    fftw_complex* spectrum() { return spec_.get(); }
    std::size_t real_size() const { return real_n_; }
    std::size_t complex_size() const { return complex_n_; }
    void forward() { fftw_execute(fwd_); }
    void backward() { fftw_execute(bwd_); }

private:
    Grid grid_;
    std::size_t real_n_ = 0;
    std::size_t complex_n_ = 0;
    fftw_buffer<double> real_;
    fftw_buffer<fftw_complex> spec_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

}  // namespace detail

/// Convolves fields with one or two fixed kernels. Holds FFTW plans and work
/// buffers, so an instance must not be used from two threads at once.
class Convolver {
public:
    Convolver(std::vector<KernelWeights> kernels, ConvolutionBackend backend = ConvolutionBackend::spectral)
        : kernels_(std::move(kernels)), backend_(backend) {
        if (kernels_.empty()) throw InvalidArgument("convolver needs at least one kernel");
        grid_ = kernels_.front().grid;
        for (const auto& k : kernels_)
            if (!(k.grid == grid_)) throw InvalidArgument("kernels live on different grids");
        if (backend_ == ConvolutionBackend::spectral) {
            fft_ = std::make_unique<detail::FftPair>(grid_);
            const double scale = 1.0 / static_cast<double>(grid_.size());
            for (const auto& k : kernels_) {
                std::memcpy(fft_->real(), k.w.data(), sizeof(double) * grid_.size());
                fft_->forward();
                std::vector<std::complex<double>> hat(fft_->complex_size());
                for (std::size_t i = 0; i < hat.size(); ++i)
                    hat[i] = std::complex<double>(fft_->spectrum()[i][0], fft_->spectrum()[i][1]) * scale;
                hats_.push_back(std::move(hat));
            }
            u_hat_.resize(fft_->complex_size());
        }
    }

    const Grid& grid() const noexcept { return grid_; }
    ConvolutionBackend backend() const noexcept { return backend_; }
    std::size_t kernel_count() const noexcept { return kernels_.size(); }
    const KernelWeights& weights(std::size_t i) const { return kernels_.at(i); }

    /// out[j] = (kernel_j * u) for every kernel j.
    void apply(std::span<const double> u, std::span<std::vector<double>> out) {
        if (u.size() != grid_.size()) throw InvalidArgument("field size does not match the grid");
        if (out.size() != kernels_.size()) throw InvalidArgument("wrong number of outputs");
        for (auto& o : out) o.resize(grid_.size());
        if (backend_ == ConvolutionBackend::direct) {
            for (std::size_t j = 0; j < kernels_.size(); ++j) direct(kernels_[j], u, out[j]);
            return;
        }
        std::memcpy(fft_->real(), u.data(), sizeof(double) * u.size());
        fft_->forward();
        for (std::size_t i = 0; i < u_hat_.size(); ++i)
            u_hat_[i] = std::complex<double>(fft_->spectrum()[i][0], fft_->spectrum()[i][1]);
        for (std::size_t j = 0; j < kernels_.size(); ++j) {
            const auto& hat = hats_[j];
            for (std::size_t i = 0; i < u_hat_.size(); ++i) {
                const std::complex<double> z = u_hat_[i] * hat[i];
                fft_->spectrum()[i][0] = z.real();
                fft_->spectrum()[i][1] = z.imag();
            }
            fft_->backward();
            std::memcpy(out[j].data(), fft_->real(), sizeof(double) * u.size());
        }
    }

    std::vector<double> apply_one(std::span<const double> u, std::size_t kernel = 0) {
        std::vector<std::vector<double>> all(kernels_.size());
        apply(u, all);
        return std::move(all.at(kernel));
    }

    /// Reference circular convolution with a fixed summation order.
    static void direct(const KernelWeights& k, std::span<const double> u, std::vector<double>& out) {
        const Grid& g = k.grid;
        const std::size_t n = g.points;
        out.assign(g.size(), 0.0);
        if (g.dimension == 1) {
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (std::size_t m = 0; m < n; ++m) s += k.w[m] * u[(i + n - m) % n];
                out[i] = s;
            }
            return;
        }
        for (std::size_t i1 = 0; i1 < n; ++i1)
            for (std::size_t i2 = 0; i2 < n; ++i2) {
                double s = 0.0;
                for (std::size_t m1 = 0; m1 < n; ++m1) {
                    const std::size_t r = ((i1 + n - m1) % n) * n;
                    const double* wrow = &k.w[m1 * n];
                    for (std::size_t m2 = 0; m2 < n; ++m2) s += wrow[m2] * u[r + (i2 + n - m2) % n];
                }
                out[i1 * n + i2] = s;
            }
    }

private:
    std::vector<KernelWeights> kernels_;
    ConvolutionBackend backend_;
    Grid grid_;
    std::unique_ptr<detail::FftPair> fft_;
    std::vector<std::vector<std::complex<double>>> hats_;
    std::vector<std::complex<double>> u_hat_;
};

}  // namespace dnkpp
