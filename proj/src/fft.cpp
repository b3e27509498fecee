#include "cbec/fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace cbec {

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

}  // namespace

struct Fft2D::Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft2D::Fft2D(int n, int batch) : n_(n), batch_(batch), plans_(std::make_unique<Plans>())
{
    require(n >= 2 && batch >= 1, "Fft2D: need n >= 2 and batch >= 1");
    const auto len = static_cast<std::size_t>(n) * n * batch;
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * len));
    ensure(scratch != nullptr, "Fft2D: allocation failed");
    const int dims[2] = {n, n};
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plans_->fwd = fftw_plan_many_dft(2, dims, batch, scratch, nullptr, 1, n * n, scratch, nullptr, 1, n * n,
                                         FFTW_FORWARD, flags);
        plans_->bwd = fftw_plan_many_dft(2, dims, batch, scratch, nullptr, 1, n * n, scratch, nullptr, 1, n * n,
                                         FFTW_BACKWARD, flags);
    }
    fftw_free(scratch);
    ensure(plans_->fwd != nullptr && plans_->bwd != nullptr, "Fft2D: planning failed");
}

Fft2D::~Fft2D()
{
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
    if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

void Fft2D::forward(cplx* data) const
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans_->fwd, p, p);
}

void Fft2D::backward(cplx* data) const
{
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plans_->bwd, p, p);
}

Eigen::VectorXd wavenumbers(int n, double box)
{
    Eigen::VectorXd k(n);
    for (int j = 0; j < n; ++j) k(j) = 2.0 * pi / box * (j < n / 2 ? j : j - n);
    return k;
}

const char* fft_backend_version()
{
    return fftw_version;
}

}  // namespace cbec
