#pragma once

#include "cbec/common.hpp"

#include <memory>

namespace cbec {

// Batched in-place 2D FFT over `batch` contiguous n×n slices (unnormalized,
// FFTW sign convention). Plans are created under a global planner lock, so
// separate instances may run on separate threads.
class Fft2D {
public:
    Fft2D(int n, int batch = 1);
    ~Fft2D();
    Fft2D(const Fft2D&) = delete;
    Fft2D& operator=(const Fft2D&) = delete;

    void forward(cplx* data) const;
    void backward(cplx* data) const;

    int n() const { return n_; }
    int batch() const { return batch_; }

private:
    struct Plans;
    int n_, batch_;
    std::unique_ptr<Plans> plans_;
};

// Angular wavenumbers 2π/box·(0, 1, …, n/2 − 1, −n/2, …, −1).
Eigen::VectorXd wavenumbers(int n, double box);

const char* fft_backend_version();

}  // namespace cbec
