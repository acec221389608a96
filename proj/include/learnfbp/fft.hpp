#pragma once

#include <complex>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "learnfbp/data.hpp"

namespace learnfbp {

using Complex = std::complex<double>;

/**
 * DFT over a 1D (L) or 2D (rows, cols) real block. Forward is unnormalized,
 * inverse carries the 1/L factor, so inverse(forward(x)) == x.
 * Holds scratch buffers: one instance per thread.
 */
class Spectrum {
  public:
    explicit Spectrum(Shape dims);

    std::size_t size() const { return size_; }
    const Shape& dims() const { return dims_; }

    void forward(std::span<const double> in, std::span<Complex> out);
    /// Real part of the inverse DFT. The imaginary residue is checked in debug builds.
    void inverse(std::span<const Complex> in, std::span<double> out);
    void inverse(std::span<const Complex> in, std::span<Complex> out);

  private:
    Shape dims_;
    std::size_t size_;
    Eigen::FFT<double> fft_;
    std::vector<Complex> work_, line_in_, line_out_;
};

} // namespace learnfbp
