#include "learnfbp/fft.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "learnfbp/errors.hpp"

namespace learnfbp {

Spectrum::Spectrum(Shape dims) : dims_(std::move(dims)), size_(element_count(dims_)) {
    require(dims_.size() == 1 || dims_.size() == 2, "Spectrum supports 1D or 2D blocks");
    require(size_ > 0, "empty spectrum");
    work_.resize(size_);
    const std::size_t longest = *std::max_element(dims_.begin(), dims_.end());
    line_in_.resize(longest);
    line_out_.resize(longest);
}

void Spectrum::forward(std::span<const double> in, std::span<Complex> out) {
    require(in.size() == size_ && out.size() == size_, "Spectrum::forward size mismatch");
    for (std::size_t i = 0; i < size_; ++i) work_[i] = Complex(in[i], 0.0);
    if (dims_.size() == 1) {
        fft_.fwd(out.data(), work_.data(), static_cast<Eigen::Index>(size_));
        return;
    }
    const std::size_t rows = dims_[0], cols = dims_[1];
    for (std::size_t r = 0; r < rows; ++r)
        fft_.fwd(out.data() + r * cols, work_.data() + r * cols,
                 static_cast<Eigen::Index>(cols));
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) line_in_[r] = out[r * cols + c];
        fft_.fwd(line_out_.data(), line_in_.data(), static_cast<Eigen::Index>(rows));
        for (std::size_t r = 0; r < rows; ++r) out[r * cols + c] = line_out_[r];
    }
}

void Spectrum::inverse(std::span<const Complex> in, std::span<Complex> out) {
    require(in.size() == size_ && out.size() == size_, "Spectrum::inverse size mismatch");
    if (dims_.size() == 1) {
        fft_.inv(out.data(), in.data(), static_cast<Eigen::Index>(size_));
        return;
    }
    const std::size_t rows = dims_[0], cols = dims_[1];
    for (std::size_t r = 0; r < rows; ++r)
        fft_.inv(out.data() + r * cols, in.data() + r * cols,
                 static_cast<Eigen::Index>(cols));
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) line_in_[r] = out[r * cols + c];
        fft_.inv(line_out_.data(), line_in_.data(), static_cast<Eigen::Index>(rows));
        for (std::size_t r = 0; r < rows; ++r) out[r * cols + c] = line_out_[r];
    }
}

void Spectrum::inverse(std::span<const Complex> in, std::span<double> out) {
    require(out.size() == size_, "Spectrum::inverse size mismatch");
    inverse(in, std::span<Complex>(work_));
#ifndef NDEBUG
    double re = 0.0, im = 0.0;
    for (const auto& z : work_) {
        re = std::max(re, std::abs(z.real()));
        im = std::max(im, std::abs(z.imag()));
    }
    assert(im <= 1e-10 * std::max(re, 1.0) && "non-Hermitian spectrum");
#endif
    for (std::size_t i = 0; i < size_; ++i) out[i] = work_[i].real();
}

} // namespace learnfbp
