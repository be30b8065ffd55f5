#pragma once

#include <vector>

#include "dynamo/fourier_field.hpp"
#include "dynamo/types.hpp"

namespace dynamo {

// Smallest FFT-friendly size (factors 2, 3, 5, 7) not below n.
int padded_size(int n);

// Complex collocation values of one field component on an M^3 grid, theta_j = j / M,
// node order matching the mode order (axis 1 outermost). Plans are cached per size
// and created with FFTW_ESTIMATE so repeated runs stay bit-identical.
class GridWorkspace {
  public:
    explicit GridWorkspace(int grid_size);
    ~GridWorkspace();
    GridWorkspace(const GridWorkspace&) = delete;
    GridWorkspace& operator=(const GridWorkspace&) = delete;

    int grid_size() const { return m_; }
    std::size_t points() const { return std::size_t(m_) * m_ * m_; }

    // component plane c of the collocation buffer
    Cplx* plane(int c) { return buf_[c].data(); }
    const Cplx* plane(int c) const { return buf_[c].data(); }

    // spectral -> grid for all three components
    void load(const SpectralVectorField& f);
    // grid -> spectral, truncating to the cube of the destination field
    void store(SpectralVectorField& f) const;

    // In-place pointwise cross product: this <- this wedge other.
    void cross_with(const GridWorkspace& other);

    double max_pointwise_norm() const;

  private:
    int m_;
    std::vector<Cplx> buf_[3];
};

// Max of |F(theta)| over a refined collocation grid; refine >= 2 recommended when
// the value feeds a stability bound.
double grid_sup_norm(const SpectralVectorField& f, int refine = 4);

}  // namespace dynamo
