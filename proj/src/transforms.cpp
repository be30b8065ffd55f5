#include "dynamo/transforms.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>

#include "dynamo/errors.hpp"

namespace dynamo {

int padded_size(int n) {
    if (n < 1) n = 1;
    for (int m = n;; ++m) {
        int r = m;
        for (int f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

namespace {

// One cached in-place c2c plan pair per grid size. FFTW_ESTIMATE keeps planning
// deterministic; with FFTW_MEASURE the chosen algorithm (and hence roundoff) can
// differ between runs, which would break byte-identical outputs.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

std::map<int, PlanPair>& plan_cache() {
    static std::map<int, PlanPair> cache;
    return cache;
}

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

PlanPair get_plans(int m, Cplx* probe) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto& cache = plan_cache();
    auto it = cache.find(m);
    if (it != cache.end()) return it->second;
    PlanPair p;
    auto* buf = reinterpret_cast<fftw_complex*>(probe);
    p.fwd = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_3d(m, m, m, buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.fwd || !p.bwd) fail(Err::BadConfig, "fftw plan creation failed for size " + std::to_string(m));
    cache[m] = p;
    return p;
}

}  // namespace

GridWorkspace::GridWorkspace(int grid_size) : m_(grid_size) {
    for (auto& b : buf_) b.assign(points(), Cplx(0.0, 0.0));
    get_plans(m_, buf_[0].data());
}

GridWorkspace::~GridWorkspace() = default;

void GridWorkspace::load(const SpectralVectorField& f) {
    const int n = f.truncation();
    if (2 * n + 1 > m_) fail(Err::TruncationMismatch, "grid too small for truncation");
    const PlanPair plans = get_plans(m_, buf_[0].data());
    for (int c = 0; c < 3; ++c) {
        std::fill(buf_[c].begin(), buf_[c].end(), Cplx(0.0, 0.0));
        auto comp = f.component(c);
        std::size_t src = 0;
        for (int k1 = -n; k1 <= n; ++k1) {
            const std::size_t w1 = std::size_t((k1 + m_) % m_) * m_;
            for (int k2 = -n; k2 <= n; ++k2) {
                const std::size_t w12 = (w1 + std::size_t((k2 + m_) % m_)) * m_;
                for (int k3 = -n; k3 <= n; ++k3, ++src) buf_[c][w12 + std::size_t((k3 + m_) % m_)] = comp[src];
            }
        }
        fftw_execute_dft(plans.bwd, reinterpret_cast<fftw_complex*>(buf_[c].data()),
                         reinterpret_cast<fftw_complex*>(buf_[c].data()));
    }
}

void GridWorkspace::store(SpectralVectorField& f) const {
    const int n = f.truncation();
    if (2 * n + 1 > m_) fail(Err::TruncationMismatch, "grid too small for truncation");
    const PlanPair plans = get_plans(m_, const_cast<Cplx*>(buf_[0].data()));
    const double scale = 1.0 / double(points());
    std::vector<Cplx> tmp(points());
    for (int c = 0; c < 3; ++c) {
        std::copy(buf_[c].begin(), buf_[c].end(), tmp.begin());
        fftw_execute_dft(plans.fwd, reinterpret_cast<fftw_complex*>(tmp.data()),
                         reinterpret_cast<fftw_complex*>(tmp.data()));
        auto comp = f.component(c);
        std::size_t dst = 0;
        for (int k1 = -n; k1 <= n; ++k1) {
            const std::size_t w1 = std::size_t((k1 + m_) % m_) * m_;
            for (int k2 = -n; k2 <= n; ++k2) {
                const std::size_t w12 = (w1 + std::size_t((k2 + m_) % m_)) * m_;
                for (int k3 = -n; k3 <= n; ++k3, ++dst) comp[dst] = scale * tmp[w12 + std::size_t((k3 + m_) % m_)];
            }
        }
    }
}

void GridWorkspace::cross_with(const GridWorkspace& other) {
    if (other.m_ != m_) fail(Err::TruncationMismatch, "grid size mismatch in cross product");
    const std::size_t np = points();
    Cplx* a0 = buf_[0].data();
    Cplx* a1 = buf_[1].data();
    Cplx* a2 = buf_[2].data();
    const Cplx* b0 = other.buf_[0].data();
    const Cplx* b1 = other.buf_[1].data();
    const Cplx* b2 = other.buf_[2].data();
    for (std::size_t i = 0; i < np; ++i) {
        const Cplx x = a1[i] * b2[i] - a2[i] * b1[i];
        const Cplx y = a2[i] * b0[i] - a0[i] * b2[i];
        const Cplx z = a0[i] * b1[i] - a1[i] * b0[i];
        a0[i] = x;
        a1[i] = y;
        a2[i] = z;
    }
}

double GridWorkspace::max_pointwise_norm() const {
    double worst = 0.0;
    const std::size_t np = points();
    for (std::size_t i = 0; i < np; ++i) {
        const double v = std::norm(buf_[0][i]) + std::norm(buf_[1][i]) + std::norm(buf_[2][i]);
        worst = std::max(worst, v);
    }
    return std::sqrt(worst);
}

double grid_sup_norm(const SpectralVectorField& f, int refine) {
    // Multiple of 8 so the extrema of low-order trigonometric profiles (which sit
    // at eighth-period points) are sampled exactly.
    int m = std::max(8, refine * (f.truncation() + 1));
    m = padded_size((m + 7) / 8 * 8);
    while (m % 8 != 0) m = padded_size(m + 1);
    GridWorkspace g(m);
    g.load(f);
    return g.max_pointwise_norm();
}

}  // namespace dynamo
