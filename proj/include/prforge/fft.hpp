#pragma once

// Thin wrapper over FFTW's 2-D complex transforms. Plans are created once per
// (rows, cols, direction) under a mutex; executing a plan on caller-owned
// arrays through the new-array interface is thread safe. FFTW_UNALIGNED keeps
// the chosen codelets independent of buffer alignment so results are bitwise
// reproducible whichever thread runs them.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace prforge::fft {

using Complex = std::complex<double>;

enum class Direction { forward, backward };

namespace detail {

class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t rows, std::size_t cols, Direction dir) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(rows, cols, dir == Direction::forward);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<Complex> scratch_in(rows * cols);
        std::vector<Complex> scratch_out(rows * cols);
        fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                                          reinterpret_cast<fftw_complex*>(scratch_in.data()),
                                          reinterpret_cast<fftw_complex*>(scratch_out.data()),
                                          dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, bool>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalised 2-D DFT of a row-major rows x cols array. `in` and `out` must
/// not alias (plans are out-of-place).
inline void transform(const Complex* in, Complex* out, std::size_t rows, std::size_t cols, Direction dir) {
    fftw_plan plan = detail::PlanCache::instance().get(rows, cols, dir);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

}  // namespace prforge::fft
