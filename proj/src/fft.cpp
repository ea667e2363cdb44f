#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace bandflow::detail {

namespace {
// Planner calls are not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<std::complex<double>> forward_dft(std::vector<std::complex<double>> x) {
    std::vector<std::complex<double>> out(x.size());
    auto* in_ptr = reinterpret_cast<fftw_complex*>(x.data());
    auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(x.size()), in_ptr, out_ptr, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace bandflow::detail
