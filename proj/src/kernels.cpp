#include "modnet/kernels.hpp"

#include <stdexcept>

#include "kernels_impl.hpp"

namespace modnet::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(MODNET_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Selected {
    const detail::Impl* impl;
    Backend backend;
};

Selected select_default() {
#if defined(MODNET_HAVE_AVX2)
    if (cpu_has_avx2()) return {&detail::avx2_impl, Backend::avx2};
#endif
    return {&detail::scalar_impl, Backend::scalar};
}

Selected& current() {
    static Selected s = select_default();
    return s;
}

}  // namespace

Moments moments(std::span<const double> x) {
    return current().impl->moments(x.data(), x.size());
}

void add(std::span<double> dst, std::span<const double> src) {
    current().impl->add(dst.data(), src.data(), dst.size());
}

void add_squares(std::span<double> dst, std::span<const double> src) {
    current().impl->add_squares(dst.data(), src.data(), dst.size());
}

double squared_deviation_sum(std::span<const double> x, double mean) {
    return current().impl->squared_deviation_sum(x.data(), x.size(), mean);
}

Backend active_backend() { return current().backend; }

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "?";
}

void force_backend(Backend b) {
    if (b == Backend::scalar) {
        current() = {&detail::scalar_impl, Backend::scalar};
        return;
    }
#if defined(MODNET_HAVE_AVX2)
    if (b == Backend::avx2 && cpu_has_avx2()) {
        current() = {&detail::avx2_impl, Backend::avx2};
        return;
    }
#endif
    throw std::runtime_error("requested kernel backend not available on this CPU");
}

void reset_backend() { current() = select_default(); }

}  // namespace modnet::kernels
