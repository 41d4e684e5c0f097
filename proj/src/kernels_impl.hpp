#ifndef MODNET_KERNELS_IMPL_HPP
#define MODNET_KERNELS_IMPL_HPP

#include "modnet/kernels.hpp"

#include <cstddef>

namespace modnet::kernels::detail {

struct Impl {
    Moments (*moments)(const double*, std::size_t);
    void (*add)(double*, const double*, std::size_t);
    void (*add_squares)(double*, const double*, std::size_t);
    double (*squared_deviation_sum)(const double*, std::size_t, double);
};

extern const Impl scalar_impl;

#if defined(MODNET_HAVE_AVX2)
extern const Impl avx2_impl;
#endif

}  // namespace modnet::kernels::detail

#endif
