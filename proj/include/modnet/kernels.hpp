#ifndef MODNET_KERNELS_HPP
#define MODNET_KERNELS_HPP

#include <cstddef>
#include <span>
#include <string>

// Arithmetic inner loops shared by scoring, standardization and the merge
// initializer. Each kernel has a scalar reference implementation and an AVX2
// variant; the active variant is picked once at runtime from CPU features.
// Scalar accumulations are compensated (Kahan), so the scalar path is also the
// accuracy reference in the equivalence tests.

namespace modnet::kernels {

struct Moments {
    double sum = 0.0;
    double sumsq = 0.0;
};

// Sum and sum of squares of x.
Moments moments(std::span<const double> x);

// dst[i] += src[i]
void add(std::span<double> dst, std::span<const double> src);

// dst[i] += src[i]^2
void add_squares(std::span<double> dst, std::span<const double> src);

// Sum of (x[i] - mean)^2.
double squared_deviation_sum(std::span<const double> x, double mean);

enum class Backend { scalar, avx2 };

Backend active_backend();
std::string backend_name(Backend b);

// Test hook: force a backend (throws if unavailable on this CPU). Not safe to
// call while kernels are executing on other threads.
void force_backend(Backend b);
void reset_backend();

}  // namespace modnet::kernels

#endif
