#include "kernels_impl.hpp"

namespace modnet::kernels::detail {
namespace {

// Kahan-compensated accumulator.
struct Acc {
    double sum = 0.0;
    double c = 0.0;
    void feed(double v) {
        double y = v - c;
        double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

Moments moments_scalar(const double* x, std::size_t n) {
    Acc s, q;
    for (std::size_t i = 0; i < n; ++i) {
        s.feed(x[i]);
        q.feed(x[i] * x[i]);
    }
    return {s.sum, q.sum};
}

void add_scalar(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

void add_squares_scalar(double* dst, const double* src, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += src[i] * src[i];
}

double sqdev_scalar(const double* x, std::size_t n, double mean) {
    Acc a;
    for (std::size_t i = 0; i < n; ++i) {
        double d = x[i] - mean;
        a.feed(d * d);
    }
    return a.sum;
}

}  // namespace

const Impl scalar_impl = {moments_scalar, add_scalar, add_squares_scalar, sqdev_scalar};

}  // namespace modnet::kernels::detail
