// Times the serial reference kernels against the OpenMP versions on
// training-shaped workloads. Both must agree bitwise; this only reports speed.
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "scotti/kernels.hpp"
#include "scotti/rng.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = clock_type::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = clock_type::now();
    return std::chrono::duration<double>(t1 - t0).count() / reps;
}

void report(const char* name, double flops, double serial_s, double par_s) {
    std::printf("%-14s %9.3f ms serial  %9.3f ms parallel  %5.2fx  (%.2f GFLOP/s parallel)\n",
                name, serial_s * 1e3, par_s * 1e3, serial_s / par_s, flops / par_s * 1e-9);
}

}  // namespace

int main() {
    namespace k = scotti::kernels;
    scotti::Rng rng(99);

    std::printf("kernel benchmark: serial reference vs OpenMP backend\n\n");

    {
        const int m = 256, p = 256, n = 256;
        std::vector<double> a(static_cast<std::size_t>(m) * p), b(static_cast<std::size_t>(p) * n),
            c(static_cast<std::size_t>(m) * n);
        for (double& v : a) v = rng.gauss();
        for (double& v : b) v = rng.gauss();
        const double flops = 2.0 * m * p * n;
        const double ts = time_of([&] { k::serial::matmul_nn(c.data(), a.data(), b.data(), m, p, n); }, 5);
        const double tp = time_of([&] { k::par::matmul_nn(c.data(), a.data(), b.data(), m, p, n); }, 5);
        report("matmul 256^3", flops, ts, tp);
    }

    {
        const int batch = 128, in = 512, out = 512;
        std::vector<double> x(static_cast<std::size_t>(batch) * in),
            w(static_cast<std::size_t>(out) * in), bias(out),
            y(static_cast<std::size_t>(batch) * out);
        for (double& v : x) v = rng.gauss();
        for (double& v : w) v = rng.gauss();
        for (double& v : bias) v = rng.gauss();
        const double flops = 2.0 * batch * in * out + 1.0 * batch * out;
        const double ts = time_of(
            [&] { k::serial::linear_fwd(y.data(), x.data(), w.data(), bias.data(), batch, in, out); }, 5);
        const double tp = time_of(
            [&] { k::par::linear_fwd(y.data(), x.data(), w.data(), bias.data(), batch, in, out); }, 5);
        report("linear 512", flops, ts, tp);
    }

    {
        const int n = 32, c = 8, h = 34, w = 34, f = 16;
        const int oh = h - 2, ow = w - 2;
        std::vector<double> x(static_cast<std::size_t>(n) * c * h * w),
            kk(static_cast<std::size_t>(f) * c * 9), bias(f),
            y(static_cast<std::size_t>(n) * f * oh * ow);
        for (double& v : x) v = rng.gauss();
        for (double& v : kk) v = rng.gauss();
        const double flops = 2.0 * 9 * c * f * oh * ow * n;
        const double ts = time_of(
            [&] { k::serial::conv3x3_fwd(y.data(), x.data(), kk.data(), bias.data(), n, c, h, w, f); },
            5);
        const double tp = time_of(
            [&] { k::par::conv3x3_fwd(y.data(), x.data(), kk.data(), bias.data(), n, c, h, w, f); },
            5);
        report("conv3x3", flops, ts, tp);
    }

    {
        const std::size_t n = 1u << 22;
        std::vector<double> x(n), y(n);
        for (double& v : x) v = rng.gauss();
        const double ts = time_of([&] { k::serial::relu_fwd(y.data(), x.data(), n); }, 5);
        const double tp = time_of([&] { k::par::relu_fwd(y.data(), x.data(), n); }, 5);
        report("relu 4M", static_cast<double>(n), ts, tp);
    }

    return 0;
}
