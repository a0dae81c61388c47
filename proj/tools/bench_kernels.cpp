// Benchmark comparing the serial and OpenMP matrix-multiply kernels.
// Also cross-checks that both backends produce bit-identical output.

#include "marlsim/kernels.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

using namespace marlsim;

namespace {

double now_ms() {
    auto t = std::chrono::steady_clock::now().time_since_epoch();
    return std::chrono::duration<double, std::milli>(t).count();
}

void fill_random(std::vector<double>& v, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& x : v) x = dist(rng);
}

struct Case {
    const char* name;
    int m, k, n;
};

}  // namespace

int main(int argc, char** argv) {
    int reps = 20;
    if (argc > 1) reps = std::atoi(argv[1]);
    if (reps < 1) reps = 1;

    const Case cases[] = {
        {"small (64x64x64)", 64, 64, 64},
        {"tall (2048x37x65)", 2048, 37, 65},
        {"medium (256x256x256)", 256, 256, 256},
        {"large (512x512x512)", 512, 512, 512},
    };

    std::mt19937_64 rng(12345);
    std::printf("%-22s %10s %10s %8s %9s\n", "case", "serial ms", "openmp ms",
                "speedup", "identical");
    for (const Case& c : cases) {
        std::vector<double> a((size_t)c.m * c.k), b((size_t)c.k * c.n);
        std::vector<double> c_serial((size_t)c.m * c.n), c_omp((size_t)c.m * c.n);
        fill_random(a, rng);
        fill_random(b, rng);

        // Warm up both paths once before timing.
        kernels::serial::gemm_nn(c_serial.data(), a.data(), b.data(), c.m, c.k, c.n);
        kernels::openmp::gemm_nn(c_omp.data(), a.data(), b.data(), c.m, c.k, c.n);

        double t0 = now_ms();
        for (int r = 0; r < reps; ++r)
            kernels::serial::gemm_nn(c_serial.data(), a.data(), b.data(), c.m, c.k, c.n);
        double serial_ms = (now_ms() - t0) / reps;

        t0 = now_ms();
        for (int r = 0; r < reps; ++r)
            kernels::openmp::gemm_nn(c_omp.data(), a.data(), b.data(), c.m, c.k, c.n);
        double omp_ms = (now_ms() - t0) / reps;

        bool identical = std::memcmp(c_serial.data(), c_omp.data(),
                                     c_serial.size() * sizeof(double)) == 0;
        std::printf("%-22s %10.3f %10.3f %7.2fx %9s\n", c.name, serial_ms, omp_ms,
                    serial_ms / omp_ms, identical ? "yes" : "NO");
        if (!identical) return 1;
    }
    return 0;
}
