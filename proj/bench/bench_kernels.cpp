#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "tfch/kernels.hpp"
#include "tfch/mesh.hpp"

// Compares the OpenMP kernel paths against the serial reference twins.
// Timings only; the tests assert agreement.

namespace {

using clk = std::chrono::steady_clock;

double time_of(const std::function<void()>& fn, int reps) {
    fn();  // warm up
    const auto t0 = clk::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double>(clk::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    int N = argc > 1 ? std::atoi(argv[1]) : 2000;
    if (N < 1) {
        std::fprintf(stderr, "usage: %s [N]   (N a positive row count, default 2000)\n",
                     argv[0]);
        return 2;
    }
    const double alpha = 0.5;
    const tfch::TimeMesh mesh = tfch::make_graded(1.0, N, 3.0);

    const double t_row_par =
        time_of([&] { tfch::l1_row(mesh, alpha, N); }, 20);
    const double t_row_ser =
        time_of([&] { tfch::ref::l1_row(mesh, alpha, N); }, 20);
    std::printf("l1_row       n=%d   parallel %.3e s   serial %.3e s   speedup %.2fx\n", N,
                t_row_par, t_row_ser, t_row_ser / t_row_par);

    tfch::KernelTable table(mesh, alpha, tfch::Family::L1);
    table.extend(N);
    const double t_doc_par = time_of([&] { tfch::doc_row(table, N); }, 5);
    const double t_doc_ser = time_of([&] { tfch::ref::doc_row(table, N); }, 5);
    std::printf("doc_row      n=%d   parallel %.3e s   serial %.3e s   speedup %.2fx\n", N,
                t_doc_par, t_doc_ser, t_doc_ser / t_doc_par);
    return 0;
}
