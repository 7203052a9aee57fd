// Throughput comparison: dense tensor BP kernel vs the sparse edge
// reference, single-threaded and with the full OpenMP team, plus the
// gradient pass. Usage: bpbench [code.alist] [frames]

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bpc/channel.hpp"
#include "bpc/decoder.hpp"
#include "bpc/grad.hpp"
#include "bpc/parity_check.hpp"

using namespace bpc;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : "data/codes/ldpc_32_16.alist";
    const int frames = argc > 2 ? std::atoi(argv[2]) : 20000;
    const ParityCheck code = load_code_file(path);
    const int n = code.n();

    ChannelSpec spec;
    spec.ebn0_db = 4.0;
    spec.rate = code.rate();
    const std::vector<double> symbols(n, 1.0);
    const RealMatrix batch = llr(transmit(symbols, spec, 7, frames));

    BpConfig cfg;
    cfg.iterations = 5;
    const RealMatrix h_real = to_real(code.h);
    LossConfig lc;
    lc.bp = cfg;

    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("code %s (n=%d, k=%d), %d frames, T=%d, %d thread(s) max\n", path.c_str(), n,
                code.k(), frames, cfg.iterations, threads);
    std::printf("%-34s %12s %12s\n", "kernel", "time [s]", "frames/s");

    auto report = [&](const char* name, double secs) {
        std::printf("%-34s %12.4f %12.0f\n", name, secs, frames / secs);
    };

    const std::vector<int> thread_counts = threads > 1 ? std::vector<int>{1, threads}
                                                       : std::vector<int>{1};
    for (int tc : thread_counts) {
#ifdef _OPENMP
        omp_set_num_threads(tc);
#endif
        char label[64];
        std::snprintf(label, sizeof label, "tensor bp_decode (%d thr)", tc);
        report(label, time_best_of(3, [&] { bp_decode(batch, h_real, cfg); }));
        std::snprintf(label, sizeof label, "edge bp_decode (%d thr)", tc);
        report(label, time_best_of(3, [&] { edge_bp_decode(batch, code, cfg); }));
        std::snprintf(label, sizeof label, "min_sum_decode (%d thr)", tc);
        report(label, time_best_of(3, [&] { min_sum_decode(batch, code, cfg); }));
        std::snprintf(label, sizeof label, "loss+grad tensor (%d thr)", tc);
        report(label, time_best_of(2, [&] { loss_and_grad_wrt_h(batch, h_real, lc); }));
    }
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    return 0;
}
