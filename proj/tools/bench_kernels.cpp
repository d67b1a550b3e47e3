// Times the OpenMP kernels against their serial reference implementations and
// checks that both produce identical bits. Usage: bench_kernels [threads]
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eeopt/cellular.hpp"
#include "eeopt/common.hpp"
#include "eeopt/nn.hpp"
#include "eeopt/pipeline.hpp"

using namespace eeopt;

namespace {

template <class F>
double time_seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-28s serial %8.3f s   openmp %8.3f s   speedup %5.2fx   bit-identical: %s\n",
                name, serial_s, parallel_s, serial_s / parallel_s, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
#ifdef _OPENMP
    if (argc > 1) omp_set_num_threads(std::atoi(argv[1]));
    std::printf("OpenMP max threads: %d\n", omp_get_max_threads());
#else
    (void)argc;
    (void)argv;
    std::printf("built without OpenMP; both paths run serially\n");
#endif

    {
        netsim::CellularParams params;
        params.tx_power_w = 10.0;
        oracles::CoverageMcOptions mc;
        mc.n_realizations = 40000;
        double a = 0.0, b = 0.0;
        mc.exec = Exec::Serial;
        const double ts = time_seconds(
            [&] { a = oracles::estimate_coverage_mc(netsim::PointProcess::SquareGrid, 3e-6, params, 7, mc); });
        mc.exec = Exec::OpenMP;
        const double tp = time_seconds(
            [&] { b = oracles::estimate_coverage_mc(netsim::PointProcess::SquareGrid, 3e-6, params, 7, mc); });
        report("coverage Monte-Carlo", ts, tp, a == b);
    }

    {
        pipeline::Case1Config cfg;
        cfg.n_users = 5;
        pipeline::Case1Build a, b;
        cfg.exec = Exec::Serial;
        const double ts = time_seconds([&] { a = pipeline::build_case1_dataset(cfg, 64, 99); });
        cfg.exec = Exec::OpenMP;
        const double tp = time_seconds([&] { b = pipeline::build_case1_dataset(cfg, 64, 99); });
        report("uplink oracle labeling", ts, tp,
               a.data.features == b.data.features && a.data.targets == b.data.targets);
    }

    {
        const int n = 4096;
        nn::MlpModel model = nn::init({6, 32, 24, 16, 5}, nn::OutputActivation::Linear, 5);
        Eigen::MatrixXd X = Eigen::MatrixXd::Random(n, 6);
        Eigen::MatrixXd Y = Eigen::MatrixXd::Random(n, 5);
        std::vector<int> rows(n);
        for (int i = 0; i < n; ++i) rows[i] = i;
        nn::Gradients ga, gb;
        const double ts = time_seconds([&] {
            for (int rep = 0; rep < 50; ++rep)
                ga = nn::gradient(model, X, Y, rows, nn::Loss::Mse, Exec::Serial);
        });
        const double tp = time_seconds([&] {
            for (int rep = 0; rep < 50; ++rep)
                gb = nn::gradient(model, X, Y, rows, nn::Loss::Mse, Exec::OpenMP);
        });
        bool same = true;
        for (std::size_t l = 0; l < ga.dW.size(); ++l)
            same = same && ga.dW[l] == gb.dW[l] && ga.db[l] == gb.db[l];
        report("full-batch gradient", ts, tp, same);
    }
    return 0;
}
