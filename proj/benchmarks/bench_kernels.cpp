// Compares the OpenMP kernels against their serial reference paths:
// dense matmul, hop statistics over seeds, and full-window inference.
// Run manually: build/benchmarks/grasp_bench [repeats]

#include <chrono>
#include <cstdio>
#include <set>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "grasp/detector.hpp"
#include "grasp/linalg.hpp"
#include "grasp/synthgen.hpp"
#include "grasp/trainer.hpp"
#include "support/dense_gat.hpp"

using namespace grasp;

namespace {

double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double time_best(int repeats, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds(t0));
    }
    return best;
}

void report(const char* name, double serial, double parallel) {
    std::printf("%-32s serial %8.4fs   omp %8.4fs   speedup %.2fx\n", name, serial, parallel,
                serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;

    {  // matmul kernel
        Rng rng(1);
        nn::Matrix x(512, 256), w(512, 256), out;
        for (auto& v : x.a) v = rng.uniform(-1, 1);
        for (auto& v : w.a) v = rng.uniform(-1, 1);
        const double serial = time_best(repeats, [&] { nn::matmul_bt_serial(x, w, out); });
        nn::set_parallel(true);
        const double parallel = time_best(repeats, [&] { nn::matmul_bt(x, w, out); });
        report("matmul 512x256 * 512x256^T", serial, parallel);
    }

    auto profiles = synth::separable_profiles(5);
    synth::GenConfig gen;
    gen.days = 2;
    gen.seed = 7;
    auto log = synth::generate(profiles, gen);
    auto windows = build_windows(log, 120, 120);

    {  // hop statistics (parallel over seeds inside each window)
        auto run = [&] {
            std::vector<HopStats> all;
            for (const auto& w : windows) all.push_back(hop_statistics(w, 4));
            return all.size();
        };
        nn::set_num_threads(1);
        const double serial = time_best(repeats, run);
        nn::set_num_threads(0);
#ifdef _OPENMP
        omp_set_num_threads(omp_get_num_procs());
#endif
        const double parallel = time_best(repeats, run);
        report("hop statistics (2 days)", serial, parallel);
    }

    {  // sparse+omp forward vs dense serial reference
        Rng rng(3);
        nn::GatDims dims;
        dims.d_in = 16;
        dims.edge_dim = 10;
        dims.hidden = 128;
        dims.heads = 4;
        dims.mlp_hidden = 128;
        dims.k = 5;
        auto m = nn::init_model(dims, 0.0, 11);
        EncodedBatch b;
        const int n = 200;
        b.n_nodes = n;
        b.feat_dim = dims.d_in;
        b.edge_dim = dims.edge_dim;
        b.x = nn::Matrix(n, dims.d_in);
        for (auto& v : b.x.a) v = rng.uniform(-1, 1);
        std::set<std::pair<int, int>> seen;
        for (int i = 0; i < 3 * n; ++i) {
            const int u = static_cast<int>(rng.bounded(n));
            const int v = static_cast<int>(rng.bounded(n));
            if (u == v || !seen.emplace(std::min(u, v), std::max(u, v)).second) continue;
            const int op = static_cast<int>(rng.bounded(10));
            b.edge_index.emplace_back(u, v);
            b.edge_op.push_back(op);
            b.edge_index.emplace_back(v, u);
            b.edge_op.push_back(op);
        }
        for (int s = 0; s < 32; ++s) {
            b.seed_rows.push_back(s);
            b.seed_ids.push_back("s");
            b.seed_observed.push_back("e");
            b.labels.push_back(0);
        }
        const double dense = time_best(repeats, [&] { testsupport::dense_gat_forward(b, m); });
        const double sparse = time_best(repeats, [&] { nn::gat_forward(b, m, false, 0); });
        report("gat forward 200 nodes", dense, sparse);
    }

    {  // end-to-end inference over windows
        TrainConfig cfg;
        cfg.epochs = 1;
        cfg.seed = 5;
        cfg.location_mode = LocationMode::Disabled;
        ModelBundle bundle;
        bundle.schema = log.schema;
        bundle.cfg = cfg;
        bundle.vocab = build_vocab(log);
        LocationConfig lcfg;
        lcfg.mode = LocationMode::Disabled;
        bundle.location = fit_location_encoder({"x"}, lcfg);
        bundle.params = train_model(windows, bundle.vocab, bundle.location, log.schema, cfg, nullptr);

        auto run = [&] { return run_inference(bundle, log).total_verdicts; };
        nn::set_num_threads(1);
        nn::set_parallel(false);
        const double serial = time_best(repeats, run);
        nn::set_parallel(true);
        nn::set_num_threads(0);
#ifdef _OPENMP
        omp_set_num_threads(omp_get_num_procs());
#endif
        const double parallel = time_best(repeats, run);
        report("window inference (2 days)", serial, parallel);
    }
    return 0;
}
