// Times the serial reference kernels against their OpenMP counterparts and
// checks that both produce byte-identical results on the same inputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "icl/kernels.hpp"
#include "icl/rng.hpp"
#include "icl/runtime.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

template <typename F>
double best_ms(F&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = clock_type::now();
        fn();
        auto t1 = clock_type::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

float max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
    float m = 0.0f;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

void report(const char* name, double serial_ms, double parallel_ms, float diff) {
    std::printf("%-12s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   max|diff| %g\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, (double)diff);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs OpenMP kernel benchmark"};
    int rows = 512, d = 256, n = 384, heads = 4, head_dim = 16, reps = 5;
    app.add_option("--rows", rows, "row count for linear/rmsnorm/gelu");
    app.add_option("--dim", d, "feature dimension");
    app.add_option("--seq", n, "sequence length for attention");
    app.add_option("--reps", reps, "timing repetitions (best-of)");
    CLI11_PARSE(app, argc, argv);

    icl::Rng rng(7);
    auto randv = [&](size_t count) {
        std::vector<float> v(count);
        for (auto& x : v) x = (float)rng.normal(0.0, 1.0);
        return v;
    };

    std::vector<float> x = randv((size_t)rows * d);
    std::vector<float> w = randv((size_t)d * d);
    std::vector<float> g = randv(d);
    std::vector<float> ys((size_t)rows * d), yp((size_t)rows * d);

    double s = best_ms([&] { icl::ref::linear(x.data(), rows, d, w.data(), d, ys.data()); }, reps);
    double p = best_ms([&] { icl::par::linear(x.data(), rows, d, w.data(), d, yp.data()); }, reps);
    report("linear", s, p, max_abs_diff(ys, yp));

    s = best_ms([&] { icl::ref::rmsnorm(x.data(), rows, d, g.data(), 1e-5f, ys.data()); }, reps);
    p = best_ms([&] { icl::par::rmsnorm(x.data(), rows, d, g.data(), 1e-5f, yp.data()); }, reps);
    report("rmsnorm", s, p, max_abs_diff(ys, yp));

    ys = x;
    yp = x;
    s = best_ms([&] { icl::ref::gelu(ys.data(), ys.size()); }, reps);
    p = best_ms([&] { icl::par::gelu(yp.data(), yp.size()); }, reps);
    report("gelu", s, p, max_abs_diff(ys, yp));

    int dm = heads * head_dim;
    std::vector<float> q = randv((size_t)n * dm), k = randv((size_t)n * dm),
                       v = randv((size_t)n * dm);
    std::vector<float> os((size_t)n * dm), op((size_t)n * dm);
    s = best_ms(
        [&] {
            icl::ref::attention(q.data(), k.data(), v.data(), n, heads, head_dim, nullptr,
                                os.data(), nullptr);
        },
        reps);
    p = best_ms(
        [&] {
            icl::par::attention(q.data(), k.data(), v.data(), n, heads, head_dim, nullptr,
                                op.data(), nullptr);
        },
        reps);
    report("attention", s, p, max_abs_diff(os, op));

    // whole forward pass on the default architecture
    icl::ModelConfig cfg;
    cfg.vocab_size = 512;
    icl::WeightArchive model = icl::init_weights(cfg, 11);
    std::vector<int> tokens(n);
    for (auto& t : tokens) t = (int)rng.bounded(cfg.vocab_size);
    std::vector<float> ls, lp;
    s = best_ms(
        [&] { ls = icl::forward_with_plan<float>(tokens, model, nullptr, icl::ExecMode::serial); },
        reps);
    p = best_ms(
        [&] {
            lp = icl::forward_with_plan<float>(tokens, model, nullptr, icl::ExecMode::parallel);
        },
        reps);
    report("forward", s, p, max_abs_diff(ls, lp));
    return 0;
}
