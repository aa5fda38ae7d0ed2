// Compares the serial reference kernels against the OpenMP-parallel path on
// the hot primitives: batched transforms, pointwise multiply-accumulate, and
// the full relinearizing multiply.  Bit-identical output is asserted by the
// unit tests; this tool only measures.

#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "hematch/he/backend.hpp"
#include "hematch/he/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace hematch;
using namespace hematch::he;
using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

RnsPoly random_poly(const RingContext& ctx, Basis basis, std::mt19937_64& rng) {
    RnsPoly p(ctx.n(), basis);
    for (size_t s = 0; s < basis.count(); ++s) {
        uint64_t q = ctx.prime(kern::prime_index_of(ctx, basis, s));
        uint64_t* blk = p.block(s);
        for (size_t i = 0; i < p.n; ++i) blk[i] = rng() % q;
    }
    return p;
}

template <typename Fn>
double time_best_of(int reps, Fn&& fn) {
    double best = 1e100;
    for (int r = 0; r < reps; ++r) {
        auto t0 = Clock::now();
        fn();
        double t = ms_since(t0);
        if (t < best) best = t;
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    uint32_t degree = 16384;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--degree" && i + 1 < argc)
            degree = uint32_t(std::stoul(argv[++i]));
        else if (a == "--reps" && i + 1 < argc)
            reps = std::stoi(argv[++i]);
        else {
            std::fprintf(stderr, "usage: kernel_bench [--degree N] [--reps R]\n");
            return 2;
        }
    }

    HeParams params = degree == 16384 ? HeParams::production()
                                      : HeParams::custom(degree, {60, 40, 40, 40, 60}, 40);
    auto ctx = make_context(params, true);
    std::mt19937_64 rng(7);

#ifdef _OPENMP
    int threads = omp_get_max_threads();
#else
    int threads = 1;
#endif
    std::printf("ring degree %u, %zu primes, %d OpenMP thread(s)\n", degree,
                ctx->data_prime_count() + 1, threads);
    std::printf("%-34s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    auto report = [&](const char* name, double s, double p) {
        std::printf("%-34s %12.3f %12.3f %7.2fx\n", name, s, p, s / p);
    };

    Basis full{ctx->data_prime_count(), true};
    const int batch = 8;
    std::vector<RnsPoly> polys;
    for (int i = 0; i < batch; ++i) polys.push_back(random_poly(*ctx, full, rng));

    {
        auto run = [&](kern::Policy pol) {
            for (auto& p : polys) kern::ntt_forward(*ctx, p, pol);
            for (auto& p : polys) kern::ntt_inverse(*ctx, p, pol);
        };
        double s = time_best_of(reps, [&] { run(kern::Policy::serial); });
        double p = time_best_of(reps, [&] { run(kern::Policy::parallel); });
        report("transform fwd+inv (batch of 8)", s, p);
    }

    {
        RnsPoly a = random_poly(*ctx, full, rng), b = random_poly(*ctx, full, rng), out(ctx->n(), full);
        double s = time_best_of(reps, [&] {
            for (int i = 0; i < 32; ++i) kern::mul(*ctx, a, b, out, kern::Policy::serial);
        });
        double p = time_best_of(reps, [&] {
            for (int i = 0; i < 32; ++i) kern::mul(*ctx, a, b, out, kern::Policy::parallel);
        });
        report("pointwise multiply (x32)", s, p);
    }

    {
        const kern::Policy initial_policy = kern::default_policy();
        auto backend = SlotBackend::create(params, BackendKind::lattice);
        auto keys = backend->keygen(params.profile == Profile::production ? std::nullopt
                                                                          : std::optional<uint64_t>(11));
        std::vector<double> v(params.slot_count, 0.25);
        auto pt = backend->encode(v, params.max_level, params.scale());
        auto ct = backend->encrypt(pt, keys.eval.public_key);
        auto run = [&](kern::Policy pol) {
            kern::set_default_policy(pol);
            auto prod = backend->mul(ct, ct, keys.eval.relin);
            (void)prod;
        };
        double s = time_best_of(reps, [&] { run(kern::Policy::serial); });
        double p = time_best_of(reps, [&] { run(kern::Policy::parallel); });
        report("relinearizing multiply", s, p);

        double rot_s = time_best_of(reps, [&] {
            kern::set_default_policy(kern::Policy::serial);
            auto r = backend->rotate(ct, 1, keys.eval.galois);
            (void)r;
        });
        double rot_p = time_best_of(reps, [&] {
            kern::set_default_policy(kern::Policy::parallel);
            auto r = backend->rotate(ct, 1, keys.eval.galois);
            (void)r;
        });
        report("single-step rotation", rot_s, rot_p);
        kern::set_default_policy(initial_policy);
    }

    return 0;
}
