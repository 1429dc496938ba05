#include <benchmark/benchmark.h>

#include <random>

#include "extremal/extremal.hpp"

namespace {

using namespace extremal;

Matrix skew(std::mt19937_64& rng, Eigen::Index k) {
    std::normal_distribution<double> normal;
    Matrix m(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            m(i, j) = normal(rng);
        }
    }
    return 0.5 * (m - m.transpose());
}

// Data with H0I outside HIJ * closed(B^k): H0I = HIJ w with ||w|| = 2 for even k, generic for odd k.
BracketData instance(Eigen::Index k) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(k));
    std::normal_distribution<double> normal;
    BracketData b;
    b.HIJ = skew(rng, k);
    Vector w(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        w[i] = normal(rng);
    }
    b.H0I = k % 2 == 0 ? Vector(b.HIJ * (2.0 * w.normalized())) : w;
    return b;
}

AffineSystem rotation_system() {
    return AffineSystem(parse_field("0; 0; 1 - 5*x1", 3), {parse_field("1; 0; 0", 3), parse_field("0; 1; 3*x1", 3)},
                        {parse_field("0; 0; 1", 3)});
}

void BM_BracketData(benchmark::State& state) {
    const AffineSystem sys = rotation_system();
    CotangentPoint lam{Vector::Ones(3), Vector::Constant(3, 0.1)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(bracket_data(sys, lam));
    }
}
BENCHMARK(BM_BracketData);

void BM_SolveD(benchmark::State& state) {
    const BracketData b = instance(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_d(b.H0I, b.HIJ));
    }
}
BENCHMARK(BM_SolveD)->DenseRange(1, 5);

void BM_BangRhs(benchmark::State& state) {
    const AffineSystem sys = rotation_system();
    LiftedPoint lp;
    lp.rho = 0.1;
    lp.u = Vector(2);
    lp.u << -0.8, 0.6;
    lp.h_tail = Vector::Ones(1);
    lp.x = Vector::Zero(3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bang_rhs(sys, lp));
    }
}
BENCHMARK(BM_BangRhs);

void BM_SphereAsymptotics(benchmark::State& state) {
    const BracketData b = instance(state.range(0));
    const Vector u0 = Vector::Unit(state.range(0), 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sphere_asymptotics(u0, b.H0I, b.HIJ));
    }
}
BENCHMARK(BM_SphereAsymptotics)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
