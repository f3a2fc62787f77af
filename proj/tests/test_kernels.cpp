#include <random>
#include <vector>

#include "bclean/kernels.hpp"
#include "doctest.h"

using namespace bclean;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

void check_ops_agree(const kernels::Ops& a, const kernels::Ops& b) {
    std::mt19937_64 rng(7);
    // Sizes straddle the vector widths and include the tails.
    for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 64u, 257u}) {
        std::vector<double> x = random_vec(n, rng);
        std::vector<double> y = random_vec(n, rng);

        CHECK(a.dot(x.data(), y.data(), n) ==
              doctest::Approx(b.dot(x.data(), y.data(), n)).epsilon(1e-12));
        CHECK(a.sum(x.data(), n) == doctest::Approx(b.sum(x.data(), n)).epsilon(1e-12));
        CHECK(a.max_abs_diff(x.data(), y.data(), n) ==
              doctest::Approx(b.max_abs_diff(x.data(), y.data(), n)));

        std::vector<double> ya = y, yb = y;
        a.axpy(0.37, x.data(), ya.data(), n);
        b.axpy(0.37, x.data(), yb.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(ya[i] == doctest::Approx(yb[i]).epsilon(1e-12));

        if (n > 0 && n <= 64) {
            std::vector<double> ca(n * n, 0.5), cb(n * n, 0.5);
            a.rank1_update(ca.data(), x.data(), n);
            b.rank1_update(cb.data(), x.data(), n);
            for (std::size_t i = 0; i < n * n; ++i) {
                CHECK(ca[i] == doctest::Approx(cb[i]).epsilon(1e-12));
            }
        }
    }
}

}  // namespace

TEST_CASE("scalar kernels match straightforward definitions") {
    const auto& ops = kernels::scalar_ops();
    const double x[] = {1.0, 2.0, 3.0};
    const double y[] = {4.0, -5.0, 6.0};
    CHECK(ops.dot(x, y, 3) == doctest::Approx(1 * 4 - 2 * 5 + 3 * 6));
    CHECK(ops.sum(x, 3) == doctest::Approx(6.0));
    CHECK(ops.max_abs_diff(x, y, 3) == doctest::Approx(7.0));

    double c[4] = {0, 0, 0, 0};
    const double v[] = {2.0, -1.0};
    ops.rank1_update(c, v, 2);
    CHECK(c[0] == doctest::Approx(4.0));
    CHECK(c[1] == doctest::Approx(-2.0));
    CHECK(c[2] == doctest::Approx(-2.0));
    CHECK(c[3] == doctest::Approx(1.0));
}

TEST_CASE("runtime-selected kernels agree with the scalar reference") {
    check_ops_agree(kernels::active(), kernels::scalar_ops());
}

#if defined(BCLEAN_BUILD_AVX2)
TEST_CASE("avx2 kernels agree with the scalar reference when supported") {
    if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) return;
    check_ops_agree(kernels::avx2_ops(), kernels::scalar_ops());
}
#endif

TEST_CASE("an implementation is selected") {
    CHECK(!kernels::active_name().empty());
}
