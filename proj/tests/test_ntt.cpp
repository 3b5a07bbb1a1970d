#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <thread>

#include "paforge/ntt.hpp"
#include "support/oracles.hpp"

using namespace paforge;

namespace {

NttVector random_vector(std::mt19937_64& rng, std::size_t n) {
    NttVector v(n);
    for (auto& x : v) {
        std::uint64_t u;
        do u = rng();
        while (u >= kFieldPrime);
        x = FieldElem{u};
    }
    return v;
}

}  // namespace

TEST_CASE("plan construction") {
    CHECK(make_plan(65536, 16).stages() == 4);
    CHECK(make_plan(16, 4).stages() == 2);
    CHECK(make_plan(16, 16).stages() == 1);

    NttPlan tiny = make_plan(2, 2);
    CHECK(tiny.twiddles[1] == FieldElem{kFieldPrime - 1});  // W_2 == -1

    // mixed decomposition: trailing stage shrinks to cover the remainder
    CHECK(make_plan(32768, 16).stage_radices == std::vector<unsigned>{16, 16, 16, 8});
    CHECK(make_plan(32, 16).stage_radices == std::vector<unsigned>{16, 2});
    CHECK(make_plan(8, 4).stage_radices == std::vector<unsigned>{4, 2});

    CHECK(mul(make_plan(4096, 16).n_inv, FieldElem{4096}) == FieldElem{1});

    CHECK_THROWS_AS(make_plan(24, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_plan(1, 2), std::invalid_argument);
    CHECK_THROWS_AS(make_plan(131072, 16), std::invalid_argument);
    CHECK_THROWS_AS(make_plan(16, 8), std::invalid_argument);
}

TEST_CASE("transform of delta and of all-ones") {
    for (unsigned radix : {2u, 4u, 16u}) {
        NttPlan plan = make_plan(64, radix);
        NttVector delta(64, FieldElem{0});
        delta[0] = FieldElem{1};
        NttVector f = forward(plan, delta);
        for (auto x : f) CHECK(x == FieldElem{1});

        NttVector ones(64, FieldElem{1});
        f = forward(plan, ones);
        CHECK(f[0] == FieldElem{64});
        for (std::size_t i = 1; i < 64; ++i) CHECK(f[i] == FieldElem{0});

        // inverse of (N, 0, ...) is all ones
        NttVector spike(64, FieldElem{0});
        spike[0] = FieldElem{64};
        NttVector inv_v = inverse(plan, spike);
        for (auto x : inv_v) CHECK(x == FieldElem{1});
    }
}

TEST_CASE("forward matches the definitional sum") {
    std::mt19937_64 rng(100);
    for (unsigned radix : {2u, 4u, 16u}) {
        NttPlan plan = make_plan(16, radix);
        NttVector v = random_vector(rng, 16);
        CHECK(forward(plan, v) == oracles::dft_ref(v, false));
    }
    NttPlan plan64 = make_plan(64, 16);
    NttVector v = random_vector(rng, 64);
    CHECK(forward(plan64, v) == oracles::dft_ref(v, false));
    CHECK(inverse(plan64, v) == oracles::dft_ref(v, true));
}

TEST_CASE("roundtrip property across sizes") {
    std::mt19937_64 rng(200);
    for (std::size_t n : {16u, 256u, 4096u, 65536u}) {
        NttPlan plan = make_plan(n, 16);
        int iters = 1000;
        for (int i = 0; i < iters; ++i) {
            NttVector v = random_vector(rng, n);
            if (inverse(plan, forward(plan, v)) != v) {
                FAIL("roundtrip mismatch at size " << n << " iteration " << i);
            }
        }
        SUCCEED();
    }
}

TEST_CASE("radix independence") {
    std::mt19937_64 rng(300);
    for (std::size_t n : {16u, 64u, 256u, 4096u}) {
        NttPlan p2 = make_plan(n, 2), p4 = make_plan(n, 4), p16 = make_plan(n, 16);
        for (int i = 0; i < 10; ++i) {
            NttVector v = random_vector(rng, n);
            NttVector f = forward(p2, v);
            CHECK(forward(p4, v) == f);
            CHECK(forward(p16, v) == f);
        }
    }
}

TEST_CASE("linearity") {
    std::mt19937_64 rng(400);
    NttPlan plan = make_plan(256, 16);
    for (int i = 0; i < 20; ++i) {
        NttVector u = random_vector(rng, 256), v = random_vector(rng, 256);
        FieldElem alpha{rng() % kFieldPrime}, beta{rng() % kFieldPrime};
        NttVector mix(256);
        for (std::size_t j = 0; j < 256; ++j)
            mix[j] = add(mul(alpha, u[j]), mul(beta, v[j]));
        NttVector fu = forward(plan, u), fv = forward(plan, v), fm = forward(plan, mix);
        for (std::size_t j = 0; j < 256; ++j)
            CHECK(fm[j] == add(mul(alpha, fu[j]), mul(beta, fv[j])));
    }
}

TEST_CASE("convolution theorem against the quadratic definition") {
    std::mt19937_64 rng(500);
    for (std::size_t n : {16u, 64u, 256u}) {
        NttPlan plan = make_plan(n, 16);
        for (int i = 0; i < 5; ++i) {
            NttVector u = random_vector(rng, n), v = random_vector(rng, n);
            NttVector fu = forward(plan, u), fv = forward(plan, v);
            for (std::size_t j = 0; j < n; ++j) fu[j] = mul(fu[j], fv[j]);
            CHECK(inverse(plan, fu) == oracles::cyclic_convolve_ref(u, v));
        }
    }
}

TEST_CASE("stage composition reproduces forward") {
    std::mt19937_64 rng(600);
    for (unsigned radix : {2u, 4u, 16u}) {
        NttPlan plan = make_plan(16, radix);
        NttVector v = random_vector(rng, 16);
        NttVector a = digit_reverse(plan, v);
        for (std::size_t s = 0; s < plan.stages(); ++s) a = butterfly_stage(plan, a, s);
        CHECK(a == forward(plan, v));
        CHECK(a == oracles::dft_ref(v, false));
    }
    // larger, mixed-radix plan
    NttPlan plan = make_plan(512, 16);
    NttVector v = random_vector(rng, 512);
    NttVector a = digit_reverse(plan, v);
    for (std::size_t s = 0; s < plan.stages(); ++s) a = butterfly_stage(plan, a, s);
    CHECK(a == forward(plan, v));
}

TEST_CASE("a single radix-16 stage is the whole 16-point transform") {
    std::mt19937_64 rng(700);
    NttPlan plan = make_plan(16, 16);
    REQUIRE(plan.stages() == 1);
    for (std::size_t n = 0; n < 16; ++n) CHECK(plan.perm[n] == n);  // one digit: no reversal
    NttVector v = random_vector(rng, 16);
    CHECK(butterfly_stage(plan, v, 0) == oracles::dft_ref(v, false));
}

TEST_CASE("stage on a delta input spreads a constant column") {
    NttPlan plan = make_plan(16, 4);
    NttVector delta(16, FieldElem{0});
    delta[0] = FieldElem{1};
    NttVector a = butterfly_stage(plan, digit_reverse(plan, delta), 0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == FieldElem{1});
    for (std::size_t i = 4; i < 16; ++i) CHECK(a[i] == FieldElem{0});
}

TEST_CASE("W_16 is 2^12, so twelve doublings replace the multiply") {
    FieldElem w16 = root_of_order_pow2(4);
    CHECK(w16 == FieldElem{4096});
    NttPlan plan = make_plan(16, 16);
    CHECK(plan.twiddles[1] == FieldElem{4096});
    std::mt19937_64 rng(800);
    for (int i = 0; i < 1000; ++i) {
        FieldElem x{rng() % kFieldPrime};
        FieldElem doubled = x;
        for (int d = 0; d < 12; ++d) doubled = add(doubled, doubled);
        CHECK(doubled == mul(x, w16));
    }
}

TEST_CASE("a shared plan serves concurrent transforms") {
    std::mt19937_64 rng(900);
    NttPlan plan = make_plan(4096, 16);
    NttVector v = random_vector(rng, 4096);
    NttVector expect = forward(plan, v);
    std::vector<NttVector> results(8);
    {
        std::vector<std::jthread> pool;
        for (auto& slot : results)
            pool.emplace_back([&plan, &v, &slot] { slot = forward(plan, v); });
    }
    for (const auto& r : results) CHECK(r == expect);
}

TEST_CASE("length and stage validation") {
    NttPlan plan = make_plan(16, 4);
    NttVector wrong(8, FieldElem{0});
    CHECK_THROWS_AS(forward(plan, wrong), std::invalid_argument);
    CHECK_THROWS_AS(inverse(plan, wrong), std::invalid_argument);
    NttVector right(16, FieldElem{0});
    CHECK_THROWS_AS(butterfly_stage(plan, right, 2), std::invalid_argument);
}
