#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "sketchreg/dense.hpp"
#include "sketchreg/instances.hpp"

using namespace sketchreg;

TEST_SUITE_BEGIN("instances");

TEST_CASE("cs adversarial construction") {
    CsAdversarialParams p{4, 4, 12};
    CHECK_THROWS_AS(gen_cs_adversarial(CsAdversarialParams{4, 4, 7}), InvalidParams);
    CHECK_THROWS_AS(gen_cs_adversarial(CsAdversarialParams{4, 0, 12}), InvalidParams);
    CHECK_THROWS_AS(gen_cs_adversarial(CsAdversarialParams{4, 4, 12}), InvalidParams);

    p = CsAdversarialParams{8, 4, 16};
    RegressionInstance inst = gen_cs_adversarial(p);
    inst.validate();
    CHECK(norm2(inst.b) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(*inst.residual_norm == 1.0);
    CHECK(norm2(matvec(inst.a, *inst.x_star) - inst.b) == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("d=4 alpha=4 needs alpha < d") {
        CHECK_THROWS_AS(gen_cs_adversarial(CsAdversarialParams{4, 4, 16}), InvalidParams);
    }
    SUBCASE("b layout at d=8 alpha=4") {
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(inst.b[i] == doctest::Approx(1.0 / std::sqrt(8.0)));
        for (std::size_t i = 8; i < 12; ++i) CHECK(inst.b[i] == doctest::Approx(0.5));
        for (std::size_t i = 12; i < 16; ++i) CHECK(inst.b[i] == 0.0);
    }
    SUBCASE("exact_lsq recovers the all-1/sqrt(d) optimum") {
        Vector xs = exact_lsq(inst.a, inst.b);
        for (std::size_t i = 0; i < 8; ++i)
            CHECK(xs[i] == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-12));
    }
}

namespace {

// Brute-force event detection on the materialized sketch.
EventReport detect_events_brute(const Matrix& s, const CsAdversarialParams& p) {
    const std::size_t m = s.rows();
    auto support = [&](std::size_t col) {
        std::set<std::size_t> out;
        for (std::size_t r = 0; r < m; ++r)
            if (s(r, col) != 0.0) out.insert(r);
        return out;
    };
    EventReport rep;
    for (std::size_t j = 0; j < p.d; ++j) {
        auto sj = support(j);
        bool ev1 = true;
        for (std::size_t k = 0; k < p.d && ev1; ++k) {
            if (k == j) continue;
            for (std::size_t r : support(k))
                if (sj.count(r)) {
                    ev1 = false;
                    break;
                }
        }
        if (!ev1) continue;
        std::size_t unique_col = 0, inter_row = 0, hits = 0;
        bool ok = true;
        for (std::size_t k = p.d; k < p.d + p.alpha && ok; ++k) {
            std::vector<std::size_t> inter;
            for (std::size_t r : support(k))
                if (sj.count(r)) inter.push_back(r);
            if (inter.size() == 1) {
                ++hits;
                unique_col = k;
                inter_row = inter[0];
                if (hits > 1) ok = false;
            } else if (!inter.empty()) {
                ok = false;
            }
        }
        if (!ok || hits != 1) continue;
        rep.witness_column = j;
        rep.event1 = rep.event2 = true;
        rep.intersect_row = inter_row;
        rep.intersect_sign = (s(inter_row, j) * s(inter_row, unique_col)) > 0 ? 1 : -1;
        return rep;
    }
    return rep;
}

}  // namespace

TEST_CASE("detect_events: hand-built fixtures") {
    // d=2, alpha=2, n=4, m=4, s=1: craft supports via seed search
    const CsAdversarialParams p{3, 2, 8};
    SUBCASE("witness when column 0 meets exactly one alpha column once") {
        bool found_witness = false, found_none = false;
        for (std::uint64_t seed = 0; seed < 400 && !(found_witness && found_none); ++seed) {
            SketchOperator s = make_countsketch(6, 8, 2, seed);
            EventReport fast = detect_events(s, p);
            EventReport slow = detect_events_brute(materialize_sketch(s), p);
            CHECK(fast.witness_column == slow.witness_column);
            if (fast.witness_column) {
                CHECK(*fast.intersect_row == *slow.intersect_row);
                CHECK(*fast.intersect_sign == *slow.intersect_sign);
                CHECK(fast.event1);
                CHECK(fast.event2);
                found_witness = true;
            } else {
                CHECK(!fast.event1);
                found_none = true;
            }
        }
        CHECK(found_witness);
        CHECK(found_none);
    }
    SUBCASE("non countsketch operators are rejected") {
        SketchOperator g = make_gaussian(2, 8, 1);
        CHECK_THROWS_AS(detect_events(g, p), InvalidParams);
    }
}

TEST_CASE("detect_events agrees with brute force over random configurations") {
    for (std::uint64_t seed = 0; seed < 120; ++seed) {
        Rng rng(seed + 31);
        const std::size_t d = 2 + rng.below(6);
        const std::size_t alpha = 1 + rng.below(d - 1);
        const std::size_t n = d + alpha + rng.below(8);
        const std::size_t m = std::min<std::size_t>(n, 4 + rng.below(28));
        const std::size_t s = 1 + rng.below(std::min<std::size_t>(m, 3));
        SketchOperator sk = make_countsketch(m, n, s, seed);
        CsAdversarialParams p{d, alpha, n};
        EventReport fast = detect_events(sk, p);
        EventReport slow = detect_events_brute(materialize_sketch(sk), p);
        CHECK(fast.witness_column == slow.witness_column);
        if (fast.witness_column) {
            CHECK(*fast.intersect_row == *slow.intersect_row);
            CHECK(*fast.intersect_sign == *slow.intersect_sign);
        }
    }
}

TEST_CASE("witness events occur at constant frequency: >= 30% over 200 seeds") {
    const CsAdversarialParams p{256, 4, 4096};
    std::size_t hits = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        SketchOperator s = make_countsketch(4096, 4096, 4, seed);
        if (detect_events(s, p).witness_column) ++hits;
    }
    CHECK(hits >= 60);
}

TEST_CASE("lev adversarial construction") {
    CHECK_THROWS_AS(gen_lev_adversarial(LevAdversarialParams{4, 2, 4}), InvalidParams);
    LevAdversarialParams p{4, 2, 2};
    CHECK(p.scaled_blocks() == 6);
    CHECK(p.natural_n() == 28);
    CHECK(p.operative_regime());  // 2*2 >= 4

    RegressionInstance inst = gen_lev_adversarial(p);
    inst.validate();
    CHECK(inst.a.rows() == 28);

    SUBCASE("columns have unit norm") {
        for (std::size_t j = 0; j < 4; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 28; ++i) acc += inst.a(i, j) * inst.a(i, j);
            CHECK(std::fabs(std::sqrt(acc) - 1.0) <= 1e-12);
        }
    }
    SUBCASE("closed-form optimum matches exact_lsq") {
        Vector xs = exact_lsq(inst.a, inst.b);
        const double special = 0.25 + 1.0 / std::sqrt(2.0 * 2.0 * 4.0);
        for (std::size_t j = 0; j < 4; ++j) {
            const double want = j < 2 ? special : 0.25;
            CHECK((*inst.x_star)[j] == doctest::Approx(want).epsilon(1e-12));
            CHECK(xs[j] == doctest::Approx(want).epsilon(1e-9));
        }
    }
    SUBCASE("leverage scores are 1/d on top rows, 1/(alpha d) below") {
        auto scores = leverage_scores(inst.a);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(scores[i] == doctest::Approx(0.25).epsilon(1e-9));
        for (std::size_t i = 4; i < 28; ++i)
            CHECK(scores[i] == doctest::Approx(1.0 / 8.0).epsilon(1e-9));
        auto hat = oracle::hat_matrix_diagonal(inst.a);
        for (std::size_t i = 0; i < 28; ++i)
            CHECK(scores[i] == doctest::Approx(hat[i]).epsilon(1e-9));
    }
    SUBCASE("residual norm is in [1, sqrt(2)]") {
        CHECK(*inst.residual_norm >= 1.0);
        CHECK(*inst.residual_norm <= std::sqrt(2.0));
        CHECK(*inst.residual_norm ==
              doctest::Approx(norm2(matvec(inst.a, *inst.x_star) - inst.b)).epsilon(1e-12));
    }
}

TEST_CASE("lower bound d1 instances") {
    RegressionInstance inst = gen_lower_bound_d1(64, 5, 9);
    inst.validate();
    Matrix gram = matmul(transpose(inst.a), inst.a);
    CHECK(oracle::max_abs_diff(gram, Matrix::identity(5)) <= 1e-10);
    Vector atb = matvec(transpose(inst.a), inst.b);
    CHECK(norm2(atb) <= 1e-10);
    CHECK(norm2(inst.b) == doctest::Approx(1.0).epsilon(1e-12));
    Vector xs = exact_lsq(inst.a, inst.b);
    CHECK(norm2(xs) <= 1e-9);
    CHECK_THROWS_AS(gen_lower_bound_d1(5, 5, 1), InvalidParams);
}

TEST_CASE("lower bound d2 instances") {
    RegressionInstance inst = gen_lower_bound_d2(32, 6, 11);
    inst.validate();
    for (std::size_t j = 0; j < 6; ++j) CHECK((*inst.x_star)[j] == inst.b[j]);
    const double res = *inst.residual_norm;
    double xs_sq = 0.0;
    for (std::size_t j = 0; j < 6; ++j) xs_sq += (*inst.x_star)[j] * (*inst.x_star)[j];
    CHECK(res * res + xs_sq == doctest::Approx(1.0).epsilon(1e-10));

    SUBCASE("zero sketched residual needs rank(SA) = d") {
        // a sketch keeping all d top rows solves exactly; one that misses them cannot
        SketchOperator s = make_srht(32, 32, 3);
        SolveReport rep = sketch_and_solve(inst, s);
        CHECK(rep.sketched_rank_ok);
        CHECK(norm2(matvec(inst.a, rep.x_prime) - inst.b) ==
              doctest::Approx(res).epsilon(1e-9));
    }
}

TEST_CASE("random wellcond instances") {
    SUBCASE("noise 0 recovers the planted solution") {
        RegressionInstance inst = gen_random_wellcond(128, 8, 0.0, 21);
        inst.validate();
        CHECK(*inst.residual_norm <= 1e-8 * norm2(inst.b));
    }
    SUBCASE("fixed seed reproduces the instance") {
        RegressionInstance a = gen_random_wellcond(32, 4, 1.0, 5);
        RegressionInstance b = gen_random_wellcond(32, 4, 1.0, 5);
        CHECK(oracle::max_abs_diff(a.a, b.a) == 0.0);
        for (std::size_t i = 0; i < 32; ++i) CHECK(a.b[i] == b.b[i]);
    }
    SUBCASE("residual concentrates near sqrt(n-d) noise") {
        const std::size_t n = 1024, d = 16;
        double acc = 0.0;
        const std::size_t trials = 100;
        for (std::uint64_t seed = 0; seed < trials; ++seed) {
            RegressionInstance inst = gen_random_wellcond(n, d, 1.0, seed);
            acc += *inst.residual_norm;
        }
        const double mean = acc / trials;
        const double want = std::sqrt(static_cast<double>(n - d));
        CHECK(std::fabs(mean - want) <= 0.1 * want);
    }
}

TEST_CASE("lower-bound d1 l2 error scales like sqrt(d/m) for gaussian sketches") {
    const std::size_t n = 512, d = 8;
    double prev_mean = 0.0;
    for (std::size_t m : {4 * d, 16 * d, 64 * d}) {
        double acc = 0.0;
        const std::size_t trials = 100;
        for (std::uint64_t t = 0; t < trials; ++t) {
            RegressionInstance inst = gen_lower_bound_d1(n, d, t);
            SketchOperator s = make_gaussian(m, n, t + 999);
            SolveReport rep = sketch_and_solve(inst, s);
            acc += rep.l2_err;
        }
        const double mean = acc / trials;
        const double ideal = std::sqrt(static_cast<double>(d) / static_cast<double>(m));
        CHECK(mean <= 3.0 * ideal);
        CHECK(mean >= ideal / 3.0);
        if (prev_mean > 0.0) CHECK(prev_mean > mean);
        prev_mean = mean;
    }
}

TEST_CASE("pad_to_power_of_two") {
    RegressionInstance inst = gen_random_wellcond(48, 4, 1.0, 2);
    RegressionInstance padded = pad_to_power_of_two(inst);
    CHECK(padded.a.rows() == 64);
    CHECK(padded.b.size() == 64);
    padded.validate();
    for (std::size_t i = 48; i < 64; ++i) {
        CHECK(padded.b[i] == 0.0);
        for (std::size_t j = 0; j < 4; ++j) CHECK(padded.a(i, j) == 0.0);
    }
    // padding preserves the optimum
    Vector xs = exact_lsq(padded.a, padded.b);
    for (std::size_t j = 0; j < 4; ++j)
        CHECK(xs[j] == doctest::Approx((*inst.x_star)[j]).epsilon(1e-9));
}

TEST_SUITE_END();
