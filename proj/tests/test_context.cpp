#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ltlm/context.hpp"
#include "ltlm/numerics.hpp"

using namespace ltlm;

namespace {

Matrix embedding_fixture(std::size_t vocab, std::size_t dim, std::uint64_t seed,
                         double bound = 1.0) {
    Rng rng(seed);
    return uniform_init(vocab, dim, -bound, bound, rng);
}

// Test-side evaluation of the context combination, computed independently of
// the library path: raw weights, long-double accumulation, division last.
Vec direct_combination(const std::vector<std::int32_t>& oldest_to_newest, const Matrix& table,
                       const WeightingScheme& scheme) {
    const std::size_t fill = oldest_to_newest.size();
    std::vector<long double> acc(table.cols(), 0.0L);
    long double weight_sum = 0.0L;
    for (std::size_t k = 0; k < fill; ++k) {
        const std::int32_t word = oldest_to_newest[fill - 1 - k];
        const long double g = scheme.weight(k, word);
        weight_sum += g;
        for (std::size_t d = 0; d < table.cols(); ++d)
            acc[d] += g * table(static_cast<std::size_t>(word), d);
    }
    Vec out(table.cols());
    for (std::size_t d = 0; d < table.cols(); ++d)
        out[d] = static_cast<double>(acc[d] / weight_sum);
    return out;
}

} // namespace

TEST_CASE("weight formulas") {
    WeightingScheme uniform = WeightingScheme::uniform();
    CHECK(uniform.weight(0, 3) == 1.0);
    CHECK(uniform.weight(17, 0) == 1.0);

    WeightingScheme expo = WeightingScheme::exponential(1.05);
    CHECK(expo.weight(0, 0) == 1.0);
    CHECK(expo.weight(1, 0) == doctest::Approx(1.0 / 1.05).epsilon(1e-12));

    IdfTable idf;
    idf.document_count = 2;
    idf.weights = {0.6931, 0.0};
    WeightingScheme wd = WeightingScheme::word_dependent(idf);
    CHECK(wd.weight(0, 0) == 0.6931);
    CHECK(wd.weight(9, 0) == 0.6931); // independent of k

    CHECK_THROWS_AS(WeightingScheme::exponential(1.0), Error);
    CHECK_THROWS_AS(WeightingScheme::exponential(0.5), Error);
}

TEST_CASE("history and alpha defaults") {
    CHECK(kDefaultHistory == 100);
    CHECK(kDefaultAlpha == 1.05);
}

TEST_CASE("exponential weights match the repeated-division route") {
    WeightingScheme expo = WeightingScheme::exponential(1.05);
    double expected = 1.0;
    for (std::size_t k = 0; k <= 100; ++k) {
        CHECK(std::abs(expo.weight(k, 0) - expected) <= 1e-12 * expected);
        expected /= 1.05;
    }
}

TEST_CASE("context buffer push and eviction") {
    ContextBuffer buffer(1); // capacity 2
    CHECK(buffer.fill() == 0);
    buffer.push(10);
    CHECK(buffer.fill() == 1);
    CHECK(buffer.at_offset(0) == 10);

    buffer.push(11);
    buffer.push(12); // evicts 10
    CHECK(buffer.fill() == 2);
    CHECK(buffer.at_offset(0) == 12);
    CHECK(buffer.at_offset(1) == 11);
    CHECK(buffer.snapshot() == std::vector<std::int32_t>{11, 12});
}

TEST_CASE("buffer holds the last K+1 of K+2 pushes in order") {
    const std::size_t k = 5;
    ContextBuffer buffer(k);
    for (std::int32_t t = 0; t < static_cast<std::int32_t>(k) + 2; ++t) buffer.push(t);
    CHECK(buffer.fill() == k + 1);
    for (std::size_t off = 0; off <= k; ++off)
        CHECK(buffer.at_offset(off) == static_cast<std::int32_t>(k + 1 - off));
}

TEST_CASE("context_vector examples") {
    Matrix table(3, 2);
    table(0, 0) = 1.0; table(0, 1) = 0.0; // word a
    table(1, 0) = 0.0; table(1, 1) = 1.0; // word b

    ContextBuffer buffer(4);
    buffer.push(0);
    buffer.push(1);
    Vec d = context_vector(buffer, table, WeightingScheme::uniform());
    CHECK(d[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.5).epsilon(1e-15));

    // exponential alpha=2, buffer [older=a, newest=b]:
    // (1*e_b + 0.5*e_a) / 1.5 = [2/3, 1/3]
    Vec expo = context_vector(buffer, table, WeightingScheme::exponential(2.0));
    CHECK(expo[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(expo[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // all words identical -> d equals that embedding for any scheme
    ContextBuffer same(4);
    same.push(1);
    same.push(1);
    same.push(1);
    Vec only_b = context_vector(same, table, WeightingScheme::exponential(1.5));
    CHECK(only_b[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(only_b[1] == doctest::Approx(1.0).epsilon(1e-15));

    ContextBuffer empty(4);
    CHECK_THROWS_AS(context_vector(empty, table, WeightingScheme::uniform()), Error);
}

TEST_CASE("context_vector matches direct evaluation on random cases") {
    Rng rng(77);
    const Matrix table = embedding_fixture(9, 4, 5);
    IdfTable idf;
    idf.document_count = 16;
    idf.weights.resize(9);
    for (double& w : idf.weights) w = rng.uniform(0.05, 2.5);

    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t history = 1 + rng.next_u64() % 6;
        ContextBuffer buffer(history);
        const std::size_t pushes = 1 + rng.next_u64() % (history + 4);
        for (std::size_t p = 0; p < pushes; ++p)
            buffer.push(static_cast<std::int32_t>(rng.next_u64() % 9));

        WeightingScheme scheme = WeightingScheme::uniform();
        switch (trial % 3) {
            case 0: break;
            case 1: scheme = WeightingScheme::exponential(1.0 + rng.uniform(0.01, 2.0)); break;
            case 2: scheme = WeightingScheme::word_dependent(idf); break;
        }
        Vec got = context_vector(buffer, table, scheme);
        Vec want = direct_combination(buffer.snapshot(), table, scheme);
        for (std::size_t d = 0; d < got.size(); ++d)
            CHECK(std::abs(got[d] - want[d]) <= 1e-12);
    }
}

TEST_CASE("permutation invariance under uniform weighting") {
    Rng rng(123);
    const Matrix table = embedding_fixture(8, 3, 9);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int32_t> words(6);
        for (auto& w : words) w = static_cast<std::int32_t>(rng.next_u64() % 8);

        ContextBuffer a(words.size());
        for (auto w : words) a.push(w);
        Vec da = context_vector(a, table, WeightingScheme::uniform());

        std::vector<std::int32_t> shuffled(words);
        for (std::size_t i = shuffled.size(); i > 1; --i)
            std::swap(shuffled[i - 1], shuffled[rng.next_u64() % i]);
        ContextBuffer b(shuffled.size());
        for (auto w : shuffled) b.push(w);
        Vec db = context_vector(b, table, WeightingScheme::uniform());

        for (std::size_t d = 0; d < da.size(); ++d) CHECK(std::abs(da[d] - db[d]) <= 1e-12);
    }
}

TEST_CASE("convexity: each coordinate stays inside the contributing range") {
    Rng rng(321);
    const Matrix table = embedding_fixture(10, 5, 11);
    IdfTable idf;
    idf.document_count = 4;
    idf.weights.resize(10);
    for (double& w : idf.weights) w = rng.uniform(0.01, 3.0);

    const std::vector<WeightingScheme> schemes = {
        WeightingScheme::uniform(), WeightingScheme::exponential(1.3),
        WeightingScheme::word_dependent(idf)};
    for (int trial = 0; trial < 200; ++trial) {
        ContextBuffer buffer(7);
        const std::size_t pushes = 1 + rng.next_u64() % 8;
        for (std::size_t p = 0; p < pushes; ++p)
            buffer.push(static_cast<std::int32_t>(rng.next_u64() % 10));
        for (const auto& scheme : schemes) {
            Vec d = context_vector(buffer, table, scheme);
            auto snap = buffer.snapshot();
            for (std::size_t dim = 0; dim < d.size(); ++dim) {
                double lo = 1e300, hi = -1e300;
                for (auto w : snap) {
                    lo = std::min(lo, table(static_cast<std::size_t>(w), dim));
                    hi = std::max(hi, table(static_cast<std::size_t>(w), dim));
                }
                CHECK(d[dim] >= lo - 1e-12);
                CHECK(d[dim] <= hi + 1e-12);
            }
        }
    }
}

TEST_CASE("recency limit: huge alpha collapses d onto the newest embedding") {
    Rng rng(55);
    Matrix table = embedding_fixture(30, 6, 77, 1.0); // entries bounded by 1
    WeightingScheme sharp = WeightingScheme::exponential(1e6);
    ContextBuffer buffer(100); // capacity 101
    std::int32_t last = 0;
    for (int t = 0; t < 101; ++t) {
        last = static_cast<std::int32_t>(rng.next_u64() % 30);
        buffer.push(last);
    }
    Vec d = context_vector(buffer, table, sharp);
    for (std::size_t dim = 0; dim < d.size(); ++dim)
        CHECK(std::abs(d[dim] - table(static_cast<std::size_t>(last), dim)) < 1e-4);
}

TEST_CASE("word-dependent with a shared idf equals uniform") {
    const Matrix table = embedding_fixture(6, 4, 13);
    ContextBuffer buffer(5);
    for (std::int32_t w : {2, 4, 2, 5}) buffer.push(w);

    IdfTable ones;
    ones.document_count = 3;
    ones.weights.assign(6, 1.0);
    Vec uniform_d = context_vector(buffer, table, WeightingScheme::uniform());
    Vec wd_ones = context_vector(buffer, table, WeightingScheme::word_dependent(ones));
    CHECK(wd_ones == uniform_d); // identical arithmetic when idf == 1

    IdfTable shared;
    shared.document_count = 3;
    shared.weights.assign(6, 0.37);
    Vec wd_shared = context_vector(buffer, table, WeightingScheme::word_dependent(shared));
    for (std::size_t d = 0; d < uniform_d.size(); ++d)
        CHECK(wd_shared[d] == doctest::Approx(uniform_d[d]).epsilon(1e-12));

    // degenerate all-zero idf history falls back to the plain average
    IdfTable zeros;
    zeros.document_count = 3;
    zeros.weights.assign(6, 0.0);
    Vec wd_zero = context_vector(buffer, table, WeightingScheme::word_dependent(zeros));
    CHECK(wd_zero == uniform_d);
}

TEST_CASE("context_vector_backward accumulates transposed weights") {
    Matrix table(3, 2);
    table(0, 0) = 1.0;
    table(1, 1) = 1.0;

    SUBCASE("uniform two-word buffer splits the gradient") {
        Matrix grad(3, 2);
        context_vector_backward({1.0, 0.0}, {0, 1}, WeightingScheme::uniform(), grad);
        CHECK(grad(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(grad(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(grad(0, 1) == 0.0);
        CHECK(grad(2, 0) == 0.0);
    }

    SUBCASE("repeated word receives the full gradient") {
        Matrix grad(3, 2);
        context_vector_backward({0.25, -1.0}, {1, 1}, WeightingScheme::exponential(1.7), grad);
        CHECK(grad(1, 0) == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(grad(1, 1) == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(grad(0, 0) == 0.0);
    }
}

TEST_CASE("context_vector jacobian matches finite differences") {
    Rng rng(2718);
    IdfTable idf;
    idf.document_count = 8;
    idf.weights.resize(7);
    for (double& w : idf.weights) w = rng.uniform(0.05, 2.0);

    const std::vector<WeightingScheme> schemes = {
        WeightingScheme::uniform(), WeightingScheme::exponential(1.05),
        WeightingScheme::word_dependent(idf)};

    for (const auto& scheme : schemes) {
        Matrix table = embedding_fixture(7, 3, 999, 0.5);
        ContextBuffer buffer(4);
        for (std::int32_t w : {3, 5, 3, 1, 6}) buffer.push(w);

        // scalar probe: sum of c_d * d_d for fixed random c
        Vec probe_weights(3);
        for (double& v : probe_weights) v = rng.uniform(-1.0, 1.0);

        auto loss = [&](const Vec& flat) {
            Matrix t2(7, 3);
            t2.data() = flat;
            Vec d = context_vector(buffer, t2, scheme);
            return dot(d.data(), probe_weights.data(), d.size());
        };
        Vec numeric = finite_difference_gradient(loss, table.data(), 1e-5);

        Matrix analytic(7, 3);
        context_vector_backward(probe_weights, buffer.snapshot(), scheme, analytic);
        for (std::size_t j = 0; j < numeric.size(); ++j) {
            const double denom = std::max(
                {std::abs(numeric[j]), std::abs(analytic.data()[j]), 1e-6});
            CHECK(std::abs(numeric[j] - analytic.data()[j]) / denom < 1e-4);
        }
    }
}

TEST_CASE("nearest_words") {
    Matrix table(5, 3);
    // orthogonal rows for 1..3, zero row 4
    table(1, 0) = 2.0;
    table(2, 1) = 1.0;
    table(3, 2) = 1.5;

    SUBCASE("exact self match ranks first with similarity 1") {
        Vec d = {2.0, 0.0, 0.0};
        auto ranked = nearest_words(d, table, 2, {0});
        REQUIRE(ranked.size() == 2);
        CHECK(ranked[0].first == 1);
        CHECK(ranked[0].second == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("n larger than the vocabulary saturates") {
        Vec d = {1.0, 1.0, 0.0};
        auto ranked = nearest_words(d, table, 50, {0});
        CHECK(ranked.size() == 4); // 5 rows minus the excluded id 0
    }

    SUBCASE("ranking equals an exhaustive cosine sort") {
        Rng rng(4242);
        Matrix big = embedding_fixture(12, 4, 31);
        Vec d(4);
        for (double& v : d) v = rng.uniform(-1.0, 1.0);
        auto ranked = nearest_words(d, big, 12, {});

        std::vector<std::pair<double, std::int32_t>> brute;
        const double dn = std::sqrt(dot(d.data(), d.data(), 4));
        for (std::size_t id = 0; id < 12; ++id) {
            const double* row = big.row(id);
            const double rn = std::sqrt(dot(row, row, 4));
            brute.emplace_back(dot(row, d.data(), 4) / (rn * dn), static_cast<std::int32_t>(id));
        }
        std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        REQUIRE(ranked.size() == brute.size());
        for (std::size_t i = 0; i < brute.size(); ++i) {
            CHECK(ranked[i].first == brute[i].second);
            CHECK(ranked[i].second == doctest::Approx(brute[i].first).epsilon(1e-12));
        }
    }

    SUBCASE("zero query vector is rejected") {
        CHECK_THROWS_AS(nearest_words({0.0, 0.0, 0.0}, table, 3, {}), Error);
    }
}
