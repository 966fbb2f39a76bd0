#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "dfe/datagen.hpp"
#include "dfe/errors.hpp"

using namespace dfe;

namespace {

// Independent re-evaluation of the disjunction, used as the labelling oracle.
int brute_force_label(const std::vector<Instance>& instances, std::size_t p,
                      const TargetConcept& target) {
    for (const Feature& f : target.disjuncts) {
        bool all = true;
        for (const Literal& lit : f.literals) {
            const bool v = instances[p].attrs[static_cast<std::size_t>(lit.attr)] != 0;
            if (v != lit.positive) {
                all = false;
                break;
            }
        }
        if (all) return 1;
    }
    return -1;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("generate_instances basics") {
    CHECK(generate_instances(0, 5, 1).empty());
    CHECK_THROWS_AS(generate_instances(10, 0, 1), ConfigError);

    const auto a = generate_instances(50, 7, 42);
    const auto b = generate_instances(50, 7, 42);
    REQUIRE(a.size() == 50);
    CHECK(a.front().attrs.size() == 7);
    for (std::size_t p = 0; p < a.size(); ++p) CHECK(a[p].attrs == b[p].attrs);
}

TEST_CASE("generate_instances draws fair coins") {
    const auto instances = generate_instances(1000, 20, 1);
    for (std::size_t c = 0; c < 20; ++c) {
        double mean = 0.0;
        for (const Instance& x : instances) mean += x.attrs[c];
        mean /= 1000.0;
        CHECK(mean >= 0.40);
        CHECK(mean <= 0.60);
    }
}

TEST_CASE("sample_feature respects size and distinctness") {
    Rng rng(7);
    CHECK_THROWS_AS(sample_feature(0, 20, rng), ConfigError);
    CHECK_THROWS_AS(sample_feature(21, 20, rng), ConfigError);

    Feature one = sample_feature(1, 20, rng);
    CHECK(one.literals.size() == 1);

    for (int i = 0; i < 1000; ++i) {
        Feature f = sample_feature(4, 20, rng);
        CHECK(f.literals.size() >= 1);
        CHECK(f.literals.size() <= 4);
        std::set<int> attrs;
        for (const Literal& lit : f.literals) {
            CHECK(lit.attr >= 0);
            CHECK(lit.attr < 20);
            attrs.insert(lit.attr);
        }
        CHECK(attrs.size() == f.literals.size());
    }
}

TEST_CASE("evaluate_feature is the literal conjunction") {
    const Feature f{{{0, true}, {1, false}}};  // a0 & !a1
    CHECK(evaluate_feature(f, Instance{{1, 0}}) == 1);
    CHECK(evaluate_feature(f, Instance{{1, 1}}) == 0);
    CHECK(evaluate_feature(f, Instance{{0, 0}}) == 0);
    CHECK_THROWS_AS(evaluate_feature(Feature{{{5, true}}}, Instance{{1, 0}}), std::out_of_range);
}

TEST_CASE("draw_target disjunct counts") {
    Rng rng(11);
    std::set<std::size_t> simple_sizes;
    for (int i = 0; i < 100; ++i) {
        TargetConcept t = draw_target(Complexity::simple, 4, 20, rng);
        CHECK(t.disjuncts.size() >= 1);
        CHECK(t.disjuncts.size() <= 4);
        simple_sizes.insert(t.disjuncts.size());
    }
    // every count in [1,4] shows up across 100 seeded draws
    CHECK(simple_sizes == std::set<std::size_t>{1, 2, 3, 4});

    for (int i = 0; i < 50; ++i) {
        TargetConcept t = draw_target(Complexity::complex, 4, 20, rng);
        CHECK(t.disjuncts.size() >= 8);
        CHECK(t.disjuncts.size() <= 12);
    }
}

TEST_CASE("label_instances matches the brute-force disjunction") {
    const auto instances = generate_instances(400, 12, 3);
    Rng rng(5);
    const TargetConcept target = draw_target(Complexity::simple, 3, 12, rng);
    const auto labels = label_instances(instances, target);
    REQUIRE(labels.size() == instances.size());
    for (std::size_t p = 0; p < instances.size(); ++p)
        CHECK(labels[p] == brute_force_label(instances, p, target));

    const Feature f{{{0, true}}};
    const TargetConcept single{{f}};
    CHECK(label_instances({Instance{{1}}}, single) == std::vector<int>{1});
    CHECK(label_instances({Instance{{0}}}, single) == std::vector<int>{-1});
}

TEST_CASE("filter_good_features agrees with an independent scan") {
    const auto instances = generate_instances(500, 10, 9);
    Rng trng(21);
    const TargetConcept target = draw_target(Complexity::simple, 3, 10, trng);
    const auto labels = label_instances(instances, target);

    Rng crng(33);
    std::vector<Feature> candidates;
    for (int i = 0; i < 300; ++i) candidates.push_back(sample_feature(4, 10, crng));

    const auto kept = filter_good_features(candidates, instances, labels, 0.75, 2);

    // Oracle: recount true/false positives per candidate from scratch.
    std::vector<Feature> expected;
    for (const Feature& f : candidates) {
        int tp = 0, fp = 0;
        for (std::size_t p = 0; p < instances.size(); ++p) {
            bool covers = true;
            for (const Literal& lit : f.literals)
                covers &= (instances[p].attrs[static_cast<std::size_t>(lit.attr)] != 0) ==
                          lit.positive;
            if (!covers) continue;
            (labels[p] > 0 ? tp : fp) += 1;
        }
        if (tp + fp > 0 && tp >= 2 &&
            static_cast<double>(tp) / static_cast<double>(tp + fp) >= 0.75)
            expected.push_back(f);
    }
    CHECK(kept == expected);

    CHECK_THROWS_AS(filter_good_features(candidates, {}, {}, 0.75, 2), ConfigError);
}

TEST_CASE("filter keeps a perfect feature and drops zero support") {
    std::vector<Instance> instances = {Instance{{1, 0}}, Instance{{1, 1}}, Instance{{0, 0}}};
    const Feature target{{{0, true}}};
    const auto labels = label_instances(instances, TargetConcept{{target}});
    const Feature unsat{{{0, false}, {1, true}}};  // !a0 & a1: covers nothing above
    const auto kept = filter_good_features({target, unsat}, instances, labels, 0.75, 2);
    REQUIRE(kept.size() == 1);
    CHECK(kept.front() == target);
}

TEST_CASE("build_feature_pool dedupes and respects the gate") {
    const auto instances = generate_instances(600, 10, 17);
    Rng trng(2);
    const TargetConcept target = draw_target(Complexity::simple, 2, 10, trng);
    const auto labels = label_instances(instances, target);
    const auto pool = build_feature_pool(instances, labels, 100, 4, 0.75, 2, 55);
    std::set<Feature> unique(pool.begin(), pool.end());
    CHECK(unique.size() == pool.size());
    for (const Feature& f : pool) CHECK(feature_is_good(f, instances, labels, 0.75, 2));
    CHECK(build_feature_pool(instances, labels, 100, 4, 0.75, 2, 55) == pool);
}

TEST_CASE("vertical_partition shapes and determinism") {
    Rng rng(3);
    CHECK_THROWS_AS(vertical_partition(0, 2, 5, rng), EmptyPoolError);

    Rng r1(10);
    const auto whole = vertical_partition(8, 1, 100, r1);
    REQUIRE(whole.k() == 1);
    CHECK(whole.blocks[0] == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});

    Rng r2(77);
    const auto p = vertical_partition(600, 10, 500, r2);
    REQUIRE(p.k() == 10);
    for (const auto& block : p.blocks) {
        CHECK(block.size() == 500);
        CHECK(std::is_sorted(block.begin(), block.end()));
        CHECK(std::adjacent_find(block.begin(), block.end()) == block.end());
        for (int c : block) {
            CHECK(c >= 0);
            CHECK(c < 600);
        }
    }

    Rng r3(5), r4(5);
    const auto a = vertical_partition(10, 2, 5, r3);
    const auto b = vertical_partition(10, 2, 5, r4);
    CHECK(a.blocks == b.blocks);
    for (const auto& block : a.blocks) CHECK(block.size() == 5);
}

TEST_CASE("holdout_split sizes, determinism and partition property") {
    const auto instances = generate_instances(1000, 6, 8);
    Rng trng(4);
    const TargetConcept target = draw_target(Complexity::simple, 2, 6, trng);
    const auto labels = label_instances(instances, target);
    std::vector<Feature> pool;
    Rng frng(12);
    for (int i = 0; i < 10; ++i) pool.push_back(sample_feature(3, 6, frng));
    const LabeledDataset data = materialize_features(pool, instances, labels);

    Rng s1(99), s2(99);
    const auto [train, holdout] = holdout_split(data, 0.3, s1);
    CHECK(train.n() == 700);
    CHECK(holdout.n() == 300);
    const auto [train2, holdout2] = holdout_split(data, 0.3, s2);
    CHECK(train == train2);
    CHECK(holdout == holdout2);

    // Union of rows (with labels) is exactly the input multiset.
    auto rows_of = [](const LabeledDataset& d) {
        std::vector<std::vector<double>> rows;
        for (std::size_t p = 0; p < d.n(); ++p) {
            std::vector<double> row(d.matrix.row(p), d.matrix.row(p) + d.m());
            row.push_back(static_cast<double>(d.labels[p]));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    auto joined = rows_of(train);
    auto held = rows_of(holdout);
    joined.insert(joined.end(), held.begin(), held.end());
    auto original = rows_of(data);
    std::sort(joined.begin(), joined.end());
    std::sort(original.begin(), original.end());
    CHECK(joined == original);

    Rng bad(1);
    CHECK_THROWS_AS(holdout_split(data, 0.0, bad), ConfigError);
    CHECK_THROWS_AS(holdout_split(data, 1.0, bad), ConfigError);

    // A tiny fraction still leaves one row in each part.
    Rng tiny(2);
    LabeledDataset ten;
    ten.matrix = DenseMatrix(10, 1);
    ten.labels.assign(10, 1);
    const auto [t10, h10] = holdout_split(ten, 0.01, tiny);
    CHECK(t10.n() == 9);
    CHECK(h10.n() == 1);
}

TEST_CASE("feature csv load, validation and round trip") {
    const std::string path = temp_path("dfe_test_minimal.csv");
    {
        std::FILE* f = std::fopen(path.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("f1,f2,label\n1,0,1\n0,0,-1\n", f);
        std::fclose(f);
    }
    const LabeledDataset data = load_feature_csv(path);
    CHECK(data.n() == 2);
    CHECK(data.m() == 2);
    CHECK(data.labels == std::vector<int>{1, -1});
    CHECK(data.matrix.at(0, 0) == 1.0);
    CHECK(data.feature_names == std::vector<std::string>{"f1", "f2"});

    const std::string bad = temp_path("dfe_test_bad_label.csv");
    {
        std::FILE* f = std::fopen(bad.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("f1,label\n1,1\n0,2\n", f);
        std::fclose(f);
    }
    try {
        load_feature_csv(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }

    const std::string bad_feature = temp_path("dfe_test_bad_feature.csv");
    {
        std::FILE* f = std::fopen(bad_feature.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("f1,label\n2,1\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_feature_csv(bad_feature), ParseError);

    const std::string round = temp_path("dfe_test_roundtrip.csv");
    save_feature_csv(data, round);
    CHECK(load_feature_csv(round) == data);

    const std::string header_only = temp_path("dfe_test_header_only.csv");
    {
        std::FILE* f = std::fopen(header_only.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("f1,f2,label\n", f);
        std::fclose(f);
    }
    const LabeledDataset empty = load_feature_csv(header_only);
    CHECK(empty.n() == 0);
    CHECK(empty.m() == 2);

    std::filesystem::remove(path);
    std::filesystem::remove(bad);
    std::filesystem::remove(bad_feature);
    std::filesystem::remove(round);
    std::filesystem::remove(header_only);
}
