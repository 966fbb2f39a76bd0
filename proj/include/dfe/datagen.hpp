#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dfe/matrix.hpp"
#include "dfe/rng.hpp"

namespace dfe {

// One data object: a fixed-length vector of boolean base attributes.
struct Instance {
    std::vector<std::uint8_t> attrs;
};

struct Literal {
    int attr = 0;
    bool positive = true;
    auto operator<=>(const Literal&) const = default;
};

// A conjunction of literals over distinct attributes; the unit from which
// targets and data columns are built.
struct Feature {
    std::vector<Literal> literals;  // sorted by attr, attrs distinct
    auto operator<=>(const Feature&) const = default;
};

// Hidden concept: a disjunction of features.
struct TargetConcept {
    std::vector<Feature> disjuncts;
};

enum class Complexity { simple, complex };

const char* complexity_name(Complexity c);

// n x m feature matrix with entries in {0,1} and labels in {-1,+1}.
struct LabeledDataset {
    DenseMatrix matrix;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t n() const { return matrix.rows; }
    std::size_t m() const { return matrix.cols; }

    bool operator==(const LabeledDataset&) const = default;
};

// Vertical split: blocks[i] lists the column indices held by node i. Blocks
// may overlap across nodes; indices are distinct and sorted within a block.
struct FeaturePartition {
    std::vector<std::vector<int>> blocks;

    int k() const { return static_cast<int>(blocks.size()); }
};

std::vector<Instance> generate_instances(std::size_t n, std::size_t n_attrs, std::uint64_t seed);

// A conjunction of d literals, d uniform in [1, max_literals], over distinct
// attributes with coin-flip polarity.
Feature sample_feature(int max_literals, int n_attrs, Rng& rng);

int evaluate_feature(const Feature& f, const Instance& x);

TargetConcept draw_target(Complexity complexity, int max_literals, int n_attrs, Rng& rng);

// +1 iff some disjunct of the target covers the instance, else -1.
std::vector<int> label_instances(const std::vector<Instance>& instances,
                                 const TargetConcept& target);

// Precision/support gate: keep f iff TP/(TP+FP) >= minacc and TP >= minpos.
bool feature_is_good(const Feature& f, const std::vector<Instance>& instances,
                     const std::vector<int>& labels, double minacc, int minpos);

std::vector<Feature> filter_good_features(const std::vector<Feature>& candidates,
                                          const std::vector<Instance>& instances,
                                          const std::vector<int>& labels, double minacc,
                                          int minpos);

// Randomised search for good features: draws deduplicated candidates until
// pool_size pass the gate or max_draws candidates have been tried. May return
// fewer than pool_size features; returns empty when nothing qualifies.
std::vector<Feature> build_feature_pool(const std::vector<Instance>& instances,
                                        const std::vector<int>& labels, std::size_t pool_size,
                                        int max_literals, double minacc, int minpos,
                                        std::uint64_t seed, std::size_t max_draws = 50000);

FeaturePartition vertical_partition(std::size_t pool_size, int k, std::size_t per_node, Rng& rng);

std::string render_feature(const Feature& f);

LabeledDataset materialize_features(const std::vector<Feature>& pool,
                                    const std::vector<Instance>& instances,
                                    const std::vector<int>& labels);

// Seeded disjoint row split; holdout receives round(n * holdout_fraction) rows,
// clamped so both parts are nonempty.
std::pair<LabeledDataset, LabeledDataset> holdout_split(const LabeledDataset& data,
                                                        double holdout_fraction, Rng& rng);

// Schema: comma-separated header whose last column is `label`; body rows are
// integers with features in {0,1} and label in {-1,+1}.
LabeledDataset load_feature_csv(const std::string& path);
void save_feature_csv(const LabeledDataset& data, const std::string& path);

}  // namespace dfe
