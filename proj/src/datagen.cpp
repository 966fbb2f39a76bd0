#include "dfe/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dfe/errors.hpp"

namespace dfe {

const char* complexity_name(Complexity c) {
    return c == Complexity::simple ? "simple" : "complex";
}

std::vector<Instance> generate_instances(std::size_t n, std::size_t n_attrs, std::uint64_t seed) {
    if (n_attrs == 0) throw ConfigError("n_attrs must be >= 1");
    Rng rng(seed);
    std::bernoulli_distribution coin(0.5);
    std::vector<Instance> out(n);
    for (std::size_t p = 0; p < n; ++p) {
        out[p].attrs.resize(n_attrs);
        for (std::size_t a = 0; a < n_attrs; ++a) out[p].attrs[a] = coin(rng) ? 1 : 0;
    }
    return out;
}

namespace {

// First d entries of a seeded partial Fisher-Yates over [0, n).
std::vector<int> sample_distinct(int d, int n, Rng& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < d; ++i) {
        std::uniform_int_distribution<int> pick(i, n - 1);
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
    }
    idx.resize(static_cast<std::size_t>(d));
    return idx;
}

}  // namespace

Feature sample_feature(int max_literals, int n_attrs, Rng& rng) {
    if (max_literals < 1) throw ConfigError("max_literals must be >= 1");
    if (max_literals > n_attrs) throw ConfigError("max_literals exceeds attribute count");
    std::uniform_int_distribution<int> size_dist(1, max_literals);
    std::bernoulli_distribution polarity(0.5);
    const int d = size_dist(rng);
    std::vector<int> attrs = sample_distinct(d, n_attrs, rng);
    std::sort(attrs.begin(), attrs.end());
    Feature f;
    f.literals.reserve(static_cast<std::size_t>(d));
    for (int a : attrs) f.literals.push_back({a, polarity(rng)});
    return f;
}

int evaluate_feature(const Feature& f, const Instance& x) {
    for (const Literal& lit : f.literals) {
        if (lit.attr < 0 || static_cast<std::size_t>(lit.attr) >= x.attrs.size())
            throw std::out_of_range("feature literal refers to attribute " +
                                    std::to_string(lit.attr));
        const bool value = x.attrs[static_cast<std::size_t>(lit.attr)] != 0;
        if (value != lit.positive) return 0;
    }
    return 1;
}

TargetConcept draw_target(Complexity complexity, int max_literals, int n_attrs, Rng& rng) {
    const int lo = complexity == Complexity::simple ? 1 : 8;
    const int hi = complexity == Complexity::simple ? 4 : 12;
    std::uniform_int_distribution<int> count_dist(lo, hi);
    const int d = count_dist(rng);
    TargetConcept t;
    t.disjuncts.reserve(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) t.disjuncts.push_back(sample_feature(max_literals, n_attrs, rng));
    return t;
}

std::vector<int> label_instances(const std::vector<Instance>& instances,
                                 const TargetConcept& target) {
    std::vector<int> labels(instances.size(), -1);
    for (std::size_t p = 0; p < instances.size(); ++p) {
        for (const Feature& f : target.disjuncts) {
            if (evaluate_feature(f, instances[p])) {
                labels[p] = 1;
                break;
            }
        }
    }
    return labels;
}

bool feature_is_good(const Feature& f, const std::vector<Instance>& instances,
                     const std::vector<int>& labels, double minacc, int minpos) {
    long tp = 0, fp = 0;
    for (std::size_t p = 0; p < instances.size(); ++p) {
        if (!evaluate_feature(f, instances[p])) continue;
        if (labels[p] > 0)
            ++tp;
        else
            ++fp;
    }
    if (tp + fp == 0) return false;
    if (tp < minpos) return false;
    return static_cast<double>(tp) / static_cast<double>(tp + fp) >= minacc;
}

std::vector<Feature> filter_good_features(const std::vector<Feature>& candidates,
                                          const std::vector<Instance>& instances,
                                          const std::vector<int>& labels, double minacc,
                                          int minpos) {
    if (instances.empty()) throw ConfigError("cannot filter features against empty data");
    if (instances.size() != labels.size()) throw DimensionError("instance/label count mismatch");
    if (minacc <= 0.0 || minacc > 1.0) throw ConfigError("minacc must lie in (0, 1]");
    if (minpos < 1) throw ConfigError("minpos must be >= 1");
    std::vector<Feature> kept;
    for (const Feature& f : candidates) {
        if (feature_is_good(f, instances, labels, minacc, minpos)) kept.push_back(f);
    }
    return kept;
}

std::vector<Feature> build_feature_pool(const std::vector<Instance>& instances,
                                        const std::vector<int>& labels, std::size_t pool_size,
                                        int max_literals, double minacc, int minpos,
                                        std::uint64_t seed, std::size_t max_draws) {
    if (instances.empty()) throw ConfigError("cannot build a feature pool from empty data");
    if (pool_size == 0) throw ConfigError("pool_size must be >= 1");
    const int n_attrs = static_cast<int>(instances.front().attrs.size());
    Rng rng(seed);
    std::set<Feature> seen;
    std::vector<Feature> pool;
    for (std::size_t draws = 0; draws < max_draws && pool.size() < pool_size; ++draws) {
        Feature f = sample_feature(max_literals, n_attrs, rng);
        if (!seen.insert(f).second) continue;
        if (feature_is_good(f, instances, labels, minacc, minpos)) pool.push_back(std::move(f));
    }
    return pool;
}

FeaturePartition vertical_partition(std::size_t pool_size, int k, std::size_t per_node, Rng& rng) {
    if (pool_size == 0) throw EmptyPoolError("feature pool is empty");
    if (k < 1) throw ConfigError("node count must be >= 1");
    if (per_node == 0) throw ConfigError("per_node must be >= 1");
    const int block = static_cast<int>(std::min(per_node, pool_size));
    FeaturePartition part;
    part.blocks.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        std::vector<int> ids = sample_distinct(block, static_cast<int>(pool_size), rng);
        std::sort(ids.begin(), ids.end());
        part.blocks[static_cast<std::size_t>(i)] = std::move(ids);
    }
    return part;
}

std::string render_feature(const Feature& f) {
    std::string out;
    for (std::size_t i = 0; i < f.literals.size(); ++i) {
        if (i > 0) out += '&';
        if (!f.literals[i].positive) out += '!';
        out += 'a';
        out += std::to_string(f.literals[i].attr);
    }
    return out;
}

LabeledDataset materialize_features(const std::vector<Feature>& pool,
                                    const std::vector<Instance>& instances,
                                    const std::vector<int>& labels) {
    if (instances.size() != labels.size()) throw DimensionError("instance/label count mismatch");
    LabeledDataset out;
    out.matrix = DenseMatrix(instances.size(), pool.size());
    out.labels = labels;
    out.feature_names.reserve(pool.size());
    for (const Feature& f : pool) out.feature_names.push_back(render_feature(f));
    for (std::size_t p = 0; p < instances.size(); ++p) {
        double* row = out.matrix.row(p);
        for (std::size_t c = 0; c < pool.size(); ++c)
            row[c] = static_cast<double>(evaluate_feature(pool[c], instances[p]));
    }
    return out;
}

namespace {

LabeledDataset take_rows(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.matrix = DenseMatrix(rows.size(), data.m());
    out.labels.reserve(rows.size());
    out.feature_names = data.feature_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double* src = data.matrix.row(rows[i]);
        std::copy(src, src + data.m(), out.matrix.row(i));
        out.labels.push_back(data.labels[rows[i]]);
    }
    return out;
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> holdout_split(const LabeledDataset& data,
                                                        double holdout_fraction, Rng& rng) {
    if (data.n() == 0) throw ConfigError("cannot split an empty dataset");
    if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
        throw ConfigError("holdout fraction must lie in (0, 1)");
    const std::size_t n = data.n();
    std::size_t holdout_n = static_cast<std::size_t>(
        std::llround(static_cast<double>(n) * holdout_fraction));
    holdout_n = std::clamp<std::size_t>(holdout_n, 1, n - 1);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> train_rows(order.begin(), order.end() - holdout_n);
    std::vector<std::size_t> holdout_rows(order.end() - holdout_n, order.end());
    return {take_rows(data, train_rows), take_rows(data, holdout_rows)};
}

namespace {

int parse_int_field(const std::string& path, int line_no, std::string_view text) {
    int value = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw ParseError(path, line_no, "expected an integer, got '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

}  // namespace

LabeledDataset load_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw ParseError(path, 1, "missing header");

    std::vector<std::string_view> header = split_fields(lines.front());
    if (header.size() < 2 || header.back() != "label")
        throw ParseError(path, 1, "header must end in a `label` column");
    const std::size_t m = header.size() - 1;

    LabeledDataset out;
    out.feature_names.reserve(m);
    for (std::size_t c = 0; c < m; ++c) out.feature_names.emplace_back(header[c]);
    const std::size_t n = lines.size() - 1;
    out.matrix = DenseMatrix(n, m);
    out.labels.resize(n);
    for (std::size_t r = 0; r < n; ++r) {
        const int line_no = static_cast<int>(r) + 2;
        std::vector<std::string_view> fields = split_fields(lines[r + 1]);
        if (fields.size() != m + 1)
            throw ParseError(path, line_no,
                             "expected " + std::to_string(m + 1) + " fields, got " +
                                 std::to_string(fields.size()));
        for (std::size_t c = 0; c < m; ++c) {
            const int v = parse_int_field(path, line_no, fields[c]);
            if (v != 0 && v != 1)
                throw ParseError(path, line_no, "feature value must be 0 or 1");
            out.matrix.at(r, c) = static_cast<double>(v);
        }
        const int label = parse_int_field(path, line_no, fields[m]);
        if (label != -1 && label != 1)
            throw ParseError(path, line_no, "label must be -1 or +1");
        out.labels[r] = label;
    }
    return out;
}

void save_feature_csv(const LabeledDataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    for (std::size_t c = 0; c < data.m(); ++c) {
        const std::string& name =
            c < data.feature_names.size() ? data.feature_names[c] : ("f" + std::to_string(c));
        out << name << ',';
    }
    out << "label\n";
    for (std::size_t r = 0; r < data.n(); ++r) {
        const double* row = data.matrix.row(r);
        for (std::size_t c = 0; c < data.m(); ++c) out << static_cast<int>(row[c]) << ',';
        out << data.labels[r] << '\n';
    }
    if (!out) throw ConfigError("write failed for " + path);
}

}  // namespace dfe
