#include "dfe/model.hpp"

#include <algorithm>
#include <cmath>

#include "dfe/errors.hpp"

namespace dfe {

StepSchedule StepSchedule::fixed(double eta0) {
    if (eta0 < 0.0) throw ConfigError("step size must be nonnegative");
    StepSchedule s;
    s.kind = Kind::fixed;
    s.eta0 = eta0;
    return s;
}

StepSchedule StepSchedule::inverse_t(double eta0, double k4, double k5) {
    if (eta0 < 0.0) throw ConfigError("step size must be nonnegative");
    if (k4 <= 0.0 || k5 <= 0.0 || k4 > k5) throw ConfigError("require 0 < K4 <= K5");
    StepSchedule s;
    s.kind = Kind::inverse_t;
    s.eta0 = eta0;
    s.k4 = k4;
    s.k5 = k5;
    return s;
}

double step_size(const StepSchedule& schedule, int t) {
    if (t < 1) throw ConfigError("round index must be >= 1");
    if (schedule.kind == StepSchedule::Kind::fixed) return schedule.eta0;
    return std::clamp(schedule.eta0, schedule.k4, schedule.k5) / static_cast<double>(t);
}

std::vector<double> local_scores(const DenseMatrix& columns, const std::vector<double>& w) {
    if (columns.cols != w.size())
        throw DimensionError("column count does not match weight length");
    std::vector<double> scores(columns.rows, 0.0);
    for (std::size_t p = 0; p < columns.rows; ++p) {
        const double* x = columns.row(p);
        double s = 0.0;
        for (std::size_t c = 0; c < columns.cols; ++c) s += x[c] * w[c];
        scores[p] = s;
    }
    return scores;
}

std::vector<double> residual_gradient(const std::vector<double>& x_local, int y, double j) {
    const double r = static_cast<double>(y) - j;
    std::vector<double> g(x_local.size());
    for (std::size_t c = 0; c < x_local.size(); ++c) g[c] = -x_local[c] * r;
    return g;
}

std::vector<double> hinge_subgradient(const std::vector<double>& x_local, int y, double j) {
    std::vector<double> g(x_local.size(), 0.0);
    if (static_cast<double>(y) * j < 1.0) {
        for (std::size_t c = 0; c < x_local.size(); ++c) g[c] = -static_cast<double>(y) * x_local[c];
    }
    return g;
}

void apply_gradient_step(LossKind loss, const double* x, std::size_t len, int y, double j,
                         double eta, std::vector<double>& w) {
    switch (loss) {
        case LossKind::squared_residual: {
            const double coef = eta * (static_cast<double>(y) - j);
            if (coef == 0.0) return;
            for (std::size_t c = 0; c < len; ++c) w[c] += coef * x[c];
            return;
        }
        case LossKind::hinge: {
            if (static_cast<double>(y) * j >= 1.0) return;
            const double coef = eta * static_cast<double>(y);
            for (std::size_t c = 0; c < len; ++c) w[c] += coef * x[c];
            return;
        }
    }
}

double instance_loss(LossKind loss, int y, double score) {
    if (loss == LossKind::squared_residual) {
        const double r = static_cast<double>(y) - score;
        return 0.5 * r * r;
    }
    return std::max(0.0, 1.0 - static_cast<double>(y) * score);
}

int predict_label(double score) { return score > 0.0 ? 1 : -1; }

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DimensionError("score/label length mismatch");
    if (scores.empty()) throw ConfigError("accuracy of an empty set is undefined");
    std::size_t hits = 0;
    for (std::size_t p = 0; p < scores.size(); ++p) {
        if (predict_label(scores[p]) == labels[p]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(scores.size());
}

}  // namespace dfe
