#pragma once

#include <cstddef>
#include <vector>

#include "dfe/matrix.hpp"

namespace dfe {

enum class LossKind { squared_residual, hinge };

// Per-round learning rate. fixed emits eta0 for every round; inverse_t emits
// clamp(eta0, k4, k5) / t, keeping K4/t <= eta(t) <= K5/t.
struct StepSchedule {
    enum class Kind { fixed, inverse_t };

    Kind kind = Kind::fixed;
    double eta0 = 0.1;
    double k4 = 0.01;
    double k5 = 1.0;

    static StepSchedule fixed(double eta0);
    static StepSchedule inverse_t(double eta0, double k4, double k5);
};

double step_size(const StepSchedule& schedule, int t);

// Exact matrix-vector product: scores[p] = sum_c columns(p,c) * w[c].
std::vector<double> local_scores(const DenseMatrix& columns, const std::vector<double>& w);

// Gradient of the per-instance squared residual 0.5*(y - j)^2 with respect to
// the local weights, evaluated at score j: -x * (y - j).
std::vector<double> residual_gradient(const std::vector<double>& x_local, int y, double j);

// Subgradient of max(0, 1 - y*j): zero outside the margin (and at the kink),
// -y*x inside it.
std::vector<double> hinge_subgradient(const std::vector<double>& x_local, int y, double j);

// In-place update w -= eta * g(x, y, j) for the chosen loss; the hot path of
// the round loop, shared by every caller so the three-line formulas exist once.
void apply_gradient_step(LossKind loss, const double* x, std::size_t len, int y, double j,
                         double eta, std::vector<double>& w);

double instance_loss(LossKind loss, int y, double score);

// +1 if score > 0, else -1 (ties break negative).
int predict_label(double score);

double accuracy(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace dfe
