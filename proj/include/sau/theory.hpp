#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sau/pruning.hpp"
#include "sau/saliency.hpp"
#include "sau/tensor.hpp"

namespace sau {

// Enumeration-scale softmax family with an exactly diagonal Fisher matrix:
// each input x has one trainable logit offset theta[x] applied to a single
// designated class on top of fixed base logits, so distinct parameters never
// interact and the KL Hessian is diagonal. Inputs are uniformly weighted.
struct SoftmaxToy {
    int n_inputs = 0;
    int n_classes = 0;
    Tensor base_logits;           // [n_inputs, n_classes], fixed
    std::vector<int> free_class;  // per input: class whose logit theta offsets

    static SoftmaxToy seeded(int n_inputs, int n_classes, std::uint64_t seed);

    std::vector<double> probs(const std::vector<double>& theta, int input) const;

    // Mean over inputs of KL(p_theta || p_theta2), by direct enumeration.
    double exact_kl(const std::vector<double>& theta, const std::vector<double>& theta2) const;

    // True diagonal Fisher per parameter, closed form: p_c (1 - p_c) / n.
    std::vector<double> fisher(const std::vector<double>& theta) const;

    // Empirical diagonal Fisher of a labelled sample set, closed form.
    double empirical_fisher_closed_form(const std::vector<double>& theta,
                                        const std::vector<std::pair<int, int>>& samples,
                                        int param_index) const;

    // Gradient of the mean cross-entropy over (input, label) samples, via the
    // autodiff tape; the parameter tensor is named "theta", shaped
    // [n_inputs, 1].
    ParamSet autodiff_loss_grad(const ParamSet& theta_params,
                                const std::vector<std::pair<int, int>>& samples) const;
    static ParamSet wrap_theta(const std::vector<double>& theta);
};

// 0.5 * sum F_i * dtheta_i^2
double quadratic_kl(std::span<const double> fisher, std::span<const double> dtheta);

struct TheoremCheck {
    double eps = 0.0;
    double exact = 0.0;
    double quadratic = 0.0;
    double rel_err = 0.0;
    bool skipped = false;  // exact KL was 0 at this eps
};

struct TheoremReport {
    std::vector<TheoremCheck> checks;
    bool monotone = false;     // rel_err strictly decreases over the schedule
    double final_rel_err = 0.0;

    std::string to_json() const;
};

// For each eps (strictly decreasing, positive): relative error between
// exact_kl(theta, theta + eps * d) and the diagonal quadratic form. The
// Taylor remainder is cubic, so the relative error must shrink with eps.
TheoremReport verify_theorem(const SoftmaxToy& toy, const std::vector<double>& theta,
                             const std::vector<double>& direction,
                             const std::vector<double>& eps_list);

// Fraction of total Fisher information at pruned positions.
double capacity_loss(std::span<const double> fisher, std::span<const double> mask);
double capacity_loss(const SaliencyMap& fisher, const SparsityMask& mask);

struct CompensationReport {
    double lhs = 0.0;               // sum over survivors of W_i * F_i
    double rhs_exact = 0.0;         // sum F + alpha * I_pruned * (sum F^2 / sum F)
    double rhs_uniform = 0.0;       // sum F + alpha * I_pruned * mean survivor F
    double abs_err_exact = 0.0;     // |lhs - rhs_exact|; an algebraic identity
    double abs_err_uniform = 0.0;
    bool survivors_uniform = false;

    std::string to_json() const;
};

// Checks the redistribution compensation identity: exact expansion always,
// simplified form under uniform survivor Fisher.
CompensationReport verify_compensation(const Tensor& fisher, const Tensor& mask, double alpha);

}  // namespace sau
