#include "sau/theory.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"
#include "sau/errors.hpp"
#include "sau/graph.hpp"
#include "sau/rng.hpp"
#include "sau/sau_plan.hpp"

namespace sau {

namespace {
using ordered_json = nlohmann::ordered_json;

std::vector<double> softmax(const double* logits, int n) {
    double m = logits[0];
    for (int i = 1; i < n; ++i) {
        m = std::max(m, logits[i]);
    }
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        z += std::exp(logits[i] - m);
    }
    std::vector<double> p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        p[static_cast<std::size_t>(i)] = std::exp(logits[i] - m) / z;
    }
    return p;
}
}  // namespace

SoftmaxToy SoftmaxToy::seeded(int n_inputs, int n_classes, std::uint64_t seed) {
    if (n_inputs < 1 || n_classes < 2) {
        throw ContractError("SoftmaxToy: need n_inputs >= 1 and n_classes >= 2");
    }
    Rng rng(seed);
    SoftmaxToy toy;
    toy.n_inputs = n_inputs;
    toy.n_classes = n_classes;
    toy.base_logits = Tensor::randn({n_inputs, n_classes}, rng, 1.0);
    toy.free_class.resize(static_cast<std::size_t>(n_inputs));
    for (auto& c : toy.free_class) {
        c = static_cast<int>(rng.next_index(n_classes));
    }
    return toy;
}

std::vector<double> SoftmaxToy::probs(const std::vector<double>& theta, int input) const {
    if (static_cast<int>(theta.size()) != n_inputs) {
        throw ShapeError("SoftmaxToy: theta length mismatch");
    }
    if (input < 0 || input >= n_inputs) {
        throw IndexError("SoftmaxToy: input out of range");
    }
    std::vector<double> logits(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        logits[static_cast<std::size_t>(c)] = base_logits.at(input, c);
    }
    logits[static_cast<std::size_t>(free_class[static_cast<std::size_t>(input)])] +=
        theta[static_cast<std::size_t>(input)];
    return softmax(logits.data(), n_classes);
}

double SoftmaxToy::exact_kl(const std::vector<double>& theta,
                            const std::vector<double>& theta2) const {
    double total = 0.0;
    for (int x = 0; x < n_inputs; ++x) {
        const auto p = probs(theta, x);
        const auto q = probs(theta2, x);
        for (int y = 0; y < n_classes; ++y) {
            const double py = p[static_cast<std::size_t>(y)];
            if (py > 0.0) {
                total += py * std::log(py / q[static_cast<std::size_t>(y)]);
            }
        }
    }
    return total / static_cast<double>(n_inputs);
}

std::vector<double> SoftmaxToy::fisher(const std::vector<double>& theta) const {
    std::vector<double> f(static_cast<std::size_t>(n_inputs));
    for (int x = 0; x < n_inputs; ++x) {
        const auto p = probs(theta, x);
        const double pc = p[static_cast<std::size_t>(free_class[static_cast<std::size_t>(x)])];
        f[static_cast<std::size_t>(x)] = pc * (1.0 - pc) / static_cast<double>(n_inputs);
    }
    return f;
}

double SoftmaxToy::empirical_fisher_closed_form(
    const std::vector<double>& theta, const std::vector<std::pair<int, int>>& samples,
    int param_index) const {
    double total = 0.0;
    for (const auto& [x, y] : samples) {
        if (x != param_index) {
            continue;
        }
        const auto p = probs(theta, x);
        const int c = free_class[static_cast<std::size_t>(x)];
        const double g = p[static_cast<std::size_t>(c)] - (y == c ? 1.0 : 0.0);
        total += g * g;
    }
    return total / static_cast<double>(samples.size());
}

ParamSet SoftmaxToy::wrap_theta(const std::vector<double>& theta) {
    const auto n = static_cast<std::int64_t>(theta.size());
    Tensor t({n, 1}, theta);
    t.requires_grad = true;
    ParamSet p;
    p.add("theta", std::move(t), false);
    return p;
}

ParamSet SoftmaxToy::autodiff_loss_grad(const ParamSet& theta_params,
                                        const std::vector<std::pair<int, int>>& samples) const {
    if (samples.empty()) {
        throw ContractError("SoftmaxToy: empty sample batch");
    }
    Graph g;
    Var theta = g.param("theta", theta_params.at("theta"), false);
    std::vector<std::vector<int>> rows;
    std::vector<int> targets;
    rows.reserve(samples.size());
    for (const auto& [x, y] : samples) {
        rows.push_back({x});
        targets.push_back(y);
    }
    // Per-sample logits: base row plus theta[x] scattered onto the free class
    // via a one-hot matmul.
    Var sel = g.embed(theta, rows);  // [B, 1]
    Tensor onehots = Tensor::zeros({static_cast<std::int64_t>(samples.size()),
                                    static_cast<std::int64_t>(n_classes)});
    Tensor bases = Tensor::zeros({static_cast<std::int64_t>(samples.size()),
                                  static_cast<std::int64_t>(n_classes)});
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const int x = samples[r].first;
        onehots.at(static_cast<std::int64_t>(r),
                   free_class[static_cast<std::size_t>(x)]) = 1.0;
        for (int c = 0; c < n_classes; ++c) {
            bases.at(static_cast<std::int64_t>(r), c) = base_logits.at(x, c);
        }
    }
    // sel is [B, 1]; scattering row-wise needs an elementwise product with the
    // one-hot rows. matmul([B,1],[1,C]) would mix rows, so spread sel to
    // [B, C] first via matmul with a row of ones, then gate by the one-hots.
    Var ones_row = g.input(Tensor::full({1, static_cast<std::int64_t>(n_classes)}, 1.0));
    Var spread = g.matmul(sel, ones_row);                    // [B, C], theta[x] everywhere
    Var gates = g.input(std::move(onehots));
    // spread ⊙ gates, built from square((a+b)) identities is clumsy; use a
    // dedicated elementwise product below.
    Var delta = g.mul(spread, gates);
    Var logits = g.add(delta, g.input(std::move(bases)));
    Var loss = g.softmax_cross_entropy(logits, targets);
    return g.backward(loss);
}

double quadratic_kl(std::span<const double> fisher, std::span<const double> dtheta) {
    if (fisher.size() != dtheta.size()) {
        throw ShapeError("quadratic_kl: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < fisher.size(); ++i) {
        s += fisher[i] * dtheta[i] * dtheta[i];
    }
    return 0.5 * s;
}

TheoremReport verify_theorem(const SoftmaxToy& toy, const std::vector<double>& theta,
                             const std::vector<double>& direction,
                             const std::vector<double>& eps_list) {
    if (direction.size() != theta.size()) {
        throw ShapeError("verify_theorem: direction length mismatch");
    }
    if (eps_list.empty()) {
        throw ContractError("verify_theorem: empty eps list");
    }
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) {
            throw ContractError("verify_theorem: eps values must be positive");
        }
        if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
            throw ContractError("verify_theorem: eps list must be strictly decreasing");
        }
    }
    const std::vector<double> fisher = toy.fisher(theta);
    TheoremReport report;
    for (double eps : eps_list) {
        TheoremCheck check;
        check.eps = eps;
        std::vector<double> moved = theta;
        std::vector<double> step(direction.size());
        for (std::size_t i = 0; i < direction.size(); ++i) {
            step[i] = eps * direction[i];
            moved[i] += step[i];
        }
        check.exact = toy.exact_kl(theta, moved);
        check.quadratic = quadratic_kl(fisher, step);
        if (check.exact == 0.0) {
            check.skipped = true;
        } else {
            check.rel_err = std::abs(check.exact - check.quadratic) / check.exact;
        }
        report.checks.push_back(check);
    }
    report.monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& c : report.checks) {
        if (c.skipped) {
            continue;
        }
        if (!(c.rel_err < prev)) {
            report.monotone = false;
        }
        prev = c.rel_err;
        report.final_rel_err = c.rel_err;
    }
    return report;
}

double capacity_loss(std::span<const double> fisher, std::span<const double> mask) {
    if (fisher.size() != mask.size()) {
        throw ShapeError("capacity_loss: length mismatch");
    }
    double total = 0.0, pruned = 0.0;
    for (std::size_t i = 0; i < fisher.size(); ++i) {
        total += fisher[i];
        if (mask[i] == 0.0) {
            pruned += fisher[i];
        }
    }
    if (!(total > 0.0)) {
        throw ContractError("capacity_loss: total Fisher information is zero");
    }
    return pruned / total;
}

double capacity_loss(const SaliencyMap& fisher, const SparsityMask& mask) {
    std::vector<double> f, m;
    for (const auto& layer : mask.layers) {
        const Tensor& s = fisher.scores.at(layer.name);
        f.insert(f.end(), s.data.begin(), s.data.end());
        m.insert(m.end(), layer.mask.data.begin(), layer.mask.data.end());
    }
    return capacity_loss(f, m);
}

CompensationReport verify_compensation(const Tensor& fisher, const Tensor& mask, double alpha) {
    if (!fisher.same_shape(mask)) {
        throw ShapeError("verify_compensation: shape mismatch");
    }
    bool any_survivor = false;
    for (double v : mask.data) {
        if (v != 0.0) {
            any_survivor = true;
            break;
        }
    }
    if (!any_survivor) {
        throw ContractError("verify_compensation: mask has no survivors");
    }
    const Tensor w = build_redistribution(fisher, mask, alpha);
    double lhs = 0.0, sum_f = 0.0, sum_f2 = 0.0;
    std::int64_t n_surv = 0;
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) != 0.0) {
            lhs += w.at(i) * fisher.at(i);
            sum_f += fisher.at(i);
            sum_f2 += fisher.at(i) * fisher.at(i);
            ++n_surv;
        }
    }
    const double lost = pruned_importance(fisher, mask);
    CompensationReport report;
    report.lhs = lhs;
    report.rhs_exact = sum_f2 > 0.0 || sum_f > 0.0
                           ? sum_f + (sum_f > 0.0 ? alpha * lost * (sum_f2 / sum_f) : 0.0)
                           : sum_f;
    const double mean_f = sum_f / static_cast<double>(n_surv);
    report.rhs_uniform = sum_f + alpha * lost * mean_f;
    report.abs_err_exact = std::abs(report.lhs - report.rhs_exact);
    report.abs_err_uniform = std::abs(report.lhs - report.rhs_uniform);
    report.survivors_uniform = true;
    double first = -1.0;
    for (std::int64_t i = 0; i < mask.numel(); ++i) {
        if (mask.at(i) != 0.0) {
            if (first < 0.0) {
                first = fisher.at(i);
            } else if (fisher.at(i) != first) {
                report.survivors_uniform = false;
            }
        }
    }
    return report;
}

std::string TheoremReport::to_json() const {
    ordered_json j;
    j["checks"] = ordered_json::array();
    for (const auto& c : checks) {
        j["checks"].push_back({{"eps", c.eps},
                               {"exact_kl", c.exact},
                               {"quadratic_kl", c.quadratic},
                               {"rel_err", c.rel_err},
                               {"skipped", c.skipped}});
    }
    j["monotone"] = monotone;
    j["final_rel_err"] = final_rel_err;
    return j.dump(2) + "\n";
}

std::string CompensationReport::to_json() const {
    ordered_json j;
    j["lhs"] = lhs;
    j["rhs_exact"] = rhs_exact;
    j["rhs_uniform"] = rhs_uniform;
    j["abs_err_exact"] = abs_err_exact;
    j["abs_err_uniform"] = abs_err_uniform;
    j["survivors_uniform"] = survivors_uniform;
    return j.dump(2) + "\n";
}

}  // namespace sau
