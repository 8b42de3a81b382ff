#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sau/param_set.hpp"
#include "sau/tensor.hpp"

namespace sau {

struct Var {
    int id = -1;
};

// Reverse-mode autodiff over an explicit tape. Operations are recorded in
// execution order; backward() walks the tape once, in reverse, accumulating
// gradients in that fixed order. One Graph instance is single-threaded;
// independent graphs may run on independent threads.
class Graph {
public:
    // Constant leaf; never receives gradients.
    Var input(Tensor value);

    // Named gradient leaf backed by external storage, which must outlive the
    // graph. Receives gradients iff tensor.requires_grad.
    Var param(const std::string& name, const Tensor& tensor, bool prunable = false);

    // Registers every entry of a ParamSet as a named leaf, in order.
    std::vector<Var> register_params(const ParamSet& params);

    // a: [m, k], b: [k, n] -> [m, n]
    Var matmul(Var a, Var b);
    // Equal shapes, or [B, N] + [N] broadcast over the leading batch dim.
    Var add(Var a, Var b);
    // Elementwise product; equal shapes only.
    Var mul(Var a, Var b);
    Var relu(Var a);
    // table: [V, D]; indices: B rows of L token ids -> [B, L*D]
    Var embed(Var table, const std::vector<std::vector<int>>& indices);
    // logits: [B, C]; targets: B class ids -> scalar mean of -log softmax[t],
    // stabilized with log-sum-exp.
    Var softmax_cross_entropy(Var logits, const std::vector<int>& targets);
    Var sum(Var a);
    Var square(Var a);
    Var scale(Var a, double c);
    Var neg(Var a) { return scale(a, -1.0); }

    const Tensor& value(Var v) const;
    double scalar_value(Var v) const;

    // Backpropagates from a scalar loss and returns gradients for every
    // registered param, mirroring registration order; params untouched by the
    // recorded ops get zero gradients.
    ParamSet backward(Var loss);

    // Gradient of any node after backward() (zeros if the node was not
    // reached).
    const Tensor& grad(Var v) const;

private:
    struct Node {
        const Tensor* external = nullptr;  // leaf backed by caller storage
        Tensor owned;                      // op outputs and copied inputs
        Tensor grad;
        bool needs_grad = false;
        // Reads this node's grad, accumulates into input nodes' grads.
        std::function<void(Graph&, int)> back;
    };

    struct NamedLeaf {
        std::string name;
        int node = -1;
        bool prunable = false;
    };

    const Tensor& val(int id) const {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        return n.external ? *n.external : n.owned;
    }
    Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
    Var push(Tensor value, bool needs_grad, std::function<void(Graph&, int)> back);
    void check_var(Var v) const;

    std::vector<Node> nodes_;
    std::vector<NamedLeaf> named_;
    bool backward_done_ = false;
};

// Central finite differences (f(x + h e_i) - f(x - h e_i)) / 2h, per
// coordinate. Oracle for gradient verification; independent of the tape.
ParamSet finite_diff_grad(const std::function<double(const ParamSet&)>& f,
                          const ParamSet& params, double h);

}  // namespace sau
