#include "sau/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "sau/errors.hpp"

namespace sau {

Var Graph::push(Tensor value, bool needs_grad, std::function<void(Graph&, int)> back) {
    Node n;
    n.owned = std::move(value);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

void Graph::check_var(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
        throw ContractError("Var does not belong to this graph");
    }
}

Var Graph::input(Tensor value) {
    checked_numel(value.shape);
    return push(std::move(value), false, nullptr);
}

Var Graph::param(const std::string& name, const Tensor& tensor, bool prunable) {
    checked_numel(tensor.shape);
    // Re-registering the same storage under the same name (e.g. a second loss
    // term on the same graph) reuses the existing leaf so gradients
    // accumulate into one node.
    for (const auto& leaf : named_) {
        if (leaf.name == name) {
            if (nodes_[static_cast<std::size_t>(leaf.node)].external != &tensor) {
                throw ContractError("param: name '" + name +
                                    "' already registered with different storage");
            }
            return Var{leaf.node};
        }
    }
    Node n;
    n.external = &tensor;
    n.needs_grad = tensor.requires_grad;
    nodes_.push_back(std::move(n));
    const int id = static_cast<int>(nodes_.size()) - 1;
    named_.push_back(NamedLeaf{name, id, prunable});
    return Var{id};
}

std::vector<Var> Graph::register_params(const ParamSet& params) {
    std::vector<Var> vars;
    vars.reserve(params.size());
    for (const auto& e : params.entries()) {
        vars.push_back(param(e.name, e.tensor, e.prunable));
    }
    return vars;
}

const Tensor& Graph::value(Var v) const {
    check_var(v);
    return val(v.id);
}

double Graph::scalar_value(Var v) const {
    const Tensor& t = value(v);
    if (t.numel() != 1) {
        throw ContractError("scalar_value: tensor has " + std::to_string(t.numel()) +
                            " elements");
    }
    return t.data[0];
}

const Tensor& Graph::grad(Var v) const {
    check_var(v);
    return nodes_[static_cast<std::size_t>(v.id)].grad;
}

Var Graph::matmul(Var a, Var b) {
    check_var(a);
    check_var(b);
    const Tensor& ta = val(a.id);
    const Tensor& tb = val(b.id);
    if (ta.rank() != 2 || tb.rank() != 2) {
        throw ShapeError("matmul: operands must be rank-2");
    }
    const std::int64_t m = ta.shape[0], k = ta.shape[1], n = tb.shape[1];
    if (tb.shape[0] != k) {
        throw ShapeError("matmul: inner dimensions " + std::to_string(k) + " vs " +
                         std::to_string(tb.shape[0]));
    }
    Tensor out = Tensor::zeros({m, n});
    for (std::int64_t i = 0; i < m; ++i) {
        const double* arow = ta.data.data() + i * k;
        double* orow = out.data.data() + i * n;
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) {
                continue;
            }
            const double* brow = tb.data.data() + kk * n;
            for (std::int64_t j = 0; j < n; ++j) {
                orow[j] += av * brow[j];
            }
        }
    }
    const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
    return push(std::move(out), ng, [a, b, m, k, n](Graph& g, int self) {
        const Tensor& go = g.node(self).grad;
        const Tensor& ta = g.val(a.id);
        const Tensor& tb = g.val(b.id);
        if (g.node(a.id).needs_grad) {
            Tensor& ga = g.node(a.id).grad;
            for (std::int64_t i = 0; i < m; ++i) {
                for (std::int64_t kk = 0; kk < k; ++kk) {
                    double s = 0.0;
                    for (std::int64_t j = 0; j < n; ++j) {
                        s += go.data[static_cast<std::size_t>(i * n + j)] *
                             tb.data[static_cast<std::size_t>(kk * n + j)];
                    }
                    ga.data[static_cast<std::size_t>(i * k + kk)] += s;
                }
            }
        }
        if (g.node(b.id).needs_grad) {
            Tensor& gb = g.node(b.id).grad;
            for (std::int64_t kk = 0; kk < k; ++kk) {
                for (std::int64_t j = 0; j < n; ++j) {
                    double s = 0.0;
                    for (std::int64_t i = 0; i < m; ++i) {
                        s += ta.data[static_cast<std::size_t>(i * k + kk)] *
                             go.data[static_cast<std::size_t>(i * n + j)];
                    }
                    gb.data[static_cast<std::size_t>(kk * n + j)] += s;
                }
            }
        }
    });
}

Var Graph::add(Var a, Var b) {
    check_var(a);
    check_var(b);
    const Tensor& ta = val(a.id);
    const Tensor& tb = val(b.id);
    const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;

    if (ta.shape == tb.shape) {
        Tensor out = ta;
        out.requires_grad = false;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            out.data[i] += tb.data[i];
        }
        return push(std::move(out), ng, [a, b](Graph& g, int self) {
            const Tensor& go = g.node(self).grad;
            for (Var v : {a, b}) {
                if (g.node(v.id).needs_grad) {
                    Tensor& gv = g.node(v.id).grad;
                    for (std::size_t i = 0; i < gv.data.size(); ++i) {
                        gv.data[i] += go.data[i];
                    }
                }
            }
        });
    }

    // [B, N] + [N]: bias broadcast over the leading batch dimension.
    if (ta.rank() == 2 && tb.rank() == 1 && ta.shape[1] == tb.shape[0]) {
        const std::int64_t B = ta.shape[0], N = ta.shape[1];
        Tensor out = ta;
        out.requires_grad = false;
        for (std::int64_t r = 0; r < B; ++r) {
            for (std::int64_t c = 0; c < N; ++c) {
                out.data[static_cast<std::size_t>(r * N + c)] +=
                    tb.data[static_cast<std::size_t>(c)];
            }
        }
        return push(std::move(out), ng, [a, b, B, N](Graph& g, int self) {
            const Tensor& go = g.node(self).grad;
            if (g.node(a.id).needs_grad) {
                Tensor& ga = g.node(a.id).grad;
                for (std::size_t i = 0; i < ga.data.size(); ++i) {
                    ga.data[i] += go.data[i];
                }
            }
            if (g.node(b.id).needs_grad) {
                Tensor& gb = g.node(b.id).grad;
                for (std::int64_t r = 0; r < B; ++r) {
                    for (std::int64_t c = 0; c < N; ++c) {
                        gb.data[static_cast<std::size_t>(c)] +=
                            go.data[static_cast<std::size_t>(r * N + c)];
                    }
                }
            }
        });
    }

    throw ShapeError("add: incompatible shapes");
}

Var Graph::mul(Var a, Var b) {
    check_var(a);
    check_var(b);
    const Tensor& ta = val(a.id);
    const Tensor& tb = val(b.id);
    if (ta.shape != tb.shape) {
        throw ShapeError("mul: shape mismatch");
    }
    Tensor out = ta;
    out.requires_grad = false;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] *= tb.data[i];
    }
    const bool ng = node(a.id).needs_grad || node(b.id).needs_grad;
    return push(std::move(out), ng, [a, b](Graph& g, int self) {
        const Tensor& go = g.node(self).grad;
        const Tensor& ta = g.val(a.id);
        const Tensor& tb = g.val(b.id);
        if (g.node(a.id).needs_grad) {
            Tensor& ga = g.node(a.id).grad;
            for (std::size_t i = 0; i < ga.data.size(); ++i) {
                ga.data[i] += tb.data[i] * go.data[i];
            }
        }
        if (g.node(b.id).needs_grad) {
            Tensor& gb = g.node(b.id).grad;
            for (std::size_t i = 0; i < gb.data.size(); ++i) {
                gb.data[i] += ta.data[i] * go.data[i];
            }
        }
    });
}

Var Graph::relu(Var a) {
    check_var(a);
    Tensor out = val(a.id);
    out.requires_grad = false;
    for (auto& v : out.data) {
        if (v < 0.0) {
            v = 0.0;
        }
    }
    return push(std::move(out), node(a.id).needs_grad, [a](Graph& g, int self) {
        if (!g.node(a.id).needs_grad) {
            return;
        }
        const Tensor& go = g.node(self).grad;
        const Tensor& ta = g.val(a.id);
        Tensor& ga = g.node(a.id).grad;
        for (std::size_t i = 0; i < ga.data.size(); ++i) {
            if (ta.data[i] > 0.0) {
                ga.data[i] += go.data[i];
            }
        }
    });
}

Var Graph::embed(Var table, const std::vector<std::vector<int>>& indices) {
    check_var(table);
    const Tensor& tt = val(table.id);
    if (tt.rank() != 2) {
        throw ShapeError("embed: table must be rank-2");
    }
    if (indices.empty()) {
        throw ContractError("embed: empty index batch");
    }
    const std::int64_t V = tt.shape[0], D = tt.shape[1];
    const auto L = static_cast<std::int64_t>(indices[0].size());
    for (const auto& row : indices) {
        if (static_cast<std::int64_t>(row.size()) != L) {
            throw ShapeError("embed: ragged index rows");
        }
        for (int idx : row) {
            if (idx < 0 || idx >= V) {
                throw IndexError("embed: index " + std::to_string(idx) + " out of range [0, " +
                                 std::to_string(V) + ")");
            }
        }
    }
    const auto B = static_cast<std::int64_t>(indices.size());
    Tensor out = Tensor::zeros({B, L * D});
    for (std::int64_t r = 0; r < B; ++r) {
        for (std::int64_t l = 0; l < L; ++l) {
            const double* src = tt.data.data() + static_cast<std::int64_t>(indices[r][l]) * D;
            std::copy(src, src + D, out.data.data() + r * (L * D) + l * D);
        }
    }
    return push(std::move(out), node(table.id).needs_grad,
                [table, indices, L, D](Graph& g, int self) {
                    if (!g.node(table.id).needs_grad) {
                        return;
                    }
                    const Tensor& go = g.node(self).grad;
                    Tensor& gt = g.node(table.id).grad;
                    const auto B = static_cast<std::int64_t>(indices.size());
                    for (std::int64_t r = 0; r < B; ++r) {
                        for (std::int64_t l = 0; l < L; ++l) {
                            double* dst =
                                gt.data.data() + static_cast<std::int64_t>(indices[r][l]) * D;
                            const double* src = go.data.data() + r * (L * D) + l * D;
                            for (std::int64_t d = 0; d < D; ++d) {
                                dst[d] += src[d];
                            }
                        }
                    }
                });
}

Var Graph::softmax_cross_entropy(Var logits, const std::vector<int>& targets) {
    check_var(logits);
    const Tensor& tl = val(logits.id);
    if (tl.rank() != 2) {
        throw ShapeError("softmax_cross_entropy: logits must be rank-2 [batch, classes]");
    }
    if (targets.empty()) {
        throw ContractError("softmax_cross_entropy: empty batch");
    }
    const std::int64_t B = tl.shape[0], C = tl.shape[1];
    if (static_cast<std::int64_t>(targets.size()) != B) {
        throw ShapeError("softmax_cross_entropy: batch size " + std::to_string(B) + " vs " +
                         std::to_string(targets.size()) + " targets");
    }
    for (int t : targets) {
        if (t < 0 || t >= C) {
            throw IndexError("softmax_cross_entropy: target " + std::to_string(t) +
                             " out of range [0, " + std::to_string(C) + ")");
        }
    }
    // Forward with log-sum-exp; cache softmax rows for backward.
    Tensor probs = Tensor::zeros({B, C});
    double loss = 0.0;
    for (std::int64_t r = 0; r < B; ++r) {
        const double* x = tl.data.data() + r * C;
        double m = x[0];
        for (std::int64_t c = 1; c < C; ++c) {
            m = std::max(m, x[c]);
        }
        double z = 0.0;
        for (std::int64_t c = 0; c < C; ++c) {
            z += std::exp(x[c] - m);
        }
        const double lse = m + std::log(z);
        loss += lse - x[targets[static_cast<std::size_t>(r)]];
        double* p = probs.data.data() + r * C;
        for (std::int64_t c = 0; c < C; ++c) {
            p[c] = std::exp(x[c] - lse);
        }
    }
    loss /= static_cast<double>(B);
    return push(Tensor({1}, {loss}), node(logits.id).needs_grad,
                [logits, targets, probs = std::move(probs), B, C](Graph& g, int self) {
                    if (!g.node(logits.id).needs_grad) {
                        return;
                    }
                    const double g0 = g.node(self).grad.data[0] / static_cast<double>(B);
                    Tensor& gl = g.node(logits.id).grad;
                    for (std::int64_t r = 0; r < B; ++r) {
                        const double* p = probs.data.data() + r * C;
                        double* gr = gl.data.data() + r * C;
                        const int t = targets[static_cast<std::size_t>(r)];
                        for (std::int64_t c = 0; c < C; ++c) {
                            gr[c] += g0 * (p[c] - (c == t ? 1.0 : 0.0));
                        }
                    }
                });
}

Var Graph::sum(Var a) {
    check_var(a);
    const Tensor& ta = val(a.id);
    double s = 0.0;
    for (double v : ta.data) {
        s += v;
    }
    return push(Tensor({1}, {s}), node(a.id).needs_grad, [a](Graph& g, int self) {
        if (!g.node(a.id).needs_grad) {
            return;
        }
        const double g0 = g.node(self).grad.data[0];
        for (auto& v : g.node(a.id).grad.data) {
            v += g0;
        }
    });
}

Var Graph::square(Var a) {
    check_var(a);
    Tensor out = val(a.id);
    out.requires_grad = false;
    for (auto& v : out.data) {
        v *= v;
    }
    return push(std::move(out), node(a.id).needs_grad, [a](Graph& g, int self) {
        if (!g.node(a.id).needs_grad) {
            return;
        }
        const Tensor& go = g.node(self).grad;
        const Tensor& ta = g.val(a.id);
        Tensor& ga = g.node(a.id).grad;
        for (std::size_t i = 0; i < ga.data.size(); ++i) {
            ga.data[i] += 2.0 * ta.data[i] * go.data[i];
        }
    });
}

Var Graph::scale(Var a, double c) {
    check_var(a);
    Tensor out = val(a.id);
    out.requires_grad = false;
    for (auto& v : out.data) {
        v *= c;
    }
    return push(std::move(out), node(a.id).needs_grad, [a, c](Graph& g, int self) {
        if (!g.node(a.id).needs_grad) {
            return;
        }
        const Tensor& go = g.node(self).grad;
        Tensor& ga = g.node(a.id).grad;
        for (std::size_t i = 0; i < ga.data.size(); ++i) {
            ga.data[i] += c * go.data[i];
        }
    });
}

ParamSet Graph::backward(Var loss) {
    check_var(loss);
    if (backward_done_) {
        throw ContractError("backward: already called on this graph");
    }
    const Tensor& lt = val(loss.id);
    if (lt.numel() != 1) {
        throw ContractError("backward: loss must be scalar, has " + std::to_string(lt.numel()) +
                            " elements");
    }
    backward_done_ = true;
    for (auto& n : nodes_) {
        if (n.needs_grad) {
            n.grad = Tensor::zeros(n.external ? n.external->shape : n.owned.shape);
        }
    }
    Node& ln = node(loss.id);
    if (ln.needs_grad) {
        ln.grad.data[0] = 1.0;
    }
    // One pass over the tape in reverse execution order.
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (n.back && n.needs_grad) {
            n.back(*this, i);
        }
    }
    ParamSet grads;
    for (const auto& leaf : named_) {
        const Node& n = nodes_[static_cast<std::size_t>(leaf.node)];
        if (n.needs_grad) {
            grads.add(leaf.name, n.grad, leaf.prunable);
        } else {
            grads.add(leaf.name, Tensor::zeros(n.external->shape), leaf.prunable);
        }
    }
    return grads;
}

ParamSet finite_diff_grad(const std::function<double(const ParamSet&)>& f,
                          const ParamSet& params, double h) {
    if (!(h > 0.0)) {
        throw ContractError("finite_diff_grad: h must be positive");
    }
    ParamSet work = params;
    ParamSet grads = params.like_zeros();
    for (std::size_t e = 0; e < work.size(); ++e) {
        Tensor& t = work.entries()[e].tensor;
        Tensor& g = grads.entries()[e].tensor;
        for (std::size_t i = 0; i < t.data.size(); ++i) {
            const double orig = t.data[i];
            t.data[i] = orig + h;
            const double fp = f(work);
            t.data[i] = orig - h;
            const double fm = f(work);
            t.data[i] = orig;
            g.data[i] = (fp - fm) / (2.0 * h);
        }
    }
    return grads;
}

}  // namespace sau
