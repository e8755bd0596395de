#ifndef AAGAN_GRAPH_HPP
#define AAGAN_GRAPH_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "aagan/tensor.hpp"

namespace aagan {

enum class OpKind {
    leaf,
    matmul,
    add,
    sub,
    mul,
    add_row,
    scale_rows,
    affine,
    sigmoid,
    tanh_,
    log_,
    clamp,
    concat_cols,
    sum,
    rows_cosine,
    softmax_rows,
    softmax_ce_rows,
};

// Handle into a Graph; cheap to copy.
struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
    bool valid() const { return id != static_cast<std::size_t>(-1); }
};

// sigmoid and tanh outputs are pulled this far inside their open codomains.
// In deep saturation doubles round to exactly 0, 1 or -1 while the true
// derivative is vanishingly small; the guard keeps downstream logs and the
// alpha_v + alpha_tp == 1 identity well-defined without disturbing any value
// reachable by moderate pre-activations.
inline constexpr double kActivationGuard = 1e-12;

// Define-by-run tape. Nodes are appended in construction order, which is a
// topological order by definition; backward scans the node list in exact
// reverse. A graph is built per forward pass and discarded.
//
// Graphs are not thread-safe; build and differentiate each instance from a
// single thread.
class Graph {
public:
    struct Node {
        OpKind kind = OpKind::leaf;
        std::array<std::size_t, 2> in{};
        unsigned n_in = 0;
        bool requires_grad = false;
        Tensor value;
        std::function<void(Graph&)> back;
    };

    // Leaves. Trainable leaves receive gradients; constants are skipped
    // during backward entirely.
    Var leaf(Tensor value, bool trainable);
    Var constant(Tensor value) { return leaf(std::move(value), false); }
    Var scalar(double v) { return constant(Tensor::scalar(v)); }

    Var matmul(Var a, Var b);
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var add_row(Var x, Var bias);                  // [m x n] + [1 x n]
    Var scale_rows(Var x, Var col);                // [m x n] scaled per row by [m x 1]
    Var affine(Var x, double a, double b);         // elementwise a*x + b
    Var sigmoid(Var x);
    Var tanh(Var x);
    Var log(Var x);
    Var clamp(Var x, double lo, double hi, bool count_events = false);
    Var concat_cols(Var a, Var b);
    Var sum(Var x);                                // -> scalar [1]
    Var mean(Var x) { return affine(sum(x), 1.0 / static_cast<double>(value(x).size()), 0.0); }
    Var rows_cosine(Var p, Var q);                 // [m x d] pairs -> [m x 1]
    Var softmax_rows(Var z);
    Var softmax_cross_entropy_rows(Var z, std::vector<std::size_t> labels); // -> [m x 1]

    // The reference is into the node list; adding any node may invalidate it.
    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    OpKind kind(Var v) const { return nodes_[v.id].kind; }
    std::size_t node_count() const { return nodes_.size(); }
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }

    // Reverse pass from a scalar loss. Resets any previous gradients, so a
    // graph can be differentiated from several losses in turn.
    void backward(Var loss);

    // Gradient of the last backward's loss w.r.t. v. Exact zeros for any
    // node not on a path to the loss.
    const Tensor& grad(Var v);

    // Clamp events observed during forward construction (count_events ops).
    std::size_t clamp_events() const { return clamp_events_; }

    // Node ids visited by the last backward, in visit order.
    const std::vector<std::size_t>& last_backward_order() const { return backward_order_; }

private:
    friend struct GraphOps;

    Var push(Node node);
    Tensor& grad_buffer(std::size_t id);
    bool wants_grad(std::size_t id) const { return nodes_[id].requires_grad; }

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;
    std::vector<unsigned char> touched_;
    std::vector<std::size_t> backward_order_;
    std::size_t clamp_events_ = 0;
};

} // namespace aagan

#endif
