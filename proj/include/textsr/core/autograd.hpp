#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <unordered_set>
#include <vector>

#include "textsr/core/tensor.hpp"

namespace textsr::ag {

// Reverse-mode autodiff over a dynamically built DAG. Nodes are created in
// topological order (children after parents), so backward just walks the
// reachable set by descending creation id. Graphs are rebuilt per forward
// pass; parameters are long-lived nodes reused across passes.

template <typename T>
struct Node {
    Tensor<T> value;
    Tensor<T> grad; // empty until first contribution
    bool requires_grad = false;
    uint64_t id = 0;
    std::vector<std::shared_ptr<Node<T>>> parents;
    std::function<void(Node<T>&)> backfn;

    Tensor<T>& grad_buf() {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

template <typename T>
using Var = std::shared_ptr<Node<T>>;

inline uint64_t next_node_id() {
    static std::atomic<uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

inline bool& grad_mode() {
    thread_local bool enabled = true;
    return enabled;
}

// Disables graph construction in scope (pure inference).
struct NoGradGuard {
    bool prev;
    NoGradGuard() : prev(grad_mode()) { grad_mode() = false; }
    ~NoGradGuard() { grad_mode() = prev; }
};

template <typename T>
Var<T> constant(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->id = next_node_id();
    return n;
}

template <typename T>
Var<T> parameter(Tensor<T> v) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(v);
    n->requires_grad = true;
    n->id = next_node_id();
    return n;
}

// Builds a result node; backfn is attached only when some parent needs grad
// and grad mode is on, so inference passes carry no tape.
template <typename T>
Var<T> make_op(Tensor<T> value, std::vector<Var<T>> parents,
               std::function<void(Node<T>&)> backfn) {
    auto n = std::make_shared<Node<T>>();
    n->value = std::move(value);
    n->id = next_node_id();
    bool needs = false;
    for (const auto& p : parents) needs |= p->requires_grad;
    if (needs && grad_mode()) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backfn = std::move(backfn);
    }
    return n;
}

template <typename T>
void backward(const Var<T>& root) {
    if (root->value.numel() != 1)
        throw ShapeError("backward: root must be scalar, got " + root->value.shape_str());
    if (!root->requires_grad) return;

    // reachable requires-grad ancestors
    std::vector<Node<T>*> order;
    std::unordered_set<Node<T>*> seen;
    std::vector<Node<T>*> stack{root.get()};
    seen.insert(root.get());
    while (!stack.empty()) {
        Node<T>* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const auto& p : n->parents) {
            if (p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(order.begin(), order.end(),
              [](const Node<T>* a, const Node<T>* b) { return a->id > b->id; });

    root->grad_buf()[0] = T(1);
    for (Node<T>* n : order) {
        if (!n->backfn) continue;
        n->grad_buf(); // ensure allocated even if no child contributed
        n->backfn(*n);
    }
}

template <typename T>
void zero_grad(const std::vector<Var<T>>& params) {
    for (const auto& p : params) p->grad = Tensor<T>();
}

} // namespace textsr::ag
