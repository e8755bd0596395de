#include "aagan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "aagan/errors.hpp"

namespace aagan {

namespace {

// c += a x b, all row-major dense.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = ai[p];
            if (aip == 0.0) continue;
            const double* bp = b + p * n;
            for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
        }
    }
}

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Var Graph::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var{nodes_.size() - 1};
}

Tensor& Graph::grad_buffer(std::size_t id) {
    if (!touched_[id]) {
        grads_[id] = Tensor::zeros(nodes_[id].value.shape());
        touched_[id] = 1;
    }
    return grads_[id];
}

Var Graph::leaf(Tensor value, bool trainable) {
    Node n;
    n.kind = OpKind::leaf;
    n.requires_grad = trainable;
    n.value = std::move(value);
    return push(std::move(n));
}

Var Graph::matmul(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    if (ta.rank() > 2 || tb.rank() > 2)
        throw ShapeError("matmul: expects rank <= 2, got " + ta.shape_str() + " and " +
                         tb.shape_str());
    const std::size_t m = ta.rows(), k = ta.cols();
    const std::size_t k2 = tb.rows(), n = tb.cols();
    if (k != k2)
        throw ShapeError("matmul: inner dimensions disagree: " + ta.shape_str() + " vs " +
                         tb.shape_str());

    Tensor out({m, n});
    gemm_acc(ta.values().data(), tb.values().data(), out.values().data(), m, k, n);

    Node node;
    node.kind = OpKind::matmul;
    node.in = {a.id, b.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(a.id) || wants_grad(b.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, a, b, m, k, n](Graph& g) {
        const Tensor& go = g.grads_[self];
        const Tensor& ta = g.nodes_[a.id].value;
        const Tensor& tb = g.nodes_[b.id].value;
        if (g.wants_grad(a.id)) {
            // dA += dC . B^T
            Tensor& ga = g.grad_buffer(a.id);
            for (std::size_t i = 0; i < m; ++i) {
                const double* gi = go.values().data() + i * n;
                double* gai = ga.values().data() + i * k;
                for (std::size_t p = 0; p < k; ++p) {
                    const double* bp = tb.values().data() + p * n;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
                    gai[p] += acc;
                }
            }
        }
        if (g.wants_grad(b.id)) {
            // dB += A^T . dC
            Tensor& gb = g.grad_buffer(b.id);
            for (std::size_t i = 0; i < m; ++i) {
                const double* ai = ta.values().data() + i * k;
                const double* gi = go.values().data() + i * n;
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = ai[p];
                    if (aip == 0.0) continue;
                    double* gbp = gb.values().data() + p * n;
                    for (std::size_t j = 0; j < n; ++j) gbp[j] += aip * gi[j];
                }
            }
        }
    };
    return push(std::move(node));
}

Var Graph::add(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "add");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += tb[i];

    Node node;
    node.kind = OpKind::add;
    node.in = {a.id, b.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(a.id) || wants_grad(b.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, a, b](Graph& g) {
        const Tensor& go = g.grads_[self];
        for (Var v : {a, b}) {
            if (!g.wants_grad(v.id)) continue;
            Tensor& gv = g.grad_buffer(v.id);
            for (std::size_t i = 0; i < go.size(); ++i) gv[i] += go[i];
        }
    };
    return push(std::move(node));
}

Var Graph::sub(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "sub");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= tb[i];

    Node node;
    node.kind = OpKind::sub;
    node.in = {a.id, b.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(a.id) || wants_grad(b.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, a, b](Graph& g) {
        const Tensor& go = g.grads_[self];
        if (g.wants_grad(a.id)) {
            Tensor& ga = g.grad_buffer(a.id);
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
        }
        if (g.wants_grad(b.id)) {
            Tensor& gb = g.grad_buffer(b.id);
            for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
        }
    };
    return push(std::move(node));
}

Var Graph::mul(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    require_same_shape(ta, tb, "mul");
    Tensor out = ta;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];

    Node node;
    node.kind = OpKind::mul;
    node.in = {a.id, b.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(a.id) || wants_grad(b.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, a, b](Graph& g) {
        const Tensor& go = g.grads_[self];
        const Tensor& ta = g.nodes_[a.id].value;
        const Tensor& tb = g.nodes_[b.id].value;
        if (g.wants_grad(a.id)) {
            Tensor& ga = g.grad_buffer(a.id);
            for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * tb[i];
        }
        if (g.wants_grad(b.id)) {
            Tensor& gb = g.grad_buffer(b.id);
            for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * ta[i];
        }
    };
    return push(std::move(node));
}

Var Graph::add_row(Var x, Var bias) {
    const Tensor& tx = nodes_[x.id].value;
    const Tensor& tb = nodes_[bias.id].value;
    const std::size_t m = tx.rows(), n = tx.cols();
    if (tb.size() != n)
        throw ShapeError("add_row: bias " + tb.shape_str() + " does not match row width of " +
                         tx.shape_str());
    Tensor out = tx;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] += tb[j];

    Node node;
    node.kind = OpKind::add_row;
    node.in = {x.id, bias.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(x.id) || wants_grad(bias.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x, bias, m, n](Graph& g) {
        const Tensor& go = g.grads_[self];
        if (g.wants_grad(x.id)) {
            Tensor& gx = g.grad_buffer(x.id);
            for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i];
        }
        if (g.wants_grad(bias.id)) {
            Tensor& gb = g.grad_buffer(bias.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gb[j] += go[i * n + j];
        }
    };
    return push(std::move(node));
}

Var Graph::scale_rows(Var x, Var col) {
    const Tensor& tx = nodes_[x.id].value;
    const Tensor& tc = nodes_[col.id].value;
    const std::size_t m = tx.rows(), n = tx.cols();
    if (tc.size() != m)
        throw ShapeError("scale_rows: column " + tc.shape_str() + " does not match row count of " +
                         tx.shape_str());
    Tensor out = tx;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out[i * n + j] *= tc[i];

    Node node;
    node.kind = OpKind::scale_rows;
    node.in = {x.id, col.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(x.id) || wants_grad(col.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x, col, m, n](Graph& g) {
        const Tensor& go = g.grads_[self];
        const Tensor& tx = g.nodes_[x.id].value;
        const Tensor& tc = g.nodes_[col.id].value;
        if (g.wants_grad(x.id)) {
            Tensor& gx = g.grad_buffer(x.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += go[i * n + j] * tc[i];
        }
        if (g.wants_grad(col.id)) {
            Tensor& gc = g.grad_buffer(col.id);
            for (std::size_t i = 0; i < m; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < n; ++j) acc += go[i * n + j] * tx[i * n + j];
                gc[i] += acc;
            }
        }
    };
    return push(std::move(node));
}

Var Graph::affine(Var x, double a, double b) {
    const Tensor& tx = nodes_[x.id].value;
    Tensor out = tx;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * out[i] + b;

    Node node;
    node.kind = OpKind::affine;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x, a](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const Tensor& go = g.grads_[self];
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += a * go[i];
    };
    return push(std::move(node));
}

Var Graph::sigmoid(Var x) {
    const Tensor& tx = nodes_[x.id].value;
    if (!tx.all_finite()) throw NumericError("sigmoid: non-finite input");
    Tensor out = tx;
    for (double& v : out.values())
        v = std::min(1.0 - kActivationGuard, std::max(kActivationGuard, stable_sigmoid(v)));

    Node node;
    node.kind = OpKind::sigmoid;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const Tensor& go = g.grads_[self];
        const Tensor& y = g.nodes_[self].value;
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
    };
    return push(std::move(node));
}

Var Graph::tanh(Var x) {
    const Tensor& tx = nodes_[x.id].value;
    if (!tx.all_finite()) throw NumericError("tanh: non-finite input");
    Tensor out = tx;
    for (double& v : out.values())
        v = std::min(1.0 - kActivationGuard, std::max(kActivationGuard - 1.0, std::tanh(v)));

    Node node;
    node.kind = OpKind::tanh_;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const Tensor& go = g.grads_[self];
        const Tensor& y = g.nodes_[self].value;
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] * (1.0 - y[i] * y[i]);
    };
    return push(std::move(node));
}

Var Graph::log(Var x) {
    const Tensor& tx = nodes_[x.id].value;
    Tensor out = tx;
    for (double& v : out.values()) v = std::log(v);

    Node node;
    node.kind = OpKind::log_;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const Tensor& go = g.grads_[self];
        const Tensor& tx = g.nodes_[x.id].value;
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < go.size(); ++i) gx[i] += go[i] / tx[i];
    };
    return push(std::move(node));
}

Var Graph::clamp(Var x, double lo, double hi, bool count_events) {
    const Tensor& tx = nodes_[x.id].value;
    Tensor out = tx;
    auto mask = std::make_shared<std::vector<unsigned char>>(out.size(), 0);
    std::size_t events = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i] < lo) {
            out[i] = lo;
            (*mask)[i] = 1;
            ++events;
        } else if (out[i] > hi) {
            out[i] = hi;
            (*mask)[i] = 1;
            ++events;
        }
    }
    if (count_events) clamp_events_ += events;

    Node node;
    node.kind = OpKind::clamp;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, x, mask](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const Tensor& go = g.grads_[self];
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < go.size(); ++i)
            if (!(*mask)[i]) gx[i] += go[i];
    };
    return push(std::move(node));
}

Var Graph::concat_cols(Var a, Var b) {
    const Tensor& ta = nodes_[a.id].value;
    const Tensor& tb = nodes_[b.id].value;
    if (ta.rank() > 2 || tb.rank() > 2)
        throw ShapeError("concat: expects rank <= 2, got " + ta.shape_str() + " and " +
                         tb.shape_str());
    const std::size_t m = ta.rows(), p = ta.cols(), q = tb.cols();
    if (tb.rows() != m)
        throw ShapeError("concat: leading dimensions disagree: " + ta.shape_str() + " vs " +
                         tb.shape_str());

    const bool vector_out = ta.rank() == 1 && tb.rank() == 1;
    Tensor out(vector_out ? std::vector<std::size_t>{p + q}
                          : std::vector<std::size_t>{m, p + q});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) out[i * (p + q) + j] = ta[i * p + j];
        for (std::size_t j = 0; j < q; ++j) out[i * (p + q) + p + j] = tb[i * q + j];
    }

    Node node;
    node.kind = OpKind::concat_cols;
    node.in = {a.id, b.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(a.id) || wants_grad(b.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, a, b, m, p, q](Graph& g) {
        const Tensor& go = g.grads_[self];
        if (g.wants_grad(a.id)) {
            Tensor& ga = g.grad_buffer(a.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < p; ++j) ga[i * p + j] += go[i * (p + q) + j];
        }
        if (g.wants_grad(b.id)) {
            Tensor& gb = g.grad_buffer(b.id);
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < q; ++j) gb[i * q + j] += go[i * (p + q) + p + j];
        }
    };
    return push(std::move(node));
}

Var Graph::sum(Var x) {
    const Tensor& tx = nodes_[x.id].value;
    double acc = 0.0;
    for (double v : tx.values()) acc += v;

    Node node;
    node.kind = OpKind::sum;
    node.in = {x.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(x.id);
    node.value = Tensor::scalar(acc);
    const std::size_t self = nodes_.size();
    node.back = [self, x](Graph& g) {
        if (!g.wants_grad(x.id)) return;
        const double go = g.grads_[self][0];
        Tensor& gx = g.grad_buffer(x.id);
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += go;
    };
    return push(std::move(node));
}

Var Graph::rows_cosine(Var p, Var q) {
    const Tensor& tp = nodes_[p.id].value;
    const Tensor& tq = nodes_[q.id].value;
    require_same_shape(tp, tq, "rows_cosine");
    const std::size_t m = tp.rows(), d = tp.cols();

    Tensor out({m, 1});
    auto norms = std::make_shared<std::vector<double>>(2 * m);
    for (std::size_t i = 0; i < m; ++i) {
        double dot = 0.0, np = 0.0, nq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double pv = tp[i * d + j], qv = tq[i * d + j];
            dot += pv * qv;
            np += pv * pv;
            nq += qv * qv;
        }
        np = std::sqrt(np);
        nq = std::sqrt(nq);
        if (np == 0.0 || nq == 0.0)
            throw DegenerateError("rows_cosine: zero-norm vector at row " + std::to_string(i));
        (*norms)[2 * i] = np;
        (*norms)[2 * i + 1] = nq;
        out[i] = dot / (np * nq);
    }

    Node node;
    node.kind = OpKind::rows_cosine;
    node.in = {p.id, q.id};
    node.n_in = 2;
    node.requires_grad = wants_grad(p.id) || wants_grad(q.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, p, q, m, d, norms](Graph& g) {
        const Tensor& go = g.grads_[self];
        const Tensor& sv = g.nodes_[self].value;
        const Tensor& tp = g.nodes_[p.id].value;
        const Tensor& tq = g.nodes_[q.id].value;
        const bool wp = g.wants_grad(p.id), wq = g.wants_grad(q.id);
        if (!wp && !wq) return;
        for (std::size_t i = 0; i < m; ++i) {
            const double gr = go[i], s = sv[i];
            const double np = (*norms)[2 * i], nq = (*norms)[2 * i + 1];
            if (wp) {
                Tensor& gp = g.grad_buffer(p.id);
                for (std::size_t j = 0; j < d; ++j)
                    gp[i * d + j] +=
                        gr * (tq[i * d + j] / (np * nq) - s * tp[i * d + j] / (np * np));
            }
            if (wq) {
                Tensor& gq = g.grad_buffer(q.id);
                for (std::size_t j = 0; j < d; ++j)
                    gq[i * d + j] +=
                        gr * (tp[i * d + j] / (np * nq) - s * tq[i * d + j] / (nq * nq));
            }
        }
    };
    return push(std::move(node));
}

Var Graph::softmax_rows(Var z) {
    const Tensor& tz = nodes_[z.id].value;
    const std::size_t m = tz.rows(), k = tz.cols();
    Tensor out = tz;
    for (std::size_t i = 0; i < m; ++i) {
        double mx = out[i * k];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, out[i * k + j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            out[i * k + j] = std::exp(out[i * k + j] - mx);
            denom += out[i * k + j];
        }
        for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= denom;
    }

    Node node;
    node.kind = OpKind::softmax_rows;
    node.in = {z.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(z.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    node.back = [self, z, m, k](Graph& g) {
        if (!g.wants_grad(z.id)) return;
        const Tensor& go = g.grads_[self];
        const Tensor& y = g.nodes_[self].value;
        Tensor& gz = g.grad_buffer(z.id);
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < k; ++j) dot += go[i * k + j] * y[i * k + j];
            for (std::size_t j = 0; j < k; ++j)
                gz[i * k + j] += y[i * k + j] * (go[i * k + j] - dot);
        }
    };
    return push(std::move(node));
}

Var Graph::softmax_cross_entropy_rows(Var z, std::vector<std::size_t> labels) {
    const Tensor& tz = nodes_[z.id].value;
    const std::size_t m = tz.rows(), k = tz.cols();
    if (k < 2) throw ShapeError("softmax_cross_entropy: needs K >= 2, got " + tz.shape_str());
    if (labels.size() != m)
        throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(m) + " rows");
    for (std::size_t lbl : labels)
        if (lbl >= k)
            throw ShapeError("softmax_cross_entropy: label " + std::to_string(lbl) +
                             " out of range for K=" + std::to_string(k));

    Tensor out({m, 1});
    for (std::size_t i = 0; i < m; ++i) {
        double mx = tz[i * k];
        for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, tz[i * k + j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < k; ++j) denom += std::exp(tz[i * k + j] - mx);
        out[i] = std::log(denom) + mx - tz[i * k + labels[i]];
    }

    Node node;
    node.kind = OpKind::softmax_ce_rows;
    node.in = {z.id, 0};
    node.n_in = 1;
    node.requires_grad = wants_grad(z.id);
    node.value = std::move(out);
    const std::size_t self = nodes_.size();
    auto lbls = std::make_shared<std::vector<std::size_t>>(std::move(labels));
    node.back = [self, z, m, k, lbls](Graph& g) {
        if (!g.wants_grad(z.id)) return;
        const Tensor& go = g.grads_[self];
        const Tensor& tz = g.nodes_[z.id].value;
        Tensor& gz = g.grad_buffer(z.id);
        for (std::size_t i = 0; i < m; ++i) {
            double mx = tz[i * k];
            for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, tz[i * k + j]);
            double denom = 0.0;
            for (std::size_t j = 0; j < k; ++j) denom += std::exp(tz[i * k + j] - mx);
            const double gr = go[i];
            for (std::size_t j = 0; j < k; ++j) {
                const double p = std::exp(tz[i * k + j] - mx) / denom;
                gz[i * k + j] += gr * (p - (j == (*lbls)[i] ? 1.0 : 0.0));
            }
        }
    };
    return push(std::move(node));
}

void Graph::backward(Var loss) {
    if (nodes_[loss.id].value.size() != 1)
        throw ShapeError("backward: loss must be scalar, got " +
                         nodes_[loss.id].value.shape_str());

    grads_.assign(nodes_.size(), Tensor());
    touched_.assign(nodes_.size(), 0);
    backward_order_.clear();

    grad_buffer(loss.id)[0] = 1.0;
    for (std::size_t i = loss.id + 1;; --i) {
        const std::size_t id = i - 1;
        const Node& node = nodes_[id];
        if (!touched_[id] || !node.requires_grad) {
            if (id == 0) break;
            continue;
        }
        backward_order_.push_back(id);
        if (node.back) node.back(*this);
        if (id == 0) break;
    }
}

const Tensor& Graph::grad(Var v) {
    if (grads_.size() < nodes_.size()) {
        grads_.resize(nodes_.size());
        touched_.resize(nodes_.size(), 0);
    }
    return grad_buffer(v.id);
}

} // namespace aagan
