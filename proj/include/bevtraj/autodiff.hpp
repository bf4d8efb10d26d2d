#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "bevtraj/errors.hpp"
#include "bevtraj/tensor.hpp"

namespace bevtraj::ad {

struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

// Reverse-mode tape over dense tensors. Nodes are appended in forward order,
// so reverse creation order is a valid topological order for backward().
// A tape is confined to one thread from construction through backward.
class Tape {
public:
    Var leaf(Tensor value, bool requires_grad = false) {
        check_finite(value, "leaf");
        return push(std::move(value), requires_grad, nullptr);
    }

    // C = A * B, (n x k) * (k x m).
    Var matmul(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (A.rank() != 2 || B.rank() != 2 || A.cols() != B.rows())
            throw shape_error("matmul: incompatible shapes " + shape_str(A) + " vs " + shape_str(B));
        Tensor C = Tensor::zeros({A.rows(), B.cols()});
        matmul_into(A, B, C);
        check_finite(C, "matmul");
        return push(std::move(C), requires_grad(a) || requires_grad(b), [a, b](Tape& t, const Tensor& g, const Tensor&) {
            // dA += g * B^T ; dB += A^T * g
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            if (t.requires_grad(a)) {
                Tensor& dA = t.node(a.id).grad;
                const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < k; ++j) {
                        double acc = 0.0;
                        for (std::size_t c = 0; c < m; ++c) acc += g(i, c) * B(j, c);
                        dA(i, j) += acc;
                    }
            }
            if (t.requires_grad(b)) {
                Tensor& dB = t.node(b.id).grad;
                const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t j = 0; j < k; ++j) {
                        const double av = A(r, j);
                        if (av == 0.0) continue;
                        for (std::size_t c = 0; c < m; ++c) dB(j, c) += av * g(r, c);
                    }
            }
        });
    }

    // Same-shape add, or row-broadcast: (n x m) + (m) / (1 x m).
    Var add(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        const bool broadcast = !A.same_shape(B);
        if (broadcast && !(A.rank() == 2 && B.cols() == A.cols() && B.rows() == 1))
            throw shape_error("add: incompatible shapes " + shape_str(A) + " vs " + shape_str(B));
        Tensor C = A;
        if (broadcast) {
            for (std::size_t i = 0; i < A.rows(); ++i)
                for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) += B[j];
        } else {
            for (std::size_t i = 0; i < A.size(); ++i) C[i] += B[i];
        }
        check_finite(C, "add");
        return push(std::move(C), requires_grad(a) || requires_grad(b),
                    [a, b, broadcast](Tape& t, const Tensor& g, const Tensor&) {
                        if (t.requires_grad(a)) {
                            Tensor& dA = t.node(a.id).grad;
                            for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i];
                        }
                        if (t.requires_grad(b)) {
                            Tensor& dB = t.node(b.id).grad;
                            if (broadcast) {
                                for (std::size_t i = 0; i < g.rows(); ++i)
                                    for (std::size_t j = 0; j < g.cols(); ++j) dB[j] += g(i, j);
                            } else {
                                for (std::size_t i = 0; i < g.size(); ++i) dB[i] += g[i];
                            }
                        }
                    });
    }

    // Concatenate along the last axis.
    Var concat(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (A.rank() != B.rank() || (A.rank() == 2 && A.rows() != B.rows()))
            throw shape_error("concat: incompatible shapes " + shape_str(A) + " vs " + shape_str(B));
        Tensor C;
        if (A.rank() == 1) {
            C = Tensor::zeros({A.cols() + B.cols()});
            std::copy(A.data.begin(), A.data.end(), C.data.begin());
            std::copy(B.data.begin(), B.data.end(), C.data.begin() + static_cast<std::ptrdiff_t>(A.cols()));
        } else {
            C = Tensor::zeros({A.rows(), A.cols() + B.cols()});
            for (std::size_t i = 0; i < A.rows(); ++i) {
                for (std::size_t j = 0; j < A.cols(); ++j) C(i, j) = A(i, j);
                for (std::size_t j = 0; j < B.cols(); ++j) C(i, A.cols() + j) = B(i, j);
            }
        }
        const std::size_t ac = A.cols();
        return push(std::move(C), requires_grad(a) || requires_grad(b), [a, b, ac](Tape& t, const Tensor& g, const Tensor&) {
            const std::size_t rows = g.rows();
            const std::size_t bc = g.cols() - ac;
            if (t.requires_grad(a)) {
                Tensor& dA = t.node(a.id).grad;
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < ac; ++j) dA[i * ac + j] += g(i, j);
            }
            if (t.requires_grad(b)) {
                Tensor& dB = t.node(b.id).grad;
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < bc; ++j) dB[i * bc + j] += g(i, ac + j);
            }
        });
    }

    Var sigmoid(Var a) {
        Tensor C = value(a);
        for (auto& v : C.data) v = 1.0 / (1.0 + std::exp(-v));
        check_finite(C, "sigmoid");
        return push(std::move(C), requires_grad(a), [a](Tape& t, const Tensor& g, const Tensor& out) {
            if (!t.requires_grad(a)) return;
            Tensor& dA = t.node(a.id).grad;
            for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * out[i] * (1.0 - out[i]);
        });
    }

    Var tanh(Var a) {
        Tensor C = value(a);
        for (auto& v : C.data) v = std::tanh(v);
        check_finite(C, "tanh");
        return push(std::move(C), requires_grad(a), [a](Tape& t, const Tensor& g, const Tensor& out) {
            if (!t.requires_grad(a)) return;
            Tensor& dA = t.node(a.id).grad;
            for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * (1.0 - out[i] * out[i]);
        });
    }

    Var relu(Var a) {
        Tensor C = value(a);
        for (auto& v : C.data) v = v > 0.0 ? v : 0.0;
        return push(std::move(C), requires_grad(a), [a](Tape& t, const Tensor& g, const Tensor&) {
            if (!t.requires_grad(a)) return;
            const Tensor& in = t.value(a);
            Tensor& dA = t.node(a.id).grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                if (in[i] > 0.0) dA[i] += g[i];
        });
    }

    // Elementwise product (gate application).
    Var mul(Var a, Var b) {
        const Tensor& A = value(a);
        const Tensor& B = value(b);
        if (!A.same_shape(B)) throw shape_error("mul: incompatible shapes " + shape_str(A) + " vs " + shape_str(B));
        Tensor C = A;
        for (std::size_t i = 0; i < C.size(); ++i) C[i] *= B[i];
        check_finite(C, "mul");
        return push(std::move(C), requires_grad(a) || requires_grad(b), [a, b](Tape& t, const Tensor& g, const Tensor&) {
            const Tensor& A = t.value(a);
            const Tensor& B = t.value(b);
            if (t.requires_grad(a)) {
                Tensor& dA = t.node(a.id).grad;
                for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i] * B[i];
            }
            if (t.requires_grad(b)) {
                Tensor& dB = t.node(b.id).grad;
                for (std::size_t i = 0; i < g.size(); ++i) dB[i] += g[i] * A[i];
            }
        });
    }

    // Column-wise mean over rows, (n x m) -> (1 x m). Each column is summed
    // in sorted-value order so the result is invariant under row permutation
    // bit-for-bit, not just mathematically.
    Var mean_rows(Var a) {
        const Tensor& A = value(a);
        if (A.rank() != 2) throw shape_error("mean_rows: expected rank-2 input, got " + shape_str(A));
        const std::size_t n = A.rows(), m = A.cols();
        Tensor C = Tensor::zeros({1, m});
        std::vector<double> col(n);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t i = 0; i < n; ++i) col[i] = A(i, j);
            std::sort(col.begin(), col.end());
            double acc = 0.0;
            for (double v : col) acc += v;
            C[j] = acc / static_cast<double>(n);
        }
        check_finite(C, "mean_rows");
        return push(std::move(C), requires_grad(a), [a, n](Tape& t, const Tensor& g, const Tensor&) {
            if (!t.requires_grad(a)) return;
            Tensor& dA = t.node(a.id).grad;
            const double inv = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < g.size(); ++j) dA[i * g.size() + j] += g[j] * inv;
        });
    }

    Var scale(Var a, double c) {
        Tensor C = value(a);
        for (auto& v : C.data) v *= c;
        check_finite(C, "scale");
        return push(std::move(C), requires_grad(a), [a, c](Tape& t, const Tensor& g, const Tensor&) {
            if (!t.requires_grad(a)) return;
            Tensor& dA = t.node(a.id).grad;
            for (std::size_t i = 0; i < g.size(); ++i) dA[i] += c * g[i];
        });
    }

    // Data-layout identity; gradient passes through unchanged.
    Var reshape(Var a, std::vector<std::size_t> shape) {
        const Tensor& A = value(a);
        std::size_t n = 1;
        for (auto d : shape) n *= d;
        if (n != A.size()) throw shape_error("reshape: size mismatch for " + shape_str(A));
        Tensor C = A;
        C.shape = std::move(shape);
        return push(std::move(C), requires_grad(a), [a](Tape& t, const Tensor& g, const Tensor&) {
            if (!t.requires_grad(a)) return;
            Tensor& dA = t.node(a.id).grad;
            for (std::size_t i = 0; i < g.size(); ++i) dA[i] += g[i];
        });
    }

    // Mean squared error over every scalar component of (truth - pred).
    Var mse(const Tensor& truth, Var pred) {
        const Tensor& P = value(pred);
        if (!P.same_shape(truth)) throw shape_error("mse: incompatible shapes " + shape_str(truth) + " vs " + shape_str(P));
        if (P.size() == 0) throw shape_error("mse: empty input");
        double acc = 0.0;
        for (std::size_t i = 0; i < P.size(); ++i) {
            const double d = P[i] - truth[i];
            acc += d * d;
        }
        Tensor C = Tensor::vec({acc / static_cast<double>(P.size())});
        check_finite(C, "mse");
        Tensor y = truth;
        return push(std::move(C), requires_grad(pred), [pred, y = std::move(y)](Tape& t, const Tensor& g, const Tensor&) {
            if (!t.requires_grad(pred)) return;
            const Tensor& P = t.value(pred);
            Tensor& dP = t.node(pred.id).grad;
            const double c = 2.0 * g[0] / static_cast<double>(P.size());
            for (std::size_t i = 0; i < P.size(); ++i) dP[i] += c * (P[i] - y[i]);
        });
    }

    // Seeds the (scalar) root gradient with 1 and runs the tape in reverse.
    void backward(Var root) {
        Node& r = node(root.id);
        if (r.value.size() != 1) throw shape_error("backward: root must be scalar, got " + shape_str(r.value));
        for (auto& n : nodes_)
            for (auto& gv : n.grad.data) gv = 0.0;
        r.grad[0] = 1.0;
        for (std::size_t i = root.id + 1; i-- > 0;) {
            Node& n = nodes_[i];
            if (n.back && n.requires_grad) n.back(*this, n.grad, n.value);
        }
    }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }
    const Tensor& grad(Var v) const { return nodes_[v.id].grad; }
    bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

private:
    using BackFn = std::function<void(Tape&, const Tensor& upstream, const Tensor& out)>;

    struct Node {
        Tensor value;
        Tensor grad;
        bool requires_grad;
        BackFn back;
    };

    Node& node(std::size_t id) { return nodes_[id]; }

    Var push(Tensor value, bool requires_grad, BackFn back) {
        Node n;
        n.grad = Tensor::zeros(value.shape);
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{nodes_.size() - 1};
    }

    static void check_finite(const Tensor& t, const char* op) {
        if (!t.all_finite()) throw numeric_error(std::string(op) + ": non-finite result");
    }

    static void matmul_into(const Tensor& A, const Tensor& B, Tensor& C) {
        const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
        for (std::size_t i = 0; i < n; ++i) {
            double* crow = &C.data[i * m];
            for (std::size_t p = 0; p < k; ++p) {
                const double av = A.data[i * k + p];
                if (av == 0.0) continue;
                const double* brow = &B.data[p * m];
                for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
            }
        }
    }

    std::vector<Node> nodes_;
};

} // namespace bevtraj::ad
