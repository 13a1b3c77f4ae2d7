#include "cograph/tape.hpp"

#include <cmath>

namespace cograph {

Tape::Id Tape::check_id(Id id) const {
    detail::require(id >= 0 && static_cast<std::size_t>(id) < nodes_.size(),
                    "tape: invalid node id " + std::to_string(id));
    return id;
}

Tape::Id Tape::emit(Tensor value, bool needs_grad, std::function<void(Tape&, Id)> back) {
    if (check_finite_)
        detail::require(value.all_finite(), "tape: non-finite value produced by an operation");
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Tape::grad_of(Id id) {
    Node& n = nodes_[check_id(id)];
    if (!n.grad_alloc) {
        n.grad = Tensor::zeros(n.value.shape());
        n.grad_alloc = true;
    }
    return n.grad;
}

Tape::Id Tape::input(Tensor v) { return emit(std::move(v), false, nullptr); }

Tape::Id Tape::param(Parameter& p) {
    Id id = emit(p.value, p.trainable, nullptr);
    nodes_[id].bound = &p;
    return id;
}

Tape::Id Tape::matmul(Id a, Id b) {
    Tensor c = cograph::matmul(val(a), val(b));
    return emit(std::move(c), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) mm_acc_nt(g, t.val(b), t.grad_of(a));
        if (t.needs(b)) mm_acc_tn(t.val(a), g, t.grad_of(b));
    });
}

Tape::Id Tape::transpose(Id a) {
    return emit(cograph::transpose(val(a)), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        Tensor gt = cograph::transpose(t.nodes_[self].grad);
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += gt[i];
    });
}

Tape::Id Tape::add(Id a, Id b) {
    return emit(val(a) + val(b), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) {
            Tensor& da = t.grad_of(a);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i];
        }
        if (t.needs(b)) {
            Tensor& db = t.grad_of(b);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[i];
        }
    });
}

Tape::Id Tape::sub(Id a, Id b) {
    return emit(val(a) - val(b), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) {
            Tensor& da = t.grad_of(a);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i];
        }
        if (t.needs(b)) {
            Tensor& db = t.grad_of(b);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] -= g[i];
        }
    });
}

Tape::Id Tape::hadamard(Id a, Id b) {
    return emit(cograph::hadamard(val(a), val(b)), needs(a) || needs(b), [a, b](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) {
            Tensor& da = t.grad_of(a);
            const Tensor& vb = t.val(b);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * vb[i];
        }
        if (t.needs(b)) {
            Tensor& db = t.grad_of(b);
            const Tensor& va = t.val(a);
            for (std::size_t i = 0; i < db.size(); ++i) db[i] += g[i] * va[i];
        }
    });
}

Tape::Id Tape::add_rowvec(Id m, Id row) {
    const Tensor& mv = val(m);
    const Tensor& rv = val(row);
    detail::require(rv.rank() == 2 && rv.rows() == 1 && mv.rank() == 2 && rv.cols() == mv.cols(),
                    "add_rowvec: want [r×c] plus [1×c], got " + detail::shape_str(mv.shape()) +
                        " and " + detail::shape_str(rv.shape()));
    Tensor out = mv;
    const std::size_t r = mv.rows(), c = mv.cols();
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) += rv[j];
    return emit(std::move(out), needs(m) || needs(row), [m, row, r, c](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(m)) {
            Tensor& dm = t.grad_of(m);
            for (std::size_t i = 0; i < dm.size(); ++i) dm[i] += g[i];
        }
        if (t.needs(row)) {
            Tensor& dr = t.grad_of(row);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) dr[j] += g.at(i, j);
        }
    });
}

Tape::Id Tape::scale(Id a, double c) {
    Tensor out = val(a);
    for (auto& v : out.data()) v = static_cast<Real>(v * c);
    return emit(std::move(out), needs(a), [a, c](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += static_cast<Real>(g[i] * c);
    });
}

Tape::Id Tape::mul_scalar(Id a, Id s) {
    detail::require(val(s).size() == 1, "mul_scalar: scalar operand must have one element");
    const Real sv = val(s)[0];
    Tensor out = val(a);
    for (auto& v : out.data()) v *= sv;
    return emit(std::move(out), needs(a) || needs(s), [a, s, sv](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) {
            Tensor& da = t.grad_of(a);
            for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i] * sv;
        }
        if (t.needs(s)) {
            const Tensor& va = t.val(a);
            Real acc = 0;
            for (std::size_t i = 0; i < va.size(); ++i) acc += g[i] * va[i];
            t.grad_of(s)[0] += acc;
        }
    });
}

Tape::Id Tape::relu(Id a) {
    Tensor out = val(a);
    for (auto& v : out.data())
        if (v < Real(0)) v = Real(0);
    return emit(std::move(out), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        const Tensor& va = t.val(a);
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i)
            if (va[i] > Real(0)) da[i] += g[i];
    });
}

Tape::Id Tape::softmax_rows(Id a) {
    Tensor y = cograph::softmax_rows(val(a));
    return emit(std::move(y), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& y = t.nodes_[self].value;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        const std::size_t r = y.rows(), c = y.cols();
        for (std::size_t i = 0; i < r; ++i) {
            Real dot = 0;
            for (std::size_t j = 0; j < c; ++j) dot += g.at(i, j) * y.at(i, j);
            for (std::size_t j = 0; j < c; ++j) da.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
        }
    });
}

Tape::Id Tape::layer_norm_rows(Id a, Id gain, Id shift, double eps) {
    const Tensor& x = val(a);
    const Tensor& gv = val(gain);
    const Tensor& bv = val(shift);
    detail::require(x.rank() == 2, "layer_norm_rows: rank-2 input required");
    const std::size_t r = x.rows(), c = x.cols();
    detail::require(gv.rank() == 2 && gv.rows() == 1 && gv.cols() == c && bv.same_shape(gv),
                    "layer_norm_rows: gain/shift must be [1×cols]");
    Tensor xhat({r, c});
    Tensor inv_std({r, 1});
    Tensor out({r, c});
    for (std::size_t i = 0; i < r; ++i) {
        double mu = 0;
        for (std::size_t j = 0; j < c; ++j) mu += x.at(i, j);
        mu /= static_cast<double>(c);
        double var = 0;
        for (std::size_t j = 0; j < c; ++j) {
            const double d = x.at(i, j) - mu;
            var += d * d;
        }
        var /= static_cast<double>(c);
        const double is = 1.0 / std::sqrt(var + eps);
        inv_std.at(i, 0) = static_cast<Real>(is);
        for (std::size_t j = 0; j < c; ++j) {
            const Real xh = static_cast<Real>((x.at(i, j) - mu) * is);
            xhat.at(i, j) = xh;
            out.at(i, j) = gv[j] * xh + bv[j];
        }
    }
    // xhat/inv_std live in the closure for the backward pass
    return emit(std::move(out), needs(a) || needs(gain) || needs(shift),
                [a, gain, shift, r, c, xhat = std::move(xhat),
                 inv_std = std::move(inv_std)](Tape& t, Id self) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& gv = t.val(gain);
                    if (t.needs(gain)) {
                        Tensor& dg = t.grad_of(gain);
                        for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < c; ++j) dg[j] += g.at(i, j) * xhat.at(i, j);
                    }
                    if (t.needs(shift)) {
                        Tensor& db = t.grad_of(shift);
                        for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < c; ++j) db[j] += g.at(i, j);
                    }
                    if (t.needs(a)) {
                        Tensor& da = t.grad_of(a);
                        for (std::size_t i = 0; i < r; ++i) {
                            double mean_dxhat = 0, mean_dxhat_xhat = 0;
                            for (std::size_t j = 0; j < c; ++j) {
                                const double dxh = g.at(i, j) * gv[j];
                                mean_dxhat += dxh;
                                mean_dxhat_xhat += dxh * xhat.at(i, j);
                            }
                            mean_dxhat /= static_cast<double>(c);
                            mean_dxhat_xhat /= static_cast<double>(c);
                            const double is = inv_std.at(i, 0);
                            for (std::size_t j = 0; j < c; ++j) {
                                const double dxh = g.at(i, j) * gv[j];
                                da.at(i, j) += static_cast<Real>(
                                    is * (dxh - mean_dxhat - xhat.at(i, j) * mean_dxhat_xhat));
                            }
                        }
                    }
                });
}

Tape::Id Tape::reshape(Id a, Shape shape) {
    Tensor out = val(a).reshaped(shape);
    Shape orig = val(a).shape();
    return emit(std::move(out), needs(a), [a, orig = std::move(orig)](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g[i];
    });
}

Tape::Id Tape::concat_cols(Id a, Id b) {
    const Tensor& av = val(a);
    const Tensor& bv = val(b);
    detail::require(av.rank() == 2 && bv.rank() == 2 && av.rows() == bv.rows(),
                    "concat_cols: row counts disagree, " + detail::shape_str(av.shape()) + " vs " +
                        detail::shape_str(bv.shape()));
    const std::size_t r = av.rows(), ca = av.cols(), cb = bv.cols();
    Tensor out({r, ca + cb});
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < ca; ++j) out.at(i, j) = av.at(i, j);
        for (std::size_t j = 0; j < cb; ++j) out.at(i, ca + j) = bv.at(i, j);
    }
    return emit(std::move(out), needs(a) || needs(b), [a, b, r, ca, cb](Tape& t, Id self) {
        const Tensor& g = t.nodes_[self].grad;
        if (t.needs(a)) {
            Tensor& da = t.grad_of(a);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < ca; ++j) da.at(i, j) += g.at(i, j);
        }
        if (t.needs(b)) {
            Tensor& db = t.grad_of(b);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < cb; ++j) db.at(i, j) += g.at(i, ca + j);
        }
    });
}

Tape::Id Tape::concat_rows(std::span<const Id> parts) {
    detail::require(!parts.empty(), "concat_rows: no parts");
    const std::size_t c = val(parts[0]).cols();
    std::size_t total = 0;
    for (Id p : parts) {
        detail::require(val(p).rank() == 2 && val(p).cols() == c,
                        "concat_rows: column counts disagree");
        total += val(p).rows();
    }
    Tensor out({total, c});
    std::vector<Id> ids(parts.begin(), parts.end());
    std::vector<std::size_t> offsets(ids.size());
    bool any = false;
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const Tensor& v = val(ids[k]);
        offsets[k] = off;
        for (std::size_t i = 0; i < v.size(); ++i) out[off * c + i] = v[i];
        off += v.rows();
        any = any || needs(ids[k]);
    }
    return emit(std::move(out), any,
                [ids = std::move(ids), offsets = std::move(offsets), c](Tape& t, Id self) {
                    const Tensor& g = t.nodes_[self].grad;
                    for (std::size_t k = 0; k < ids.size(); ++k) {
                        if (!t.needs(ids[k])) continue;
                        Tensor& dp = t.grad_of(ids[k]);
                        const std::size_t base = offsets[k] * c;
                        for (std::size_t i = 0; i < dp.size(); ++i) dp[i] += g[base + i];
                    }
                });
}

Tape::Id Tape::slice_row(Id a, std::size_t row) {
    const Tensor& av = val(a);
    detail::require(av.rank() == 2 && row < av.rows(), "slice_row: row out of range");
    const std::size_t c = av.cols();
    Tensor out({1, c});
    for (std::size_t j = 0; j < c; ++j) out[j] = av.at(row, j);
    return emit(std::move(out), needs(a), [a, row, c](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        for (std::size_t j = 0; j < c; ++j) da.at(row, j) += g[j];
    });
}

Tape::Id Tape::repeat_rows(Id row, std::size_t n) {
    const Tensor& rv = val(row);
    detail::require(rv.rank() == 2 && rv.rows() == 1, "repeat_rows: want a [1×c] row");
    const std::size_t c = rv.cols();
    Tensor out({n, c});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = rv[j];
    return emit(std::move(out), needs(row), [row, n, c](Tape& t, Id self) {
        if (!t.needs(row)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& dr = t.grad_of(row);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < c; ++j) dr[j] += g.at(i, j);
    });
}

Tape::Id Tape::mean_rows(Id a) {
    const Tensor& av = val(a);
    detail::require(av.rank() == 2 && av.rows() > 0, "mean_rows: nonempty rank-2 input required");
    const std::size_t r = av.rows(), c = av.cols();
    Tensor out({1, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out[j] += av.at(i, j);
    for (std::size_t j = 0; j < c; ++j) out[j] /= static_cast<Real>(r);
    return emit(std::move(out), needs(a), [a, r, c](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        const Real inv = Real(1) / static_cast<Real>(r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) da.at(i, j) += g[j] * inv;
    });
}

Tape::Id Tape::sum_all(Id a) {
    Real acc = 0;
    for (Real v : val(a).data()) acc += v;
    return emit(Tensor::scalar(acc), needs(a), [a](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Real g = t.nodes_[self].grad[0];
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
    });
}

Tape::Id Tape::mean_all(Id a) {
    const std::size_t n = val(a).size();
    detail::require(n > 0, "mean_all: empty input");
    Real acc = 0;
    for (Real v : val(a).data()) acc += v;
    acc /= static_cast<Real>(n);
    return emit(Tensor::scalar(acc), needs(a), [a, n](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Real g = t.nodes_[self].grad[0] / static_cast<Real>(n);
        Tensor& da = t.grad_of(a);
        for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
    });
}

Tape::Id Tape::conv2d(Id in, Id kernel, Id bias, std::size_t stride, std::size_t pad) {
    const Tensor& x = val(in);
    const Tensor& k = val(kernel);
    const Tensor& b = val(bias);
    detail::require(x.rank() == 3, "conv2d: input must be [C,H,W], got " + detail::shape_str(x.shape()));
    detail::require(k.rank() == 4, "conv2d: kernel must be [Cout,Cin,kh,kw]");
    const std::size_t cin = x.dim(0), h = x.dim(1), w = x.dim(2);
    const std::size_t cout = k.dim(0), kh = k.dim(2), kw = k.dim(3);
    detail::require(k.dim(1) == cin, "conv2d: kernel Cin " + std::to_string(k.dim(1)) +
                                         " does not match input channels " + std::to_string(cin));
    detail::require(b.size() == cout, "conv2d: bias size must equal Cout");
    detail::require(stride > 0 && h + 2 * pad >= kh && w + 2 * pad >= kw, "conv2d: kernel larger than padded input");
    const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
    const std::size_t ow = (w + 2 * pad - kw) / stride + 1;
    Tensor out({cout, oh, ow});

    auto xat = [&](std::size_t c, std::size_t y, std::size_t xx) { return x[(c * h + y) * w + xx]; };
    auto kat = [&](std::size_t co, std::size_t ci, std::size_t ky, std::size_t kx) {
        return k[((co * cin + ci) * kh + ky) * kw + kx];
    };
    for (std::size_t co = 0; co < cout; ++co)
        for (std::size_t oy = 0; oy < oh; ++oy)
            for (std::size_t ox = 0; ox < ow; ++ox) {
                Real acc = b[co];
                for (std::size_t ci = 0; ci < cin; ++ci)
                    for (std::size_t ky = 0; ky < kh; ++ky) {
                        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                                  static_cast<std::ptrdiff_t>(pad);
                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t kx = 0; kx < kw; ++kx) {
                            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                                      static_cast<std::ptrdiff_t>(pad);
                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                            acc += kat(co, ci, ky, kx) * xat(ci, static_cast<std::size_t>(iy),
                                                             static_cast<std::size_t>(ix));
                        }
                    }
                out[(co * oh + oy) * ow + ox] = acc;
            }

    return emit(std::move(out), needs(in) || needs(kernel) || needs(bias),
                [in, kernel, bias, cin, h, w, cout, kh, kw, oh, ow, stride, pad](Tape& t, Id self) {
                    const Tensor& g = t.nodes_[self].grad;
                    const Tensor& x = t.val(in);
                    const Tensor& k = t.val(kernel);
                    const bool nin = t.needs(in), nk = t.needs(kernel), nb = t.needs(bias);
                    Tensor* dx = nin ? &t.grad_of(in) : nullptr;
                    Tensor* dk = nk ? &t.grad_of(kernel) : nullptr;
                    Tensor* db = nb ? &t.grad_of(bias) : nullptr;
                    for (std::size_t co = 0; co < cout; ++co)
                        for (std::size_t oy = 0; oy < oh; ++oy)
                            for (std::size_t ox = 0; ox < ow; ++ox) {
                                const Real go = g[(co * oh + oy) * ow + ox];
                                if (go == Real(0)) continue;
                                if (nb) (*db)[co] += go;
                                for (std::size_t ci = 0; ci < cin; ++ci)
                                    for (std::size_t ky = 0; ky < kh; ++ky) {
                                        const std::ptrdiff_t iy =
                                            static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                            static_cast<std::ptrdiff_t>(pad);
                                        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
                                        for (std::size_t kx = 0; kx < kw; ++kx) {
                                            const std::ptrdiff_t ix =
                                                static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                                static_cast<std::ptrdiff_t>(pad);
                                            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                                            const std::size_t xi =
                                                (ci * h + static_cast<std::size_t>(iy)) * w +
                                                static_cast<std::size_t>(ix);
                                            const std::size_t kidx =
                                                ((co * cin + ci) * kh + ky) * kw + kx;
                                            if (nk) (*dk)[kidx] += go * x[xi];
                                            if (nin) (*dx)[xi] += go * k[kidx];
                                        }
                                    }
                            }
                });
}

Tape::Id Tape::adaptive_avg_pool2d(Id a, std::size_t out_h, std::size_t out_w) {
    const Tensor& x = val(a);
    detail::require(x.rank() == 2 || x.rank() == 3,
                    "adaptive_avg_pool2d: want [H,W] or [C,H,W], got " + detail::shape_str(x.shape()));
    const bool chan = x.rank() == 3;
    const std::size_t C = chan ? x.dim(0) : 1;
    const std::size_t H = chan ? x.dim(1) : x.dim(0);
    const std::size_t W = chan ? x.dim(2) : x.dim(1);
    detail::require(out_h > 0 && out_w > 0 && out_h <= H && out_w <= W,
                    "adaptive_avg_pool2d: output larger than input");
    Shape os = chan ? Shape{C, out_h, out_w} : Shape{out_h, out_w};
    Tensor out(os);
    auto lo = [](std::size_t i, std::size_t n, std::size_t o) { return (i * n) / o; };
    auto hi = [](std::size_t i, std::size_t n, std::size_t o) { return ((i + 1) * n + o - 1) / o; };
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t i = 0; i < out_h; ++i)
            for (std::size_t j = 0; j < out_w; ++j) {
                const std::size_t y0 = lo(i, H, out_h), y1 = hi(i, H, out_h);
                const std::size_t x0 = lo(j, W, out_w), x1 = hi(j, W, out_w);
                Real acc = 0;
                for (std::size_t y = y0; y < y1; ++y)
                    for (std::size_t xx = x0; xx < x1; ++xx) acc += x[(c * H + y) * W + xx];
                out[(c * out_h + i) * out_w + j] =
                    acc / static_cast<Real>((y1 - y0) * (x1 - x0));
            }
    return emit(std::move(out), needs(a), [a, C, H, W, out_h, out_w](Tape& t, Id self) {
        if (!t.needs(a)) return;
        const Tensor& g = t.nodes_[self].grad;
        Tensor& da = t.grad_of(a);
        auto lo = [](std::size_t i, std::size_t n, std::size_t o) { return (i * n) / o; };
        auto hi = [](std::size_t i, std::size_t n, std::size_t o) { return ((i + 1) * n + o - 1) / o; };
        for (std::size_t c = 0; c < C; ++c)
            for (std::size_t i = 0; i < out_h; ++i)
                for (std::size_t j = 0; j < out_w; ++j) {
                    const std::size_t y0 = lo(i, H, out_h), y1 = hi(i, H, out_h);
                    const std::size_t x0 = lo(j, W, out_w), x1 = hi(j, W, out_w);
                    const Real share = g[(c * out_h + i) * out_w + j] /
                                       static_cast<Real>((y1 - y0) * (x1 - x0));
                    for (std::size_t y = y0; y < y1; ++y)
                        for (std::size_t xx = x0; xx < x1; ++xx) da[(c * H + y) * W + xx] += share;
                }
    });
}

Tape::Id Tape::dropout(Id a, double rate, Rng& rng, bool training) {
    detail::require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
    if (!training || rate == 0.0) return a;
    const Tensor& x = val(a);
    Tensor mask(x.shape());
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
    for (auto& m : mask.data()) m = (rng.unit() < rate) ? Real(0) : keep_scale;
    return hadamard(a, input(std::move(mask)));
}

void Tape::backward(Id loss) {
    check_id(loss);
    detail::require(nodes_[loss].value.size() == 1,
                    "backward: loss must be scalar, got shape " +
                        detail::shape_str(nodes_[loss].value.shape()));
    grad_of(loss)[0] += Real(1);
    for (Id id = loss; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.needs_grad || !n.grad_alloc) continue;
        if (n.back) n.back(*this, id);
        if (n.bound && n.bound->trainable) {
            Tensor& pg = n.bound->grad;
            detail::require(pg.same_shape(n.grad), "backward: parameter gradient shape mismatch");
            for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += n.grad[i];
        }
    }
}

}  // namespace cograph
